"""Random forest over the 63 trackpoint features, grown from scratch.

Each tree is fit on a bootstrap resample (|train| draws with replacement)
with greedy Gini splits. At every node a fresh random subset of 7 candidate
features (floor of sqrt(63)) is drawn and the best threshold over those
candidates is kept; growth stops when a node is pure or no candidate split
improves the impurity. Trees vote with their leaf majority class; the
forest returns the majority of tree votes. All label-count ties resolve to
the alphabetically first letter.

Every random draw derives from (seed, tree index), so a forest of n trees
is bit-identical to the first n trees of any larger forest with the same
seed, and sweeps over n can grow one forest incrementally.
"""

from dataclasses import dataclass

import numpy as np

from .data import N_CLASSES, N_FEATURES, Dataset

MAX_FEATURES = int(np.sqrt(N_FEATURES))  # 7


def _split_scan(values, y, counts, n_classes):
    """Best Gini split over candidate columns; explicit loops so numba can jit it.

    values: (c, m) candidate feature rows; y: (m,) labels; counts: per-class
    totals for the node. Returns (column, threshold, found). Maximizing
    sum(count^2)/n over both sides minimizes the weighted Gini; the running
    sums update in O(1) per sample. Ties keep the first (column, position).
    """
    m = y.shape[0]
    total_sumsq = 0.0
    for c in range(n_classes):
        total_sumsq += counts[c] * counts[c]
    best_score = total_sumsq / m  # no-split baseline
    best_col = -1
    best_thr = 0.0
    cnt_left = np.zeros(n_classes, dtype=np.int64)
    for col in range(values.shape[0]):
        order = np.argsort(values[col])
        cnt_left[:] = 0
        sumsq_left = 0.0
        sumsq_right = total_sumsq
        for i in range(m - 1):
            c = y[order[i]]
            right_c = counts[c] - cnt_left[c]
            sumsq_right += 1.0 - 2.0 * right_c
            sumsq_left += 2.0 * cnt_left[c] + 1.0
            cnt_left[c] += 1
            lo = values[col, order[i]]
            hi = values[col, order[i + 1]]
            if hi > lo:
                n_left = i + 1.0
                score = sumsq_left / n_left + sumsq_right / (m - n_left)
                if score > best_score:
                    best_score = score
                    best_col = col
                    mid = (lo + hi) / 2.0
                    best_thr = mid if mid < hi else lo  # right side stays strictly above
    return best_col, best_thr, best_col >= 0


try:  # numba makes tree growth ~20x faster; plain python is a correct fallback
    from numba import njit

    _split_scan = njit(cache=True, nogil=True)(_split_scan)
except ImportError:  # pragma: no cover
    pass


@dataclass(frozen=True)
class Tree:
    """Flat binary tree: parallel node arrays, children -1 on leaves."""

    feature: np.ndarray  # (nodes,) split feature, -1 for leaf
    threshold: np.ndarray  # (nodes,)
    left: np.ndarray  # (nodes,)
    right: np.ndarray  # (nodes,)
    hist: np.ndarray  # (nodes, 24) class counts of the node's samples


@dataclass(frozen=True)
class ForestModel:
    trees: tuple
    n: int
    seed: int
    max_features: int


def _best_split(X: np.ndarray, y: np.ndarray, counts: np.ndarray, candidates: np.ndarray):
    """Best (feature, threshold) over candidate columns, or None."""
    values = np.ascontiguousarray(X[:, candidates].T)  # (c, m)
    col, threshold, found = _split_scan(values, y, counts, N_CLASSES)
    if not found:
        return None
    return int(candidates[col]), float(threshold)


def _grow_tree(X: np.ndarray, y: np.ndarray, rng: np.random.Generator, max_features: int) -> Tree:
    feature, threshold, left, right, hist = [], [], [], [], []
    # depth-first, left child first; stack entries: (sample indices, parent, is_left)
    stack = [(np.arange(X.shape[0]), -1, False)]
    while stack:
        idx, parent, is_left = stack.pop()
        node = len(feature)
        if parent >= 0:
            (left if is_left else right)[parent] = node
        counts = np.bincount(y[idx], minlength=N_CLASSES)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        hist.append(counts)
        if counts.max() == len(idx):  # pure
            continue
        candidates = rng.choice(N_FEATURES, size=max_features, replace=False)
        split = _best_split(X[idx], y[idx], counts, candidates)
        if split is None:
            continue
        feature[node], threshold[node] = split
        goes_left = X[idx, split[0]] <= split[1]
        stack.append((idx[~goes_left], node, False))
        stack.append((idx[goes_left], node, True))
    return Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        hist=np.array(hist, dtype=np.int64),
    )


def _fit_one_tree(X: np.ndarray, y: np.ndarray, seed: int, tree_index: int, max_features: int) -> Tree:
    rng = np.random.default_rng([seed, tree_index])
    bootstrap = rng.integers(0, X.shape[0], size=X.shape[0])
    return _grow_tree(X[bootstrap], y[bootstrap], rng, max_features)


def rf_fit(train: Dataset, n: int, seed: int = 0, max_features: int = MAX_FEATURES) -> ForestModel:
    if n < 1:
        raise ValueError("forest needs at least one tree")
    if len(train) < 1:
        raise ValueError("training set must be non-empty")
    X, y = train.features(), train.labels
    trees = tuple(_fit_one_tree(X, y, seed, t, max_features) for t in range(n))
    return ForestModel(trees=trees, n=n, seed=seed, max_features=max_features)


def tree_apply(tree: Tree, queries: np.ndarray) -> np.ndarray:
    """Leaf node index for each query row."""
    nodes = np.zeros(queries.shape[0], dtype=np.int64)
    while True:
        feat = tree.feature[nodes]
        active = feat >= 0
        if not active.any():
            return nodes
        rows = np.flatnonzero(active)
        f = feat[rows]
        below = queries[rows, f] <= tree.threshold[nodes[rows]]
        nodes[rows] = np.where(below, tree.left[nodes[rows]], tree.right[nodes[rows]])


def tree_predict(tree: Tree, queries: np.ndarray) -> np.ndarray:
    """Majority class of the reached leaf (ties alphabetical)."""
    return tree.hist[tree_apply(tree, queries)].argmax(axis=1)


def rf_votes(model: ForestModel, queries) -> np.ndarray:
    """Per-class tree-vote counts, shape (m, 24)."""
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    votes = np.zeros((queries.shape[0], N_CLASSES), dtype=np.int64)
    rows = np.arange(queries.shape[0])
    for tree in model.trees:
        votes[rows, tree_predict(tree, queries)] += 1
    return votes


def rf_predict_batch(model: ForestModel, queries) -> np.ndarray:
    return rf_votes(model, queries).argmax(axis=1)


def rf_predict(model: ForestModel, query) -> int:
    """Label index for one 63-value query."""
    return int(rf_predict_batch(model, np.asarray(query, dtype=float).reshape(1, -1))[0])


def rf_sweep(train: Dataset, validation: Dataset, n_range: tuple = (1, 200), seed: int = 0,
             max_features: int = MAX_FEATURES):
    """Validation accuracy for every forest size in the inclusive range.

    The forest grows one tree at a time, so the whole sweep costs a single
    n_max-tree training. Returns (best_n, accuracies) with the smallest best
    n on ties.
    """
    if len(train) == 0 or len(validation) == 0:
        raise ValueError("train and validation sets must be non-empty")
    n_lo, n_hi = n_range
    if not 1 <= n_lo <= n_hi:
        raise ValueError(f"bad n range {n_range}")
    X, y = train.features(), train.labels
    val_feats = validation.features()
    votes = np.zeros((len(validation), N_CLASSES), dtype=np.int64)
    rows = np.arange(len(validation))
    accuracies = np.empty(n_hi - n_lo + 1)
    for t in range(n_hi):
        tree = _fit_one_tree(X, y, seed, t, max_features)
        votes[rows, tree_predict(tree, val_feats)] += 1
        if t + 1 >= n_lo:
            preds = votes.argmax(axis=1)
            accuracies[t + 1 - n_lo] = np.mean(preds == validation.labels)
    best_n = n_lo + int(np.argmax(accuracies))
    return best_n, accuracies
