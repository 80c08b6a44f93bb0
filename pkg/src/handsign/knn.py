"""k-nearest-neighbours classifier on 63-value trackpoint features.

Lazy learner: fit stores the training vectors verbatim, prediction ranks
them by Euclidean distance and takes the majority label of the k nearest.
Vote ties go to the tied class with the closest member; exactly equal
member distances fall back to alphabetical label order. Equally distant
training points are ranked by their position in the training set, so
predictions are fully deterministic.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .data import N_CLASSES, Dataset


@dataclass(frozen=True)
class KnnModel:
    k: int
    features: np.ndarray  # (n, 63)
    labels: np.ndarray  # (n,)


def knn_fit(train: Dataset, k: int) -> KnnModel:
    if not 1 <= k <= len(train):
        raise ValueError(f"k must be in [1, {len(train)}], got {k}")
    return KnnModel(k=int(k), features=train.features().copy(), labels=train.labels.copy())


def _squared_distances(features: np.ndarray, query: np.ndarray) -> np.ndarray:
    diff = features - query
    return np.einsum("ij,ij->i", diff, diff)


def _vote(sorted_labels: np.ndarray, sorted_dists: np.ndarray, k: int) -> int:
    counts = np.bincount(sorted_labels[:k], minlength=N_CLASSES)
    top = counts.max()
    tied = np.flatnonzero(counts == top)
    if len(tied) == 1:
        return int(tied[0])
    # nearest member per tied class, then alphabetical
    best = None
    for c in tied:
        first = np.flatnonzero(sorted_labels[:k] == c)[0]
        key = (sorted_dists[first], c)
        if best is None or key < best:
            best = key
    return int(best[1])


def knn_predict(model: KnnModel, query) -> int:
    """Label index for one 63-value query."""
    query = np.asarray(query, dtype=float).reshape(-1)
    dists = _squared_distances(model.features, query)
    order = np.argsort(dists, kind="stable")
    return _vote(model.labels[order], dists[order], model.k)


def knn_predict_batch(model: KnnModel, queries) -> np.ndarray:
    queries = np.asarray(queries, dtype=float)
    return np.array([knn_predict(model, q) for q in queries], dtype=np.int64)


def knn_sweep(train: Dataset, validation: Dataset, k_range: tuple = (1, 25)):
    """Validation accuracy for every k in the inclusive range.

    Returns (best_k, accuracies) where best_k is the smallest k reaching the
    maximal accuracy. A range upper bound beyond the training size is
    truncated with a warning.
    """
    if len(train) == 0 or len(validation) == 0:
        raise ValueError("train and validation sets must be non-empty")
    k_lo, k_hi = k_range
    if k_lo < 1:
        raise ValueError("k range must start at 1 or above")
    if k_hi > len(train):
        warnings.warn(
            f"k range upper bound {k_hi} exceeds training size {len(train)}; truncating",
            stacklevel=2,
        )
        k_hi = len(train)
    if k_lo > k_hi:
        raise ValueError("empty k range after truncation")

    feats = train.features()
    labels = train.labels
    val_feats = validation.features()
    m = len(validation)

    # one distance ranking per validation sample serves every k
    sorted_labels = np.empty((m, k_hi), dtype=np.int64)
    sorted_dists = np.empty((m, k_hi))
    for i, q in enumerate(val_feats):
        dists = _squared_distances(feats, q)
        order = np.argsort(dists, kind="stable")[:k_hi]
        sorted_labels[i] = labels[order]
        sorted_dists[i] = dists[order]

    accuracies = np.empty(k_hi - k_lo + 1)
    counts = np.zeros((m, N_CLASSES), dtype=np.int64)
    rows = np.arange(m)
    for j in range(k_hi):
        counts[rows, sorted_labels[:, j]] += 1
        k = j + 1
        if k < k_lo:
            continue
        top = counts.max(axis=1)
        n_top = (counts == top[:, None]).sum(axis=1)
        preds = counts.argmax(axis=1)
        for r in np.flatnonzero(n_top > 1):
            preds[r] = _vote(sorted_labels[r], sorted_dists[r], k)
        accuracies[k - k_lo] = np.mean(preds == validation.labels)
    best_k = k_lo + int(np.argmax(accuracies))
    return best_k, accuracies
