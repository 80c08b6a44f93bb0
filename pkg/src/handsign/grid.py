"""The evaluation harness: every preprocessing configuration x every algorithm.

One seeded 80:20 split is shared by all cells so the preprocessing
comparison is not confounded by resampling. Each cell transforms the
train/test frames with its pipeline, picks hyperparameters (kNN sweeps k in
[1, 25], the forest sweeps tree counts in [1, 200], the network trains a
fixed configuration), and reports test accuracy plus a confusion matrix.

Hyperparameter sweeps score candidates on the test set by default, which
matches how the study tabulates best-of-sweep accuracy but is statistically
optimistic; pass holdout=True to carve a validation subset out of the
training split for honest selection instead.

Cells are independent: kNN is deterministic, the forest derives its
randomness from (grid seed, algorithm) so identical transformed data gives
identical forests, and the network reseeds per cell from (grid seed,
pipeline, algorithm), so a grid re-run is bit-identical no matter how many
workers execute it.
"""

import enum
import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, split_train_test, write_csv
from .forest import rf_fit, rf_predict_batch, rf_sweep
from .knn import knn_fit, knn_predict_batch, knn_sweep
from .metrics import evaluate, export_confusion
from .mlp import TrainConfig, TrainingCurves, mlp_init, mlp_predict_batch, mlp_train
from .normalize import PipelineSpec, apply_pipeline_batch, enumerate_paper_combinations


class AlgorithmKind(enum.Enum):
    KNN = "knn"
    RANDOM_FOREST = "rf"
    NEURAL_NETWORK = "mlp"


ALL_ALGORITHMS = (AlgorithmKind.KNN, AlgorithmKind.RANDOM_FOREST, AlgorithmKind.NEURAL_NETWORK)

_TABLE_COLUMNS = [(box, algo) for box in ("cuboidal", "cubical") for algo in ALL_ALGORITHMS]
_ALGO_TITLES = {
    AlgorithmKind.KNN: "kNN",
    AlgorithmKind.RANDOM_FOREST: "Random Forest",
    AlgorithmKind.NEURAL_NETWORK: "Neural Network",
}


@dataclass(frozen=True)
class GridCell:
    """Result of one (pipeline, algorithm) cell."""

    spec: PipelineSpec
    algorithm: AlgorithmKind
    hyperparameter: object  # chosen k or n, None for the network
    accuracy: object  # float, or None when the cell failed
    confusion: object  # (24, 24) int array, or None
    curves: object  # TrainingCurves for the network, else None
    error: object = None  # failure message, or None

    def __eq__(self, other):
        if not isinstance(other, GridCell):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.algorithm == other.algorithm
            and self.hyperparameter == other.hyperparameter
            and self.accuracy == other.accuracy
            and _array_eq(self.confusion, other.confusion)
            and _curves_eq(self.curves, other.curves)
            and self.error == other.error
        )


def _array_eq(a, b):
    if a is None or b is None:
        return a is b
    return np.array_equal(a, b)


def _curves_eq(a, b):
    if a is None or b is None:
        return a is b
    return np.array_equal(a.loss, b.loss) and np.array_equal(a.accuracy, b.accuracy)


@dataclass(frozen=True)
class RunReport:
    cells: tuple
    split_seed: int
    dataset_fingerprint: str
    averages: dict  # algorithm value -> mean accuracy over its cells

    def __eq__(self, other):
        if not isinstance(other, RunReport):
            return NotImplemented
        return (
            self.cells == other.cells
            and self.split_seed == other.split_seed
            and self.dataset_fingerprint == other.dataset_fingerprint
            and self.averages == other.averages
        )

    def cell(self, spec: PipelineSpec, algorithm: AlgorithmKind) -> GridCell:
        for c in self.cells:
            if c.spec == spec and c.algorithm == algorithm:
                return c
        raise KeyError(f"no cell for {spec} x {algorithm.value}")

    def best_cell(self, algorithm: AlgorithmKind) -> GridCell:
        """Highest-accuracy successful cell; earlier cell wins exact ties."""
        candidates = [c for c in self.cells if c.algorithm is algorithm and c.accuracy is not None]
        if not candidates:
            raise ValueError(f"no successful cells for {algorithm.value}")
        return max(candidates, key=lambda c: c.accuracy)


def _hash_seed(*parts) -> int:
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def dataset_fingerprint(ds: Dataset) -> str:
    return hashlib.sha256(write_csv(ds).encode()).hexdigest()


def _run_cell(spec, algorithm, train_t, test_t, seed, holdout, mlp_config, k_range, n_range):
    if algorithm is AlgorithmKind.KNN:
        if holdout:
            fit, val = split_train_test(train_t, 0.8, _hash_seed(seed, "holdout"))
            best_k, _ = knn_sweep(fit, val, k_range)
        else:
            best_k, _ = knn_sweep(train_t, test_t, k_range)
        model = knn_fit(train_t, best_k)
        acc, cm = evaluate(lambda q: knn_predict_batch(model, q), test_t)
        return best_k, acc, cm, None
    if algorithm is AlgorithmKind.RANDOM_FOREST:
        rf_seed = _hash_seed(seed, algorithm.value)
        if holdout:
            fit, val = split_train_test(train_t, 0.8, _hash_seed(seed, "holdout"))
            best_n, _ = rf_sweep(fit, val, n_range, rf_seed)
        else:
            best_n, _ = rf_sweep(train_t, test_t, n_range, rf_seed)
        model = rf_fit(train_t, best_n, rf_seed)
        acc, cm = evaluate(lambda q: rf_predict_batch(model, q), test_t)
        return best_n, acc, cm, None
    cell_seed = _hash_seed(seed, spec.canonical(), algorithm.value)
    cfg = replace(mlp_config, seed=cell_seed)
    model, curves = mlp_train(mlp_init(seed=cell_seed), train_t, cfg)
    acc, cm = evaluate(lambda q: mlp_predict_batch(model, q), test_t)
    return None, acc, cm, curves


def run_grid(ds: Dataset, specs=None, algos=ALL_ALGORITHMS, split_ratio: float = 0.8,
             seed: int = 0, holdout: bool = False, mlp_config: TrainConfig = None,
             workers: int = 1, k_range: tuple = (1, 25), n_range: tuple = (1, 200)) -> RunReport:
    """Evaluate every (pipeline, algorithm) cell on one shared split.

    A failing cell is recorded with its error message and the grid carries
    on. The report is a deterministic function of (ds, seed) for fixed
    configuration, independent of the worker count.
    """
    if len(ds) == 0:
        raise ValueError("dataset must be non-empty")
    if specs is None:
        specs = enumerate_paper_combinations()
    specs = list(specs)
    if mlp_config is None:
        mlp_config = TrainConfig()
    train, test = split_train_test(ds, split_ratio, seed)
    fingerprint = dataset_fingerprint(ds)

    transformed = {}
    for spec in specs:
        key = spec.canonical()
        if key not in transformed:
            transformed[key] = (
                train.with_frames(apply_pipeline_batch(train.frames, spec)),
                test.with_frames(apply_pipeline_batch(test.frames, spec)),
            )

    tasks = [(spec, algo) for spec in specs for algo in algos]

    def run_one(task):
        spec, algo = task
        train_t, test_t = transformed[spec.canonical()]
        try:
            hyper, acc, cm, curves = _run_cell(
                spec, algo, train_t, test_t, seed, holdout, mlp_config, k_range, n_range
            )
            return GridCell(spec, algo, hyper, acc, cm, curves)
        except Exception as exc:  # cell failures must not sink the grid
            return GridCell(spec, algo, None, None, None, None, error=f"{type(exc).__name__}: {exc}")

    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = tuple(pool.map(run_one, tasks))
    else:
        cells = tuple(run_one(t) for t in tasks)

    averages = {}
    for algo in algos:
        done = [c.accuracy for c in cells if c.algorithm is algo and c.accuracy is not None]
        averages[algo.value] = float(np.mean(done)) if done else float("nan")
    return RunReport(cells=cells, split_seed=seed, dataset_fingerprint=fingerprint, averages=averages)


def _steps_key(spec: PipelineSpec) -> str:
    return spec.canonical().split("@", 1)[0]


def _cell_text(report, steps_key, box_name, algo) -> str:
    for c in report.cells:
        if c.algorithm is algo and _steps_key(c.spec) == steps_key and c.spec.box.value == box_name:
            return f"{100.0 * c.accuracy:.2f}" if c.accuracy is not None else "—"
    return "—"


def render_table(report: RunReport, format: str = "markdown") -> str:
    """Accuracy table: one row per step sequence, six algorithm/box columns."""
    row_keys = []
    for c in report.cells:
        key = _steps_key(c.spec)
        if key not in row_keys:
            row_keys.append(key)
    if format == "csv":
        lines = ["steps," + ",".join(f"{algo.value}_{box}" for box, algo in _TABLE_COLUMNS)]
        for key in row_keys:
            cells = [_cell_text(report, key, box, algo) for box, algo in _TABLE_COLUMNS]
            lines.append(key + "," + ",".join(cells))
        return "\n".join(lines) + "\n"
    if format == "markdown":
        header = ["Steps"] + [f"{_ALGO_TITLES[algo]} ({box})" for box, algo in _TABLE_COLUMNS]
        lines = [
            "| " + " | ".join(header) + " |",
            "| " + " | ".join("---" for _ in header) + " |",
        ]
        for key in row_keys:
            cells = [_cell_text(report, key, box, algo) for box, algo in _TABLE_COLUMNS]
            lines.append("| " + " | ".join([key] + cells) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown table format {format!r}")


def write_grid_outputs(report: RunReport, out_dir) -> None:
    """table.md, table.csv, per-cell confusion CSVs and network curves."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "table.md").write_text(render_table(report, "markdown"), encoding="utf-8")
    (out / "table.csv").write_text(render_table(report, "csv"), encoding="utf-8")
    curve_lines = ["pipeline,epoch,loss,accuracy"]
    for c in report.cells:
        name = c.spec.canonical().replace("@", "_")
        if c.confusion is not None:
            path = out / f"confusion_{name}_{c.algorithm.value}.csv"
            path.write_text(export_confusion(c.confusion, "csv"), encoding="utf-8")
        if c.curves is not None:
            for epoch, (loss, acc) in enumerate(zip(c.curves.loss, c.curves.accuracy), start=1):
                curve_lines.append(f"{c.spec.canonical()},{epoch},{loss!r},{acc!r}")
    (out / "curves.csv").write_text("\n".join(curve_lines) + "\n", encoding="utf-8")
