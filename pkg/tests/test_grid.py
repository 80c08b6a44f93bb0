import numpy as np
import pytest

from handsign import (
    ALL_ALGORITHMS,
    AlgorithmKind,
    BoxKind,
    PipelineSpec,
    Step,
    TrainConfig,
    enumerate_paper_combinations,
    evaluate,
    generate_synthetic,
    knn_fit,
    knn_predict_batch,
    knn_sweep,
    render_table,
    run_grid,
    split_train_test,
    write_grid_outputs,
)

FAST_MLP = TrainConfig(epochs=1)


def small_dataset(per_class=3, seed=0):
    return generate_synthetic(per_class=per_class, jitter=0.02, placement=True, seed=seed)


def small_grid(ds, specs, **kwargs):
    kwargs.setdefault("mlp_config", FAST_MLP)
    kwargs.setdefault("k_range", (1, 3))
    kwargs.setdefault("n_range", (1, 3))
    return run_grid(ds, specs, **kwargs)


class TestRunGrid:
    def test_empty_spec_list(self):
        report = small_grid(small_dataset(), specs=[])
        assert report.cells == ()

    def test_knn_cell_matches_standalone_composition(self):
        ds = small_dataset(per_class=4)
        spec = PipelineSpec((), BoxKind.CUBOIDAL)
        report = small_grid(ds, [spec], algos=(AlgorithmKind.KNN,), seed=5)
        cell = report.cell(spec, AlgorithmKind.KNN)

        train, test = split_train_test(ds, 0.8, seed=5)
        best_k, _ = knn_sweep(train, test, (1, 3))
        model = knn_fit(train, best_k)
        acc, cm = evaluate(lambda q: knn_predict_batch(model, q), test)
        assert cell.hyperparameter == best_k
        assert cell.accuracy == acc
        assert np.array_equal(cell.confusion, cm)

    def test_paper_grid_shape(self):
        ds = small_dataset()
        report = small_grid(ds, specs=None)
        assert len(report.cells) == 84
        specs = [c.spec for c in report.cells if c.algorithm is AlgorithmKind.KNN]
        assert specs == enumerate_paper_combinations()
        for c in report.cells:
            assert c.error is None
            assert c.accuracy == np.trace(c.confusion) / c.confusion.sum()
            if c.algorithm is AlgorithmKind.NEURAL_NETWORK:
                assert c.curves is not None and c.curves.loss.size == 1
            else:
                assert c.hyperparameter in (1, 2, 3)

    def test_no_preprocessing_cells_identical_for_knn_and_rf(self):
        ds = small_dataset(per_class=4)
        specs = [PipelineSpec((), BoxKind.CUBOIDAL), PipelineSpec((), BoxKind.CUBICAL)]
        report = small_grid(ds, specs)
        for algo in (AlgorithmKind.KNN, AlgorithmKind.RANDOM_FOREST):
            a = report.cell(specs[0], algo)
            b = report.cell(specs[1], algo)
            assert a.accuracy == b.accuracy
            assert np.array_equal(a.confusion, b.confusion)

    def test_deterministic_and_worker_independent(self):
        ds = small_dataset(per_class=2)
        specs = enumerate_paper_combinations()[:6]
        r1 = small_grid(ds, specs, seed=3, workers=1)
        r2 = small_grid(ds, specs, seed=3, workers=4)
        assert r1 == r2

    def test_averages_are_cell_means(self):
        ds = small_dataset(per_class=2)
        specs = enumerate_paper_combinations()[:4]
        report = small_grid(ds, specs, seed=1)
        for algo in ALL_ALGORITHMS:
            cells = [c.accuracy for c in report.cells if c.algorithm is algo]
            assert report.averages[algo.value] == pytest.approx(np.mean(cells), abs=1e-12)

    def test_failed_cell_recorded_and_grid_continues(self):
        ds = generate_synthetic(per_class=1, jitter=0, placement=False, seed=0).subset([0, 1])
        report = run_grid(ds, [PipelineSpec((), BoxKind.CUBOIDAL)], split_ratio=0.5,
                          mlp_config=FAST_MLP, k_range=(5, 5), n_range=(1, 2))
        knn_cell = report.cell(PipelineSpec((), BoxKind.CUBOIDAL), AlgorithmKind.KNN)
        assert knn_cell.error is not None
        assert knn_cell.accuracy is None
        others = [c for c in report.cells if c.algorithm is not AlgorithmKind.KNN]
        assert all(c.error is None for c in others)

    def test_best_cell_selection(self):
        ds = small_dataset(per_class=3)
        specs = enumerate_paper_combinations()[:4]
        report = small_grid(ds, specs, seed=2)
        for algo in ALL_ALGORITHMS:
            best = report.best_cell(algo)
            accs = [c.accuracy for c in report.cells if c.algorithm is algo]
            assert best.accuracy == max(accs)

    def test_holdout_mode_runs(self):
        ds = small_dataset(per_class=4)
        spec = PipelineSpec((Step.SHIFT,), BoxKind.CUBOIDAL)
        report = small_grid(ds, [spec], holdout=True, seed=7)
        for c in report.cells:
            assert c.error is None


@pytest.fixture(scope="module")
def paper_report():
    return small_grid(small_dataset(per_class=2), specs=None, seed=11)


class TestRenderTable:

    def test_markdown_has_14_data_rows(self, paper_report):
        lines = render_table(paper_report, "markdown").strip().splitlines()
        assert len(lines) == 2 + 14
        assert lines[0].count("|") == 8  # steps column + six cells

    def test_csv_reparses_to_same_numbers(self, paper_report):
        text = render_table(paper_report, "csv")
        lines = text.strip().splitlines()
        header = lines[0].split(",")
        assert len(lines) == 15
        for line in lines[1:]:
            fields = line.split(",")
            steps = fields[0]
            for col_name, value in zip(header[1:], fields[1:]):
                algo = AlgorithmKind(col_name.split("_")[0])
                box = col_name.split("_")[1]
                spec = PipelineSpec.parse(f"{steps}@{box}")
                cell = paper_report.cell(spec, algo)
                assert value == f"{100 * cell.accuracy:.2f}"

    def test_accuracy_formatting(self):
        assert f"{100 * 0.9566:.2f}" == "95.66"

    def test_failed_cells_render_as_dash(self):
        ds = generate_synthetic(per_class=1, jitter=0, placement=False, seed=0).subset([0, 1])
        report = run_grid(ds, [PipelineSpec((), BoxKind.CUBOIDAL)], split_ratio=0.5,
                          mlp_config=FAST_MLP, k_range=(5, 5), n_range=(1, 2))
        text = render_table(report, "csv")
        assert "—" in text.splitlines()[1]

    def test_outputs_written(self, paper_report, tmp_path):
        write_grid_outputs(paper_report, tmp_path / "out")
        names = {p.name for p in (tmp_path / "out").iterdir()}
        assert {"table.md", "table.csv", "curves.csv"} <= names
        confusions = [n for n in names if n.startswith("confusion_")]
        assert len(confusions) == 84
        curves = (tmp_path / "out" / "curves.csv").read_text().splitlines()
        assert curves[0] == "pipeline,epoch,loss,accuracy"
        assert len(curves) == 1 + 28  # one epoch per network cell
