import json

import numpy as np
import pytest

from hdclass.classifiers import Dataset
from hdclass.dissimilarity import DissimilaritySpec, Gamma, Phi
from hdclass.harness import (
    Blocking,
    Cell,
    ConfigError,
    EvalReport,
    ExperimentConfig,
    IngestError,
    config_from_dict,
    config_to_dict,
    emit_report,
    read_labeled_csv,
    report_from_json,
    run_experiment,
    stratified_split,
)

G1 = DissimilaritySpec(Gamma.ONE_MINUS_EXP_NEG, Phi.IDENTITY)


class TestStratifiedSplit:
    @staticmethod
    def dataset(n0, n1, d=4, seed=0):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n0 + n1, d))
        return Dataset(X, np.array([0] * n0 + [1] * n1))

    def test_even_split(self):
        train, test = stratified_split(self.dataset(10, 10), 0.5, seed=1)
        assert train.class_counts.tolist() == [5, 5]
        assert test.class_counts.tolist() == [5, 5]

    def test_odd_class_floors_training_side(self):
        train, test = stratified_split(self.dataset(7, 10), 0.5, seed=2)
        assert train.class_counts.tolist() == [3, 5]
        assert test.class_counts.tolist() == [4, 5]

    def test_disjoint_and_exhaustive(self):
        data = self.dataset(9, 12)
        train, test = stratified_split(data, 0.5, seed=3)
        combined = np.vstack([train.features, test.features])
        assert combined.shape[0] == data.n
        key = lambda M: {tuple(row) for row in M}
        assert key(combined) == key(data.features)

    def test_seed_determinism(self):
        data = self.dataset(10, 10)
        a = stratified_split(data, 0.5, seed=4)
        b = stratified_split(data, 0.5, seed=4)
        c = stratified_split(data, 0.5, seed=5)
        assert np.array_equal(a[0].features, b[0].features)
        assert not np.array_equal(a[0].features, c[0].features)

    def test_single_point_class_errors(self):
        X = np.random.default_rng(0).normal(size=(3, 2))
        data = Dataset(X, [0, 1, 1])
        with pytest.raises(ValueError, match="class 0"):
            stratified_split(data, 0.5, seed=0)


class TestConfigValidation:
    def test_needs_exactly_one_source(self):
        with pytest.raises(ConfigError):
            ExperimentConfig()
        with pytest.raises(ConfigError):
            ExperimentConfig(example=1, csv_path="x.csv")

    def test_unknown_classifier(self):
        with pytest.raises(ConfigError, match="unknown classifier"):
            ExperimentConfig(example=1, classifiers=("qda",))

    def test_fixed_block_divisibility(self):
        with pytest.raises(ConfigError, match="does not divide"):
            ExperimentConfig(example=1, dims=(10,), blocking=Blocking("fixed", 3))

    def test_example2_dimension(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(example=2, dims=(15,))

    def test_true_blocking_rejected_for_ar_example(self):
        with pytest.raises(ConfigError, match="auto-regressive"):
            ExperimentConfig(example=3, dims=(20,), blocking=Blocking("true"))

    def test_repetitions_positive(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(example=1, repetitions=0)

    def test_blocking_parse(self):
        assert Blocking.parse("fixed:8") == Blocking("fixed", 8)
        assert str(Blocking.parse("loocv")) == "loocv"
        with pytest.raises(ConfigError):
            Blocking.parse("random")

    def test_corr_method_resolution(self):
        assert ExperimentConfig(example=4).resolved_corr_method().value == "spearman"
        assert ExperimentConfig(example=2).resolved_corr_method().value == "pearson"
        assert (
            ExperimentConfig(example=4, corr_method="pearson").resolved_corr_method().value
            == "pearson"
        )

    def test_round_trip_through_dict(self):
        cfg = ExperimentConfig(
            example=2,
            dims=(50, 100),
            repetitions=3,
            blocking=Blocking("fixed", 10),
            specs=(G1,),
            base_seed=9,
        )
        assert config_from_dict(config_to_dict(cfg)) == cfg

    def test_unknown_config_field(self):
        doc = config_to_dict(ExperimentConfig(example=1))
        doc["typo"] = 1
        with pytest.raises(ConfigError, match="typo"):
            config_from_dict(doc)


def tiny_config(**kw):
    base = dict(
        example=1,
        dims=(20,),
        train_per_class=(8, 8),
        test_per_class=10,
        repetitions=3,
        classifiers=("avg", "savg", "nn", "nn-madd", "gsavg", "ggsavg", "nn-gmadd", "nn-ggmadd"),
        specs=(G1, DissimilaritySpec(Gamma.LOG1P, Phi.IDENTITY)),
        base_seed=5,
    )
    base.update(kw)
    return ExperimentConfig(**base)


class TestRunExperiment:
    def test_report_structure(self):
        report = run_experiment(tiny_config())
        assert all(0 <= r <= 1 for c in report.cells for r in c.rates)
        for c in report.cells:
            assert c.reps == 3
            assert c.mean_rate == pytest.approx(np.mean(c.rates))
        classical = [c for c in report.cells if c.classifier == "avg"]
        assert len(classical) == 1 and classical[0].gamma is None
        gsavg_cells = [c for c in report.cells if c.classifier == "gsavg"]
        assert len(gsavg_cells) == 2  # one per spec
        assert sum(c.best_gamma for c in gsavg_cells) == 1
        best = [c for c in gsavg_cells if c.best_gamma][0]
        assert best.mean_rate == min(c.mean_rate for c in gsavg_cells)

    def test_loocv_cells_record_chosen_p(self):
        report = run_experiment(tiny_config())
        for c in report.cells:
            if c.classifier in ("ggsavg", "nn-ggmadd"):
                assert c.blocking == "loocv"
                assert len(c.chosen_p) == c.reps
            else:
                assert c.chosen_p is None

    def test_parallel_matches_serial(self):
        cfg = tiny_config()
        a = emit_report(run_experiment(cfg, threads=1))
        b = emit_report(run_experiment(cfg, threads=2))
        assert a == b

    def test_seed_changes_results(self):
        a = run_experiment(tiny_config())
        b = run_experiment(tiny_config(base_seed=6))
        assert a != b

    def test_identical_class_csv_source_near_half(self, tmp_path):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(60, 10))
        y = np.repeat([0, 1], 30)  # labels carry no signal
        path = tmp_path / "noise.csv"
        header = ",".join(["label"] + [f"f{i}" for i in range(10)])
        rows = [",".join([str(y[i])] + [repr(float(v)) for v in X[i]]) for i in range(60)]
        path.write_text(header + "\n" + "\n".join(rows) + "\n")
        cfg = ExperimentConfig(
            csv_path=str(path),
            repetitions=10,
            classifiers=("avg", "nn", "gsavg"),
            specs=(G1,),
            base_seed=1,
        )
        report = run_experiment(cfg)
        for c in report.cells:
            assert abs(c.mean_rate - 0.5) < 0.15

    def test_fixed_and_true_blocking(self):
        cfg = tiny_config(
            example=2, classifiers=("ggsavg", "nn-ggmadd"), blocking=Blocking("true")
        )
        report = run_experiment(cfg)
        assert all(c.blocking == "true" for c in report.cells)
        cfg2 = tiny_config(classifiers=("ggsavg",), blocking=Blocking("fixed", 5))
        report2 = run_experiment(cfg2)
        assert report2.cells[0].blocking == "fixed:5"


class TestEmitReport:
    def test_empty_report_valid(self):
        report = EvalReport(config=tiny_config(), cells=())
        doc = json.loads(emit_report(report, "json"))
        assert doc["cells"] == []
        csv_text = emit_report(report, "csv").decode()
        assert csv_text.splitlines()[0].startswith("classifier,")
        assert len(csv_text.splitlines()) == 1

    def test_single_cell_row(self):
        cell = Cell(
            classifier="gsavg", gamma="g1", phi="id", d=20, blocking="singleton",
            reps=2, mean_rate=0.25, sd_rate=0.01, se_rate=0.007,
            rates=(0.24, 0.26), chosen_p=None, best_gamma=True,
        )
        report = EvalReport(config=tiny_config(), cells=(cell,))
        lines = emit_report(report, "csv").decode().splitlines()
        assert lines[1].startswith("gsavg,g1,id,20,singleton,2,0.25,")

    def test_json_round_trip(self):
        report = run_experiment(tiny_config(repetitions=2))
        again = report_from_json(emit_report(report, "json"))
        assert again == report

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            emit_report(EvalReport(config=tiny_config(), cells=()), "yaml")


class TestCsvIngest:
    def write(self, tmp_path, text):
        path = tmp_path / "data.csv"
        path.write_text(text)
        return str(path)

    def test_good_file(self, tmp_path):
        path = self.write(tmp_path, "label,a,b\n0,1.5,2\n1,0.5,1\n0,2,3\n1,1,2\n")
        data = read_labeled_csv(path)
        assert data.n == 4 and data.dim == 2
        assert data.labels.tolist() == [0, 1, 0, 1]

    def test_missing_value_names_position(self, tmp_path):
        path = self.write(tmp_path, "label,a,b\n0,1.5,\n1,0.5,1\n")
        with pytest.raises(IngestError, match="row 2, column 'b'"):
            read_labeled_csv(path)

    def test_non_numeric_feature(self, tmp_path):
        path = self.write(tmp_path, "label,a\n0,x\n1,2\n")
        with pytest.raises(IngestError, match="not numeric"):
            read_labeled_csv(path)

    def test_missing_label_column(self, tmp_path):
        path = self.write(tmp_path, "a,b\n1,2\n")
        with pytest.raises(IngestError, match="label"):
            read_labeled_csv(path)

    def test_non_integer_label(self, tmp_path):
        path = self.write(tmp_path, "label,a\n0.5,1\n1,2\n")
        with pytest.raises(IngestError, match="label"):
            read_labeled_csv(path)

    def test_empty_file(self, tmp_path):
        with pytest.raises(IngestError, match="empty"):
            read_labeled_csv(self.write(tmp_path, ""))
