"""Benchmark harness: repeated train/test experiments and reports.

Each repetition generates (or resplits) data with its own derived substream,
fits every configured classifier cell, and records the test error fraction.
Repetitions are independent work units; running them across processes gives
byte-identical reports for any worker count because every cell's random
state is derived from (base seed, dimension, repetition) alone.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .classifiers import Dataset
from .clustering import (
    CorrelationMethod,
    DEFAULT_P_GRID,
    average_linkage,
    correlation_dissimilarity,
    partition_at_percentile,
)
from .dissimilarity import (
    BlockPartition,
    DissimilaritySpec,
    Gamma,
    Phi,
    phi_eval,
    _GAMMA_FUNCS,
)
from .populations import Example, ExampleSpec, default_train_sizes, generate, true_partition

__all__ = [
    "ConfigError",
    "IngestError",
    "Blocking",
    "ExperimentConfig",
    "Cell",
    "EvalReport",
    "stratified_split",
    "run_experiment",
    "emit_report",
    "report_from_json",
    "config_to_dict",
    "config_from_dict",
    "read_labeled_csv",
]


class ConfigError(ValueError):
    """Contradictory or invalid experiment configuration."""


class IngestError(ValueError):
    """Malformed input data file."""


CLASSIC_CLASSIFIERS = ("avg", "savg", "nn", "nn-madd")
COMPONENTWISE_CLASSIFIERS = ("gsavg", "nn-gmadd")
BLOCKED_CLASSIFIERS = ("ggsavg", "nn-ggmadd")
ALL_CLASSIFIERS = CLASSIC_CLASSIFIERS + COMPONENTWISE_CLASSIFIERS + BLOCKED_CLASSIFIERS


@dataclass(frozen=True)
class Blocking:
    """Strategy for choosing the variable grouping of blocked classifiers."""

    kind: str  # singleton | true | loocv | fixed
    size: int | None = None

    def __post_init__(self):
        if self.kind not in ("singleton", "true", "loocv", "fixed"):
            raise ConfigError(f"unknown blocking strategy {self.kind!r}")
        if (self.kind == "fixed") != (self.size is not None):
            raise ConfigError("fixed blocking takes a size, other strategies do not")
        if self.size is not None and self.size < 1:
            raise ConfigError("fixed block size must be positive")

    @classmethod
    def parse(cls, text: str) -> "Blocking":
        if text.startswith("fixed:"):
            return cls("fixed", int(text.split(":", 1)[1]))
        return cls(text)

    def __str__(self) -> str:
        return f"fixed:{self.size}" if self.kind == "fixed" else self.kind


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one benchmark run."""

    example: Example | None = None
    csv_path: str | None = None
    dims: tuple = (1000,)
    train_per_class: tuple | None = None
    test_per_class: int = 250
    repetitions: int = 100
    classifiers: tuple = ("gsavg", "ggsavg", "nn-gmadd", "nn-ggmadd")
    specs: tuple = (
        DissimilaritySpec(Gamma.ONE_MINUS_EXP_NEG, Phi.IDENTITY),
        DissimilaritySpec(Gamma.HALF_SQRT, Phi.IDENTITY),
        DissimilaritySpec(Gamma.LOG1P, Phi.IDENTITY),
    )
    blocking: Blocking = field(default_factory=lambda: Blocking("loocv"))
    p_grid: tuple = DEFAULT_P_GRID
    corr_method: str = "auto"  # auto | pearson | spearman
    split_fraction: float = 0.5
    base_seed: int = 0

    def __post_init__(self):
        if (self.example is None) == (self.csv_path is None):
            raise ConfigError("configure exactly one of example or csv_path")
        if self.example is not None:
            object.__setattr__(self, "example", Example(self.example))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "specs", tuple(self.specs))
        object.__setattr__(self, "classifiers", tuple(self.classifiers))
        if self.train_per_class is not None:
            object.__setattr__(self, "train_per_class", tuple(int(c) for c in self.train_per_class))
            if any(c < 2 for c in self.train_per_class):
                raise ConfigError("per-class training counts must be at least 2")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        if self.test_per_class < 1:
            raise ConfigError("test_per_class must be positive")
        if not 0 < self.split_fraction < 1:
            raise ConfigError("split fraction must lie strictly between 0 and 1")
        for name in self.classifiers:
            if name not in ALL_CLASSIFIERS:
                raise ConfigError(f"unknown classifier {name!r}")
        if not self.classifiers:
            raise ConfigError("no classifiers configured")
        needs_specs = any(
            c in COMPONENTWISE_CLASSIFIERS + BLOCKED_CLASSIFIERS for c in self.classifiers
        )
        if needs_specs and not self.specs:
            raise ConfigError("generalized classifiers need at least one (gamma, phi) spec")
        if self.corr_method not in ("auto", "pearson", "spearman"):
            raise ConfigError(f"unknown correlation method {self.corr_method!r}")
        if self.blocking.kind == "fixed":
            for d in self.dims:
                if d % self.blocking.size != 0:
                    raise ConfigError(
                        f"fixed block size {self.blocking.size} does not divide dimension {d}"
                    )
        if self.example is not None:
            for d in self.dims:
                try:
                    ExampleSpec(self.example, d)
                except ValueError as exc:
                    raise ConfigError(str(exc)) from None
        if self.blocking.kind == "true" and any(
            c in BLOCKED_CLASSIFIERS for c in self.classifiers
        ):
            if self.example is None:
                raise ConfigError("true blocking needs a simulated example source")
            try:
                for d in self.dims:
                    true_partition(ExampleSpec(self.example, d))
            except ValueError as exc:
                raise ConfigError(str(exc)) from None

    def resolved_corr_method(self) -> CorrelationMethod:
        if self.corr_method != "auto":
            return CorrelationMethod(self.corr_method)
        if self.example is Example.EX4:
            return CorrelationMethod.SPEARMAN  # heavy tails; rank correlation
        return CorrelationMethod.PEARSON


@dataclass(frozen=True)
class Cell:
    """Aggregated result of one (classifier, spec, dimension) combination."""

    classifier: str
    gamma: str | None
    phi: str | None
    d: int
    blocking: str
    reps: int
    mean_rate: float
    sd_rate: float
    se_rate: float
    rates: tuple
    chosen_p: tuple | None
    best_gamma: bool


@dataclass(frozen=True)
class EvalReport:
    config: ExperimentConfig
    cells: tuple


def _seed_int(*key: int) -> int:
    return int(np.random.SeedSequence(entropy=list(key)).generate_state(1, np.uint64)[0] >> 1)


def stratified_split(data: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Per-class random split; the training side takes floor(fraction * n_j)."""
    if not 0 < fraction < 1:
        raise ValueError("split fraction must lie strictly between 0 and 1")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed)))
    train_idx, test_idx = [], []
    for j in range(data.n_classes):
        members = np.flatnonzero(data.labels == j)
        if members.size < 2:
            raise ValueError(f"class {j} has {members.size} point(s); cannot split")
        k = int(np.floor(fraction * members.size))
        if k < 1 or k >= members.size:
            raise ValueError(f"fraction {fraction} leaves class {j} empty on one side")
        perm = rng.permutation(members)
        train_idx.append(perm[:k])
        test_idx.append(perm[k:])
    tr = np.concatenate(train_idx)
    te = np.concatenate(test_idx)
    return (
        Dataset(data.features[tr], data.labels[tr]),
        Dataset(data.features[te], data.labels[te]),
    )


# ---------------------------------------------------------------------------
# per-repetition evaluation


def _cell_key(classifier: str, spec: DissimilaritySpec | None):
    if spec is None:
        return (classifier, None, None)
    return (classifier, spec.gamma.value, spec.phi.value)


def _blocked_partition(config: ExperimentConfig, d: int):
    """Partition for non-LOOCV blocking strategies (None means LOOCV)."""
    b = config.blocking
    if b.kind == "singleton":
        return BlockPartition.singletons(d)
    if b.kind == "fixed":
        return BlockPartition.contiguous(d, b.size)
    if b.kind == "true":
        if config.example is None:
            raise ConfigError("true blocking needs a simulated example source")
        return true_partition(ExampleSpec(config.example, d))
    return None


def _mirror(vals: np.ndarray, iu, ju, n: int) -> np.ndarray:
    H = np.zeros((n, n))
    H[iu, ju] = vals
    H[ju, iu] = vals
    return H


_LOOCV_ERROR = {
    "ggsavg": _kernels.loocv_avg_family,
    "nn-ggmadd": _kernels.loocv_nn_madd,
}

_TEST_CHUNK = 100


def _leaf_order(dendro) -> np.ndarray:
    """Depth-first leaf ordering; every dendrogram cut is contiguous in it."""
    d = dendro.leaf_count
    children = {d + k: (l, r) for k, (l, r, _) in enumerate(dendro.merges)}
    consumed = {node for l, r, _ in dendro.merges for node in (l, r)}
    order = []
    for root in range(2 * d - 1):
        if root in consumed:
            continue
        stack = [root]
        while stack:
            node = stack.pop()
            if node < d:
                order.append(node)
            else:
                left, right = children[node]
                stack.extend((right, left))
    return np.array(order, dtype=np.intp)


def _segments_in(order: np.ndarray, partition: BlockPartition):
    """(starts, sizes) of the partition's blocks as runs of ``order``.

    Only valid when every block is contiguous in the given ordering, which
    holds for any cut of the dendrogram that produced it.
    """
    pos = np.empty(order.size, dtype=np.intp)
    pos[order] = np.arange(order.size)
    runs = []
    for block in partition.blocks:
        ranks = pos[np.asarray(block, dtype=np.intp)]
        lo, hi = int(ranks.min()), int(ranks.max())
        if hi - lo + 1 != len(block):
            raise ValueError("partition blocks are not contiguous in the leaf order")
        runs.append((lo, len(block)))
    runs.sort()
    starts = np.array([lo for lo, _ in runs], dtype=np.intp)
    sizes = np.array([size for _, size in runs])
    return starts, sizes


def _evaluate_rep(config: ExperimentConfig, train: Dataset, test: Dataset, d: int):
    """Error rate (and chosen cut, for LOOCV blocking) for every cell."""
    X, y = train.features, train.labels
    Z, zy = test.features, test.labels
    n, J = train.n, train.n_classes
    results: dict = {}

    def record(classifier, spec, preds, chosen_p=None):
        rate = float(np.mean(preds != zy))
        results[_cell_key(classifier, spec)] = (rate, chosen_p)

    wanted = set(config.classifiers)

    if wanted & set(CLASSIC_CLASSIFIERS):
        sqd_train = _kernels.scaled_sqdist(X, X)
        np.fill_diagonal(sqd_train, 0.0)
        sqd_test = _kernels.scaled_sqdist(Z, X)
        if "avg" in wanted:
            scores = _kernels.avg_family_scores(sqd_test, None, y, J, adjust=False)
            record("avg", None, _kernels.argmin_classes(scores))
        if "savg" in wanted:
            scores = _kernels.avg_family_scores(sqd_test, sqd_train, y, J, adjust=True)
            record("savg", None, _kernels.argmin_classes(scores))
        if "nn" in wanted:
            record("nn", None, _kernels.nn_family_predict(np.sqrt(sqd_test), y, J))
        if "nn-madd" in wanted:
            psi = _kernels.madd_from_rows(np.sqrt(sqd_test), np.sqrt(sqd_train))
            record("nn-madd", None, _kernels.nn_family_predict(psi, y, J))

    need_cw = wanted & set(COMPONENTWISE_CLASSIFIERS)
    need_blocked = wanted & set(BLOCKED_CLASSIFIERS)
    if not (need_cw or need_blocked):
        return results

    iu, ju = np.triu_indices(n, k=1)
    sq_train = np.square(X[iu] - X[ju])

    # componentwise train matrices, one per spec; singleton-partition blocked
    # cells reuse them exactly
    H_train_cw = {}
    if need_cw or need_blocked:
        for spec in config.specs:
            vals = phi_eval(spec.phi, _GAMMA_FUNCS[spec.gamma](sq_train).mean(axis=1))
            H_train_cw[spec] = _mirror(vals, iu, ju, n)

    # blocked partitions are handled as contiguous segments of one shared
    # column order (the dendrogram leaf order, for estimated cuts), so the
    # expensive column reordering happens once per repetition
    chosen_ps: dict = {}
    cell_key_of: dict = {}
    reducers: dict = {}
    shared_order = None
    sq_ordered = None
    bm_train_cache: dict = {}
    H_train_seg: dict = {}

    def train_H(key, spec):
        if key == "cw":
            return H_train_cw[spec]
        if (key, spec) not in H_train_seg:
            if key not in bm_train_cache:
                starts, sizes = reducers[key]
                bm_train_cache[key] = np.add.reduceat(sq_ordered, starts, axis=1) / sizes
            vals = phi_eval(
                spec.phi, _GAMMA_FUNCS[spec.gamma](bm_train_cache[key]).mean(axis=1)
            )
            H_train_seg[(key, spec)] = _mirror(vals, iu, ju, n)
        return H_train_seg[(key, spec)]

    if need_blocked:
        fixed_part = _blocked_partition(config, d)
        if fixed_part is not None:
            if fixed_part.is_singleton:
                key = "cw"
            else:
                shared_order = fixed_part.column_order
                starts, sizes = fixed_part.segment_starts, fixed_part.block_sizes
                key = ("seg", tuple(int(s) for s in starts))
                reducers[key] = (starts, sizes)
                sq_ordered = sq_train[:, shared_order]
            for clf in need_blocked:
                for spec in config.specs:
                    cell_key_of[(clf, spec)] = key
        else:
            dendro = average_linkage(
                correlation_dissimilarity(X, config.resolved_corr_method())
            )
            shared_order = _leaf_order(dendro)
            grid = tuple(sorted(float(p) for p in config.p_grid))
            p_keys = []
            for p in grid:
                part = partition_at_percentile(dendro, p)
                if part.is_singleton:
                    p_keys.append("cw")
                    continue
                starts, sizes = _segments_in(shared_order, part)
                key = ("seg", tuple(int(s) for s in starts))
                reducers.setdefault(key, (starts, sizes))
                p_keys.append(key)
            if any(k != "cw" for k in p_keys):
                sq_ordered = sq_train[:, shared_order]
            fold_err: dict = {}
            for clf in need_blocked:
                for spec in config.specs:
                    errs = np.empty(len(grid))
                    for pi, key in enumerate(p_keys):
                        if (clf, spec, key) not in fold_err:
                            fold_err[(clf, spec, key)] = _LOOCV_ERROR[clf](
                                train_H(key, spec), y, J
                            )
                        errs[pi] = fold_err[(clf, spec, key)]
                    best = int(np.argmin(errs))
                    cell_key_of[(clf, spec)] = p_keys[best]
                    chosen_ps[(clf, spec)] = grid[best]

    # test-side matrices, chunked over test rows
    m = Z.shape[0]
    cw_specs = set(config.specs) if need_cw else set()
    cw_specs |= {spec for (clf, spec), key in cell_key_of.items() if key == "cw"}
    seg_targets = sorted(
        {(key, spec) for (clf, spec), key in cell_key_of.items() if key != "cw"},
        key=lambda ks: (ks[0], ks[1].gamma.value, ks[1].phi.value),
    )
    H_test_cw = {spec: np.empty((m, n)) for spec in cw_specs}
    H_test_seg = {ks: np.empty((m, n)) for ks in seg_targets}
    seg_keys = sorted({key for key, _ in seg_targets})
    for lo in range(0, m, _TEST_CHUNK):
        hi = min(lo + _TEST_CHUNK, m)
        flat = np.square(Z[lo:hi, None, :] - X[None, :, :]).reshape(-1, d)
        rows = hi - lo
        for spec in cw_specs:
            H_test_cw[spec][lo:hi] = (
                phi_eval(spec.phi, _GAMMA_FUNCS[spec.gamma](flat).mean(axis=1)).reshape(rows, n)
            )
        if seg_keys:
            flat_ordered = flat[:, shared_order]
            for key in seg_keys:
                starts, sizes = reducers[key]
                bm = np.add.reduceat(flat_ordered, starts, axis=1) / sizes
                for k2, spec in seg_targets:
                    if k2 != key:
                        continue
                    vals = phi_eval(spec.phi, _GAMMA_FUNCS[spec.gamma](bm).mean(axis=1))
                    H_test_seg[(key, spec)][lo:hi] = vals.reshape(rows, n)

    for spec in config.specs:
        if "gsavg" in need_cw:
            scores = _kernels.avg_family_scores(H_test_cw[spec], H_train_cw[spec], y, J, True)
            record("gsavg", spec, _kernels.argmin_classes(scores))
        if "nn-gmadd" in need_cw:
            psi = _kernels.madd_from_rows(H_test_cw[spec], H_train_cw[spec])
            record("nn-gmadd", spec, _kernels.nn_family_predict(psi, y, J))
        for clf in need_blocked:
            key = cell_key_of[(clf, spec)]
            H_te = H_test_cw[spec] if key == "cw" else H_test_seg[(key, spec)]
            H_tr = train_H(key, spec)
            if clf == "ggsavg":
                scores = _kernels.avg_family_scores(H_te, H_tr, y, J, True)
                preds = _kernels.argmin_classes(scores)
            else:
                preds = _kernels.nn_family_predict(_kernels.madd_from_rows(H_te, H_tr), y, J)
            record(clf, spec, preds, chosen_ps.get((clf, spec)))
    return results


@lru_cache(maxsize=4)
def _cached_csv(path: str) -> Dataset:
    return read_labeled_csv(path)


def _run_rep(config: ExperimentConfig, d: int, rep: int):
    if config.example is not None:
        espec = ExampleSpec(config.example, d)
        sizes = config.train_per_class or default_train_sizes(config.example)
        seed_train = _seed_int(config.base_seed, d, rep, 0)
        seed_test = _seed_int(config.base_seed, d, rep, 1)
        Xtr = np.vstack([generate(espec, j, sizes[j], seed_train) for j in range(2)])
        ytr = np.repeat(np.arange(2), sizes)
        Xte = np.vstack([generate(espec, j, config.test_per_class, seed_test) for j in range(2)])
        yte = np.repeat(np.arange(2), config.test_per_class)
        train = Dataset(Xtr, ytr)
        test = Dataset(Xte, yte)
    else:
        data = _cached_csv(config.csv_path)
        train, test = stratified_split(
            data, config.split_fraction, _seed_int(config.base_seed, d, rep, 2)
        )
    return _evaluate_rep(config, train, test, train.dim)


def run_experiment(config: ExperimentConfig, threads: int = 1) -> EvalReport:
    """Run every repetition of every dimension and aggregate the cells.

    The report is identical for any ``threads`` value; workers only farm out
    whole repetitions.
    """
    dims = config.dims if config.example is not None else (_cached_csv(config.csv_path).dim,)
    jobs = [(d, rep) for d in dims for rep in range(config.repetitions)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outputs = list(pool.map(_run_rep_star, [(config, d, rep) for d, rep in jobs]))
    else:
        outputs = [_run_rep(config, d, rep) for d, rep in jobs]

    per_dim: dict = {d: [] for d in dims}
    for (d, _), out in zip(jobs, outputs):
        per_dim[d].append(out)

    cells = []
    for d in dims:
        reps = per_dim[d]
        keys = list(reps[0].keys())
        stats = {}
        for key in keys:
            rates = np.array([r[key][0] for r in reps])
            ps = [r[key][1] for r in reps]
            stats[key] = (rates, None if ps[0] is None else tuple(ps))
        best: dict = {}
        for key in keys:
            clf, gamma, phi = key
            if gamma is None:
                continue
            mean = float(stats[key][0].mean())
            if clf not in best or mean < best[clf][0]:
                best[clf] = (mean, key)
        for clf in _canonical_order(config.classifiers):
            for key in keys:
                if key[0] != clf:
                    continue
                rates, ps = stats[key]
                sd = float(rates.std(ddof=1)) if rates.size > 1 else 0.0
                blocking = str(config.blocking) if clf in BLOCKED_CLASSIFIERS else "singleton"
                cells.append(
                    Cell(
                        classifier=clf,
                        gamma=key[1],
                        phi=key[2],
                        d=d,
                        blocking=blocking,
                        reps=rates.size,
                        mean_rate=float(rates.mean()),
                        sd_rate=sd,
                        se_rate=sd / float(np.sqrt(rates.size)),
                        rates=tuple(float(r) for r in rates),
                        chosen_p=ps,
                        best_gamma=(clf in best and best[clf][1] == key),
                    )
                )
    return EvalReport(config=config, cells=tuple(cells))


def _canonical_order(classifiers):
    return [c for c in ALL_CLASSIFIERS if c in classifiers]


def _run_rep_star(args):
    return _run_rep(*args)


# ---------------------------------------------------------------------------
# serialization


def config_to_dict(config: ExperimentConfig) -> dict:
    return {
        "example": None if config.example is None else config.example.value,
        "csv_path": config.csv_path,
        "dims": list(config.dims),
        "train_per_class": None if config.train_per_class is None else list(config.train_per_class),
        "test_per_class": config.test_per_class,
        "repetitions": config.repetitions,
        "classifiers": list(config.classifiers),
        "specs": [[s.gamma.value, s.phi.value] for s in config.specs],
        "blocking": str(config.blocking),
        "p_grid": [float(p) for p in config.p_grid],
        "corr_method": config.corr_method,
        "split_fraction": config.split_fraction,
        "base_seed": config.base_seed,
    }


def config_from_dict(data: dict) -> ExperimentConfig:
    known = set(config_to_dict(ExperimentConfig(example=1)))
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    kwargs = dict(data)
    if kwargs.get("specs") is not None:
        kwargs["specs"] = tuple(DissimilaritySpec(Gamma(g), Phi(p)) for g, p in kwargs["specs"])
    if kwargs.get("blocking") is not None:
        kwargs["blocking"] = Blocking.parse(kwargs["blocking"])
    if kwargs.get("example") is not None:
        kwargs["example"] = Example(kwargs["example"])
    for key in ("dims", "train_per_class", "classifiers", "p_grid"):
        if kwargs.get(key) is not None:
            kwargs[key] = tuple(kwargs[key])
    kwargs = {k: v for k, v in kwargs.items() if v is not None or k in ("example", "csv_path")}
    return ExperimentConfig(**kwargs)


def _cell_to_dict(cell: Cell) -> dict:
    return {
        "classifier": cell.classifier,
        "gamma": cell.gamma,
        "phi": cell.phi,
        "d": cell.d,
        "blocking": cell.blocking,
        "reps": cell.reps,
        "mean_rate": cell.mean_rate,
        "sd_rate": cell.sd_rate,
        "se_rate": cell.se_rate,
        "rates": list(cell.rates),
        "chosen_p": None if cell.chosen_p is None else list(cell.chosen_p),
        "best_gamma": cell.best_gamma,
    }


def emit_report(report: EvalReport, format: str = "json") -> bytes:
    """Serialize a report with stable field order (JSON) or as summary CSV."""
    if format == "json":
        doc = {
            "config": config_to_dict(report.config),
            "cells": [_cell_to_dict(c) for c in report.cells],
        }
        return (json.dumps(doc, indent=2) + "\n").encode()
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["classifier", "gamma", "phi", "d", "blocking", "reps", "mean_rate", "sd_rate", "se_rate"]
        )
        for c in report.cells:
            writer.writerow(
                [
                    c.classifier,
                    c.gamma or "",
                    c.phi or "",
                    c.d,
                    c.blocking,
                    c.reps,
                    repr(c.mean_rate),
                    repr(c.sd_rate),
                    repr(c.se_rate),
                ]
            )
        return buf.getvalue().encode()
    raise ValueError(f"unknown report format {format!r}")


def report_from_json(blob: bytes) -> EvalReport:
    doc = json.loads(blob)
    config = config_from_dict(doc["config"])
    cells = tuple(
        Cell(
            classifier=c["classifier"],
            gamma=c["gamma"],
            phi=c["phi"],
            d=c["d"],
            blocking=c["blocking"],
            reps=c["reps"],
            mean_rate=c["mean_rate"],
            sd_rate=c["sd_rate"],
            se_rate=c["se_rate"],
            rates=tuple(c["rates"]),
            chosen_p=None if c["chosen_p"] is None else tuple(c["chosen_p"]),
            best_gamma=c["best_gamma"],
        )
        for c in doc["cells"]
    )
    return EvalReport(config=config, cells=cells)


# ---------------------------------------------------------------------------
# CSV data interface


def write_labeled_csv(data: Dataset, path: str) -> None:
    """Write a dataset in the labeled-CSV interchange format."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label"] + [f"f{i}" for i in range(data.dim)])
        for row, label in zip(data.features, data.labels):
            writer.writerow([int(label)] + [repr(float(v)) for v in row])


def read_labeled_csv(path: str) -> Dataset:
    """UTF-8 CSV with a header; integer ``label`` column, numeric features."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file") from None
        if "label" not in header:
            raise IngestError(f"{path}: missing required 'label' column")
        label_col = header.index("label")
        feature_cols = [i for i in range(len(header)) if i != label_col]
        labels, rows = [], []
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise IngestError(f"{path}: row {row_no}: expected {len(header)} fields")
            raw = row[label_col].strip()
            try:
                labels.append(int(raw))
            except ValueError:
                raise IngestError(
                    f"{path}: row {row_no}, column 'label': not an integer: {raw!r}"
                ) from None
            feats = []
            for i in feature_cols:
                text = row[i].strip()
                if not text:
                    raise IngestError(
                        f"{path}: row {row_no}, column {header[i]!r}: missing value"
                    )
                try:
                    feats.append(float(text))
                except ValueError:
                    raise IngestError(
                        f"{path}: row {row_no}, column {header[i]!r}: not numeric: {text!r}"
                    ) from None
            rows.append(feats)
    if not rows:
        raise IngestError(f"{path}: no data rows")
    feats = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(feats)):
        raise IngestError(f"{path}: non-finite feature values")
    try:
        return Dataset(feats, np.asarray(labels, dtype=np.intp))
    except ValueError as exc:
        raise IngestError(f"{path}: {exc}") from None
