"""Command-line front end.

Subcommands: ``simulate`` (benchmark experiments on the built-in examples),
``classify`` (fit on a training CSV, predict a test CSV), ``cluster``
(dendrogram / partition / cut-selection curve), ``constants`` (separability
estimates) and ``bayes`` (Bayes-risk estimates).

Exit codes: 0 success, 2 usage, 3 data ingestion, 4 configuration.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .classifiers import (
    AvgVariant,
    Dataset,
    FittedModel,
    Family,
    NnVariant,
    predict_avg_family,
    predict_nn_family,
)
from .clustering import (
    CorrelationMethod,
    DEFAULT_P_GRID,
    average_linkage,
    correlation_dissimilarity,
    partition_at_percentile,
    select_p_by_loocv,
)
from .dissimilarity import BlockPartition, DissimilaritySpec, Gamma, Phi
from .harness import (
    Blocking,
    ConfigError,
    ExperimentConfig,
    IngestError,
    config_from_dict,
    emit_report,
    read_labeled_csv,
    run_experiment,
    write_labeled_csv,
)
from .populations import (
    Example,
    ExampleSpec,
    default_train_sizes,
    estimate_bayes_risk,
    estimate_separability,
    generate,
    true_partition,
)

_GAMMA_FLAGS = {"id": Gamma.IDENTITY, "g1": Gamma.ONE_MINUS_EXP_NEG, "g2": Gamma.HALF_SQRT, "g3": Gamma.LOG1P}
_PHI_FLAGS = {"id": Phi.IDENTITY, "sqrt": Phi.SQRT}
_METHODS = [v.value for v in AvgVariant] + [v.value for v in NnVariant]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdclass", description="Generalized distance based classifiers for HDLSS data"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run benchmark experiments on a built-in example")
    sim.add_argument("--config", help="JSON file mirroring the experiment config")
    sim.add_argument("--example", type=int, choices=range(1, 6), help="example number (1-5)")
    sim.add_argument("--d", default="1000", help="comma-separated dimensions (default 1000)")
    sim.add_argument("--reps", type=int, default=100, help="repetitions (default 100)")
    sim.add_argument(
        "--train-per-class", help="comma-separated per-class training sizes (default 50,50; example 4: 50,25)"
    )
    sim.add_argument("--test-per-class", type=int, default=250, help="test points per class (default 250)")
    sim.add_argument(
        "--classifiers",
        default="gsavg,ggsavg,nn-gmadd,nn-ggmadd",
        help=f"comma-separated from {{{','.join(_METHODS)}}}",
    )
    sim.add_argument("--gammas", default="g1,g2,g3", help="comma-separated from {id,g1,g2,g3} (default g1,g2,g3)")
    sim.add_argument("--phi", default="id", choices=sorted(_PHI_FLAGS), help="outer transform (default id)")
    sim.add_argument(
        "--blocking", default="loocv", help="singleton | true | loocv | fixed:<m> (default loocv)"
    )
    sim.add_argument(
        "--corr", default="auto", choices=["auto", "pearson", "spearman"],
        help="correlation for estimated blocking (default auto)",
    )
    sim.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    sim.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    sim.add_argument("--format", default="json", choices=["json", "csv"], help="report format (default json)")
    sim.add_argument("--out", help="output path (default stdout)")

    cls = sub.add_parser("classify", help="fit on a training CSV and predict a test CSV")
    cls.add_argument("--train", required=True, help="labeled training CSV")
    cls.add_argument("--test", required=True, help="test CSV (label column ignored if present)")
    cls.add_argument("--method", required=True, choices=_METHODS)
    cls.add_argument("--gamma", default="g1", choices=sorted(_GAMMA_FLAGS), help="inner transform (default g1)")
    cls.add_argument("--phi", default="id", choices=sorted(_PHI_FLAGS), help="outer transform (default id)")
    cls.add_argument(
        "--blocking", default="loocv", help="blocked methods: singleton | loocv | fixed:<m> (default loocv)"
    )
    cls.add_argument("--corr", default="pearson", choices=["pearson", "spearman"])
    cls.add_argument("--k", type=int, default=1, help="neighbor count for NN methods (default 1)")
    cls.add_argument("--out", help="predictions CSV path (default stdout)")

    clu = sub.add_parser("cluster", help="variable clustering from a training CSV")
    clu.add_argument("--train", required=True, help="labeled training CSV")
    clu.add_argument("--p", type=float, help="fixed percentile cut; omit to select by cross-validation")
    clu.add_argument("--corr", default="pearson", choices=["pearson", "spearman"])
    clu.add_argument("--method", default="nn-ggmadd", choices=["ggsavg", "nn-ggmadd"],
                     help="classifier scored by cross-validation (default nn-ggmadd)")
    clu.add_argument("--gamma", default="g1", choices=sorted(_GAMMA_FLAGS))
    clu.add_argument("--phi", default="id", choices=sorted(_PHI_FLAGS))
    clu.add_argument("--out", help="output JSON path (default stdout)")

    con = sub.add_parser("constants", help="Monte-Carlo separability constants of an example")
    con.add_argument("--example", type=int, required=True, choices=range(1, 6))
    con.add_argument("--d", type=int, default=100)
    con.add_argument("--gamma", default="g1", choices=sorted(_GAMMA_FLAGS))
    con.add_argument("--phi", default="id", choices=sorted(_PHI_FLAGS))
    con.add_argument("--blocks", default="true", help="true | singleton | fixed:<m> (default true)")
    con.add_argument("--n1", type=int, help="class-0 training size (default: example default)")
    con.add_argument("--n2", type=int, help="class-1 training size (default: example default)")
    con.add_argument("--mc-size", type=int, default=100_000)
    con.add_argument("--seed", type=int, default=0)
    con.add_argument("--out", help="output JSON path (default stdout)")

    bay = sub.add_parser("bayes", help="Monte-Carlo Bayes risk of an example")
    bay.add_argument("--example", type=int, required=True, choices=range(1, 6))
    bay.add_argument("--d", type=int, default=100)
    bay.add_argument("--mc-size", type=int, default=100_000)
    bay.add_argument("--seed", type=int, default=0)
    bay.add_argument("--out", help="output JSON path (default stdout)")

    exp = sub.add_parser("export", help="write a sample from an example as labeled CSV")
    exp.add_argument("--example", type=int, required=True, choices=range(1, 6))
    exp.add_argument("--d", type=int, default=50)
    exp.add_argument("--n", default="50,50", help="comma-separated per-class counts (default 50,50)")
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--out", required=True, help="output CSV path")

    return parser


def _emit(payload: bytes, out: str | None) -> None:
    if out is None:
        sys.stdout.write(payload.decode())
    else:
        with open(out, "wb") as fh:
            fh.write(payload)


def _spec(args) -> DissimilaritySpec:
    return DissimilaritySpec(_GAMMA_FLAGS[args.gamma], _PHI_FLAGS[args.phi])


def _cmd_simulate(args) -> int:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = config_from_dict(json.load(fh))
    else:
        if args.example is None:
            raise ConfigError("simulate needs --example or --config")
        gammas = [g.strip() for g in args.gammas.split(",") if g.strip()]
        for g in gammas:
            if g not in _GAMMA_FLAGS:
                raise ConfigError(f"unknown gamma flag {g!r}")
        config = ExperimentConfig(
            example=Example(args.example),
            dims=tuple(int(x) for x in args.d.split(",")),
            train_per_class=(
                tuple(int(x) for x in args.train_per_class.split(","))
                if args.train_per_class
                else None
            ),
            test_per_class=args.test_per_class,
            repetitions=args.reps,
            classifiers=tuple(c.strip() for c in args.classifiers.split(",") if c.strip()),
            specs=tuple(DissimilaritySpec(_GAMMA_FLAGS[g], _PHI_FLAGS[args.phi]) for g in gammas),
            blocking=Blocking.parse(args.blocking),
            corr_method=args.corr,
            base_seed=args.seed,
        )
    report = run_experiment(config, threads=max(1, args.threads))
    _emit(emit_report(report, args.format), args.out)
    return 0


def _parse_partition(text: str, spec: ExampleSpec) -> BlockPartition:
    if text == "true":
        return true_partition(spec)
    if text == "singleton":
        return BlockPartition.singletons(spec.d)
    if text.startswith("fixed:"):
        return BlockPartition.contiguous(spec.d, int(text.split(":", 1)[1]))
    raise ConfigError(f"unknown block strategy {text!r}")


def _cmd_classify(args) -> int:
    train = read_labeled_csv(args.train)
    test = read_labeled_csv(args.test) if _has_label(args.test) else None
    test_features = test.features if test is not None else _read_unlabeled_csv(args.test)
    spec = _spec(args)
    method = args.method
    partition = None
    if method in ("ggsavg", "nn-ggmadd"):
        blocking = Blocking.parse(args.blocking) if args.blocking != "true" else None
        if blocking is None:
            raise ConfigError("true blocking is only defined for simulated examples")
        if blocking.kind == "loocv":
            selection = select_p_by_loocv(
                train, spec, method, DEFAULT_P_GRID, CorrelationMethod(args.corr)
            )
            partition = selection.chosen_partition
        elif blocking.kind == "singleton":
            partition = BlockPartition.singletons(train.dim)
        else:
            partition = BlockPartition.contiguous(train.dim, blocking.size)
    family = Family.AVG_FAMILY if method in [v.value for v in AvgVariant] else Family.NN_FAMILY
    model = FittedModel(train, spec, partition, family, k=args.k)
    if family is Family.AVG_FAMILY:
        preds = predict_avg_family(model, test_features, AvgVariant(method))
    else:
        preds = predict_nn_family(model, test_features, NnVariant(method))
    lines = "label\n" + "\n".join(str(int(p)) for p in preds) + "\n"
    _emit(lines.encode(), args.out)
    return 0


def _has_label(path: str) -> bool:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
    return "label" in [c.strip() for c in header.split(",")]


def _read_unlabeled_csv(path: str) -> np.ndarray:
    import csv as _csv

    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = _csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise IngestError(f"{path}: empty file")
        rows = []
        for row_no, row in enumerate(reader, start=2):
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                raise IngestError(f"{path}: row {row_no}: non-numeric value") from None
    if not rows:
        raise IngestError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def _cmd_cluster(args) -> int:
    train = read_labeled_csv(args.train)
    method = CorrelationMethod(args.corr)
    dendro = average_linkage(correlation_dissimilarity(train.features, method))
    doc = {"dendrogram": json.loads(dendro.to_json())}
    if args.p is not None:
        partition = partition_at_percentile(dendro, args.p)
        doc["p"] = args.p
        doc["partition"] = [list(b) for b in partition.blocks]
    else:
        selection = select_p_by_loocv(train, _spec(args), args.method, DEFAULT_P_GRID, method)
        doc["p_grid"] = list(selection.p_grid)
        doc["loocv_errors"] = list(selection.loocv_errors)
        doc["chosen_p"] = selection.chosen_p
        doc["partition"] = [list(b) for b in selection.chosen_partition.blocks]
    _emit((json.dumps(doc, indent=2) + "\n").encode(), args.out)
    return 0


def _cmd_constants(args) -> int:
    espec = ExampleSpec(Example(args.example), args.d)
    partition = _parse_partition(args.blocks, espec)
    sizes = default_train_sizes(espec.example)
    n1 = args.n1 if args.n1 is not None else sizes[0]
    n2 = args.n2 if args.n2 is not None else sizes[1]
    est = estimate_separability(espec, _spec(args), partition, n1, n2, args.mc_size, args.seed)
    doc = {
        "example": args.example,
        "d": args.d,
        "gamma": args.gamma,
        "phi": args.phi,
        "n1": n1,
        "n2": n2,
        "mc_size": est.mc_size,
        "xi_12": est.xi_12,
        "tau_12": est.tau_12,
        "tau_21": est.tau_21,
        "std_errors": est.std_errors,
    }
    _emit((json.dumps(doc, indent=2) + "\n").encode(), args.out)
    return 0


def _cmd_bayes(args) -> int:
    espec = ExampleSpec(Example(args.example), args.d)
    est = estimate_bayes_risk(espec, args.mc_size, args.seed)
    doc = {
        "example": args.example,
        "d": args.d,
        "mc_size": est.mc_size,
        "bayes_risk": est.risk,
        "std_error": est.std_error,
    }
    _emit((json.dumps(doc, indent=2) + "\n").encode(), args.out)
    return 0


def _cmd_export(args) -> int:
    espec = ExampleSpec(Example(args.example), args.d)
    counts = [int(x) for x in args.n.split(",")]
    if len(counts) != 2:
        raise ConfigError("--n takes exactly two per-class counts")
    X = np.vstack([generate(espec, j, counts[j], args.seed) for j in range(2)])
    y = np.repeat(np.arange(2), counts)
    write_labeled_csv(Dataset(X, y), args.out)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "classify": _cmd_classify,
    "cluster": _cmd_cluster,
    "constants": _cmd_constants,
    "bayes": _cmd_bayes,
    "export": _cmd_export,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except IngestError as exc:
        print(f"error: ingest: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 4
    except (ValueError, OSError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
