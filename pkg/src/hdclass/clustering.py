"""Correlation-based variable clustering and cross-validated cut selection.

Variables are clustered by average-linkage agglomeration on ``1 - |r|``
dissimilarities, the dendrogram is cut at percentile heights over a grid of
fractions, and the cut is picked by leave-one-out classification error.
"""

from __future__ import annotations

import enum
import json
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.stats import rankdata

from . import _kernels
from .classifiers import AvgVariant, Dataset, NnVariant
from .dissimilarity import BlockPartition, DissimilaritySpec, block_means, phi_eval, _GAMMA_FUNCS

__all__ = [
    "CorrelationMethod",
    "ConstantColumnWarning",
    "Dendrogram",
    "CutSelection",
    "DEFAULT_P_GRID",
    "correlation_dissimilarity",
    "average_linkage",
    "percentile_height",
    "cut_at_height",
    "partition_at_percentile",
    "select_p_by_loocv",
]

#: Fraction grid used for percentile cuts.
DEFAULT_P_GRID = tuple(round(0.1 * i, 1) for i in range(11))


class CorrelationMethod(enum.Enum):
    PEARSON = "pearson"
    SPEARMAN = "spearman"


class ConstantColumnWarning(UserWarning):
    """A feature column is constant; its correlations are set to zero."""


def correlation_dissimilarity(features, method=CorrelationMethod.PEARSON) -> np.ndarray:
    """Pairwise ``1 - |correlation|`` between feature columns.

    Constant columns get correlation 0 against everything (dissimilarity 1)
    with a :class:`ConstantColumnWarning`; the result is exactly symmetric
    with a zero diagonal and entries in [0, 1].
    """
    method = CorrelationMethod(method)
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need a 2-d matrix with at least 2 rows")
    if method is CorrelationMethod.SPEARMAN:
        X = rankdata(X, method="average", axis=0)
    d = X.shape[1]
    constant = X.max(axis=0) == X.min(axis=0)
    D = np.ones((d, d))
    if constant.any():
        warnings.warn(
            f"{int(constant.sum())} constant feature column(s); treating them as uncorrelated",
            ConstantColumnWarning,
            stacklevel=2,
        )
    good = np.flatnonzero(~constant)
    if good.size >= 2:
        r = np.corrcoef(X[:, good], rowvar=False)
        D[np.ix_(good, good)] = np.clip(1.0 - np.abs(r), 0.0, 1.0)
    upper = np.triu(D, k=1)
    return upper + upper.T


@dataclass(frozen=True)
class Dendrogram:
    """Merge tree: leaves are nodes ``0..leaf_count-1``, the k-th merge joins
    two existing nodes at a height and creates node ``leaf_count + k``."""

    merges: tuple
    leaf_count: int

    def __init__(self, merges, leaf_count: int):
        merges = tuple((int(l), int(r), float(h)) for l, r, h in merges)
        object.__setattr__(self, "merges", merges)
        object.__setattr__(self, "leaf_count", int(leaf_count))
        if len(merges) != self.leaf_count - 1:
            raise ValueError("a dendrogram on d leaves has exactly d-1 merges")
        seen = set()
        for k, (left, right, height) in enumerate(merges):
            limit = self.leaf_count + k
            if not (0 <= left < limit and 0 <= right < limit) or left == right:
                raise ValueError(f"merge {k} references invalid nodes ({left}, {right})")
            if left in seen or right in seen:
                raise ValueError(f"merge {k} reuses a node already consumed")
            seen.update((left, right))
            if k and height < merges[k - 1][2]:
                raise ValueError("merge heights must be non-decreasing")

    @cached_property
    def heights(self) -> np.ndarray:
        return np.array([h for _, _, h in self.merges])

    def to_json(self) -> str:
        return json.dumps(
            {"leaf_count": self.leaf_count, "merges": [list(m) for m in self.merges]}
        )


def average_linkage(dissim) -> Dendrogram:
    """Agglomerative clustering with unweighted average linkage.

    Merge candidates tie-break on the lexicographically smallest (node id,
    node id) pair, so the result is deterministic even on degenerate input.
    """
    D = np.asarray(dissim, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("dissimilarity must be a square matrix")
    if not np.array_equal(D, D.T):
        raise ValueError("dissimilarity must be symmetric")
    if np.any(D < 0) or not np.all(np.isfinite(D)):
        raise ValueError("dissimilarity must be nonnegative and finite")
    if np.any(np.diag(D) != 0):
        raise ValueError("dissimilarity must have a zero diagonal")

    n = D.shape[0]
    if n == 1:
        return Dendrogram([], 1)

    work = D.copy()
    np.fill_diagonal(work, np.inf)
    ids = np.arange(n, dtype=np.intp)
    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)
    rmin_val = np.full(n, np.inf)
    rmin_part = np.zeros(n, dtype=np.intp)

    def rescan(slot: int) -> None:
        row = work[slot]
        m = row.min()
        rmin_val[slot] = m
        if np.isfinite(m):
            cands = np.flatnonzero(row == m)
            rmin_part[slot] = cands[np.argmin(ids[cands])]

    for slot in range(n):
        rescan(slot)

    merges = []
    for step in range(n - 1):
        masked = np.where(active, rmin_val, np.inf)
        m = masked.min()
        best = None
        for s in np.flatnonzero(masked == m):
            for t in np.flatnonzero(work[s] == m):
                key = (min(ids[s], ids[t]), max(ids[s], ids[t]))
                if best is None or key < best[0]:
                    best = (key, s, t)
        (lo_id, hi_id), sa, sb = best
        merges.append((lo_id, hi_id, m))

        new_row = (sizes[sa] * work[sa] + sizes[sb] * work[sb]) / (sizes[sa] + sizes[sb])
        work[sa, :] = new_row
        work[:, sa] = new_row
        work[sa, sa] = np.inf
        work[sb, :] = np.inf
        work[:, sb] = np.inf
        active[sb] = False
        sizes[sa] += sizes[sb]
        ids[sa] = n + step
        rmin_val[sb] = np.inf

        rescan(sa)
        stale = active & ((rmin_part == sa) | (rmin_part == sb))
        stale[sa] = False
        for slot in np.flatnonzero(stale):
            rescan(slot)
        fresh = active & (work[:, sa] < rmin_val)
        fresh[sa] = False
        rmin_val[fresh] = work[fresh, sa]
        rmin_part[fresh] = sa

    return Dendrogram(merges, n)


def percentile_height(dendrogram: Dendrogram, p: float) -> float:
    """Nearest-rank percentile of the merge heights; 0.0 when there are none.

    ``p=0`` returns 0.0 by convention; use :func:`partition_at_percentile`
    for the guaranteed-singletons semantics of the lowest cut.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"percentile fraction must be in [0, 1], got {p}")
    heights = np.sort(dendrogram.heights)
    if heights.size == 0 or p == 0.0:
        return 0.0
    rank = int(np.ceil(p * heights.size))
    return float(heights[rank - 1])


def cut_at_height(dendrogram: Dendrogram, h: float) -> BlockPartition:
    """Partition induced by applying every merge with height <= h."""
    if h < 0:
        raise ValueError("cut height must be nonnegative")
    d = dendrogram.leaf_count
    members: dict[int, list[int]] = {i: [i] for i in range(d)}
    next_id = d
    for left, right, height in dendrogram.merges:
        if height > h:
            break
        members[next_id] = members.pop(left) + members.pop(right)
        next_id += 1
    return BlockPartition(list(members.values()), d)


def partition_at_percentile(dendrogram: Dendrogram, p: float) -> BlockPartition:
    """Cut at the p-th percentile height; ``p=0`` always yields singletons."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"percentile fraction must be in [0, 1], got {p}")
    if p == 0.0:
        return BlockPartition.singletons(dendrogram.leaf_count)
    return cut_at_height(dendrogram, percentile_height(dendrogram, p))


@dataclass(frozen=True)
class CutSelection:
    """Outcome of leave-one-out selection over the percentile grid."""

    p_grid: tuple
    loocv_errors: tuple
    chosen_p: float
    chosen_partition: BlockPartition


_BLOCKED_VARIANTS = {
    AvgVariant.GGSAVG: (_kernels.loocv_avg_family, 3),
    NnVariant.NN_GGMADD: (_kernels.loocv_nn_madd, 2),
}


def _loocv_variant(variant):
    for key in _BLOCKED_VARIANTS:
        if variant == key or variant == key.value:
            return key
    raise ValueError(
        "leave-one-out cut selection applies to the blocked classifiers "
        f"'ggsavg' and 'nn-ggmadd', got {variant!r}"
    )


def loocv_profile(
    train: Dataset,
    specs: list[DissimilaritySpec],
    variants: list,
    p_grid=DEFAULT_P_GRID,
    method=CorrelationMethod.PEARSON,
):
    """Leave-one-out error for every (variant, spec, p) combination.

    The correlation matrix and dendrogram are computed once on the full
    training sample; only the classifier is refit per fold.  Returns
    ``(dendrogram, grid, partitions, errors)`` with ``errors[(variant, spec)]``
    an array over the sorted grid.
    """
    variants = [_loocv_variant(v) for v in variants]
    grid = tuple(sorted(float(p) for p in p_grid))
    if not grid:
        raise ValueError("empty percentile grid")
    X, y = train.features, train.labels
    n, J = train.n, train.n_classes
    for variant in variants:
        minimum = _BLOCKED_VARIANTS[variant][1]
        counts = train.class_counts
        if counts.min() < minimum:
            bad = int(np.argmin(counts))
            raise ValueError(
                f"class {bad} has {int(counts[bad])} points; leave-one-out with "
                f"{variant.value} needs at least {minimum} per class"
            )

    dendro = average_linkage(correlation_dissimilarity(X, method))
    partitions = [partition_at_percentile(dendro, p) for p in grid]

    iu, ju = np.triu_indices(n, k=1)
    sq = np.square(X[iu] - X[ju])

    errors = {(v, spec): np.empty(len(grid)) for v in variants for spec in specs}
    seen: dict[tuple, int] = {}
    for pi, part in enumerate(partitions):
        key = part.blocks
        if key in seen:
            for v in variants:
                for spec in specs:
                    errors[(v, spec)][pi] = errors[(v, spec)][seen[key]]
            continue
        seen[key] = pi
        bm = sq if part.is_singleton else block_means(sq, part)
        for spec in specs:
            vals = phi_eval(spec.phi, _GAMMA_FUNCS[spec.gamma](bm).mean(axis=1))
            H = np.zeros((n, n))
            H[iu, ju] = vals
            H[ju, iu] = vals
            for v in variants:
                errors[(v, spec)][pi] = _BLOCKED_VARIANTS[v][0](H, y, J)
    return dendro, grid, partitions, errors


def select_p_by_loocv(
    train: Dataset,
    spec: DissimilaritySpec,
    variant,
    p_grid=DEFAULT_P_GRID,
    method=CorrelationMethod.PEARSON,
) -> CutSelection:
    """Pick the percentile cut minimizing leave-one-out error (ties -> smallest p)."""
    variant = _loocv_variant(variant)
    dendro, grid, partitions, errors = loocv_profile(train, [spec], [variant], p_grid, method)
    e = errors[(variant, spec)]
    best = int(np.argmin(e))
    return CutSelection(grid, tuple(float(x) for x in e), grid[best], partitions[best])
