"""Generalized dissimilarity measures between vectors.

The componentwise measure applies an increasing transform to each squared
coordinate difference and averages, while the blocked measure first averages
squared differences within groups of coordinates.  Both are symmetric,
vanish on identical inputs, and reduce to the scaled squared Euclidean
distance for identity transforms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Gamma",
    "Phi",
    "DissimilaritySpec",
    "BlockPartition",
    "gamma_eval",
    "phi_eval",
    "h_componentwise",
    "h_blocked",
    "pairwise_componentwise",
    "pairwise_blocked",
]


class Gamma(enum.Enum):
    """Inner transform applied to squared coordinate differences."""

    IDENTITY = "id"
    ONE_MINUS_EXP_NEG = "g1"
    HALF_SQRT = "g2"
    LOG1P = "g3"


class Phi(enum.Enum):
    """Outer transform applied to the averaged inner values."""

    IDENTITY = "id"
    SQRT = "sqrt"


_GAMMA_FUNCS = {
    Gamma.IDENTITY: lambda t: t,
    Gamma.ONE_MINUS_EXP_NEG: lambda t: 1.0 - np.exp(-t),
    Gamma.HALF_SQRT: lambda t: np.sqrt(t) / 2.0,
    Gamma.LOG1P: np.log1p,
}

_PHI_FUNCS = {
    Phi.IDENTITY: lambda t: t,
    Phi.SQRT: np.sqrt,
}


def gamma_eval(kind: Gamma, t):
    """Evaluate the inner transform at ``t >= 0``.

    Accepts scalars or arrays; rejects negative or non-finite input.
    """
    t = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise ValueError("gamma transform requires finite input")
    if np.any(t < 0):
        raise ValueError("gamma transform requires nonnegative input")
    out = _GAMMA_FUNCS[Gamma(kind)](t)
    return float(out) if np.isscalar(out) or out.ndim == 0 else out


def phi_eval(kind: Phi, t):
    """Evaluate the outer transform at ``t >= 0``."""
    t = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise ValueError("phi transform requires finite input")
    if np.any(t < 0):
        raise ValueError("phi transform requires nonnegative input")
    out = _PHI_FUNCS[Phi(kind)](t)
    return float(out) if np.isscalar(out) or out.ndim == 0 else out


@dataclass(frozen=True)
class DissimilaritySpec:
    """An (inner, outer) transform pair selecting one dissimilarity."""

    gamma: Gamma = Gamma.IDENTITY
    phi: Phi = Phi.IDENTITY

    def __post_init__(self):
        object.__setattr__(self, "gamma", Gamma(self.gamma))
        object.__setattr__(self, "phi", Phi(self.phi))


#: Identity pair, reducing the componentwise measure to d^-1 ||u - v||^2.
CLASSIC_SQUARED = DissimilaritySpec(Gamma.IDENTITY, Phi.IDENTITY)

#: Pair reducing the componentwise measure to d^-1/2 ||u - v||.
CLASSIC_ROOT = DissimilaritySpec(Gamma.IDENTITY, Phi.SQRT)


@dataclass(frozen=True)
class BlockPartition:
    """Disjoint grouping of the coordinate indices ``0..dim-1``.

    Blocks are kept in a canonical order (sorted by smallest member) with
    sorted members, so equal partitions compare equal.
    """

    blocks: tuple
    dim: int

    def __init__(self, blocks: Iterable[Sequence[int]], dim: int):
        canon = []
        for block in blocks:
            idx = np.asarray(list(block), dtype=np.intp)
            if idx.size == 0:
                raise ValueError("empty block in partition")
            canon.append(tuple(int(i) for i in np.sort(idx)))
        canon.sort(key=lambda b: b[0])
        object.__setattr__(self, "blocks", tuple(canon))
        object.__setattr__(self, "dim", int(dim))
        flat = [i for block in self.blocks for i in block]
        if len(flat) != self.dim or sorted(flat) != list(range(self.dim)):
            raise ValueError("blocks must partition indices 0..dim-1 exactly")

    @classmethod
    def singletons(cls, dim: int) -> "BlockPartition":
        return cls([(i,) for i in range(dim)], dim)

    @classmethod
    def contiguous(cls, dim: int, size: int) -> "BlockPartition":
        """Consecutive equal-sized blocks; ``size`` must divide ``dim``."""
        if dim % size != 0:
            raise ValueError(f"block size {size} does not divide dimension {dim}")
        return cls([range(lo, lo + size) for lo in range(0, dim, size)], dim)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @cached_property
    def block_sizes(self) -> np.ndarray:
        return np.array([len(b) for b in self.blocks], dtype=np.intp)

    @cached_property
    def column_order(self) -> np.ndarray:
        """Permutation placing each block's coordinates contiguously."""
        return np.concatenate([np.asarray(b, dtype=np.intp) for b in self.blocks])

    @cached_property
    def segment_starts(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.block_sizes)[:-1]))

    @property
    def is_singleton(self) -> bool:
        return self.n_blocks == self.dim


def _check_pair(u, v) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or v.ndim != 1:
        raise ValueError("inputs must be one-dimensional vectors")
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    if u.size == 0:
        raise ValueError("vectors must have dimension >= 1")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValueError("non-finite entries in input vectors")
    return u, v


def h_componentwise(spec: DissimilaritySpec, u, v) -> float:
    """Coordinatewise dissimilarity: outer(mean of inner(squared diffs))."""
    u, v = _check_pair(u, v)
    t = np.square(u - v)
    return float(phi_eval(spec.phi, np.mean(_GAMMA_FUNCS[spec.gamma](t))))


def h_blocked(spec: DissimilaritySpec, partition: BlockPartition, u, v) -> float:
    """Blocked dissimilarity: inner transform acts on per-block mean squares."""
    u, v = _check_pair(u, v)
    if u.shape[0] != partition.dim:
        raise ValueError(
            f"dimension mismatch: vectors have {u.shape[0]}, partition expects {partition.dim}"
        )
    sq = np.square(u - v)
    means = np.array([sq[list(b)].mean() for b in partition.blocks])
    return float(phi_eval(spec.phi, np.mean(_GAMMA_FUNCS[spec.gamma](means))))


def _gamma_mean(spec: DissimilaritySpec, sq: np.ndarray) -> np.ndarray:
    """Row means of the inner transform over a (rows, d) squared-diff array."""
    return _GAMMA_FUNCS[spec.gamma](sq).mean(axis=1)


def block_means(sq: np.ndarray, partition: BlockPartition) -> np.ndarray:
    """Per-block mean squared differences, shape (rows, n_blocks)."""
    cols = sq[:, partition.column_order]
    sums = np.add.reduceat(cols, partition.segment_starts, axis=1)
    return sums / partition.block_sizes


def pairwise_componentwise(spec: DissimilaritySpec, A, B=None, chunk: int = 128) -> np.ndarray:
    """Dissimilarity matrix between rows of A and rows of B (or A with itself).

    The self case exploits symmetry and returns an exact-zero diagonal.
    """
    A = np.asarray(A, dtype=np.float64)
    if B is None:
        return _pairwise_self(lambda sq: phi_eval(spec.phi, _gamma_mean(spec, sq)), A)
    B = np.asarray(B, dtype=np.float64)
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    out = np.empty((A.shape[0], B.shape[0]))
    for lo in range(0, A.shape[0], chunk):
        hi = min(lo + chunk, A.shape[0])
        sq = np.square(A[lo:hi, None, :] - B[None, :, :]).reshape(-1, A.shape[1])
        out[lo:hi] = phi_eval(spec.phi, _gamma_mean(spec, sq)).reshape(hi - lo, B.shape[0])
    return out


def pairwise_blocked(
    spec: DissimilaritySpec, partition: BlockPartition, A, B=None, chunk: int = 128
) -> np.ndarray:
    """Blocked dissimilarity matrix between rows of A and rows of B."""
    A = np.asarray(A, dtype=np.float64)
    if A.shape[1] != partition.dim:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs partition dim {partition.dim}")

    def kernel(sq):
        bm = block_means(sq, partition)
        return phi_eval(spec.phi, _GAMMA_FUNCS[spec.gamma](bm).mean(axis=1))

    if B is None:
        return _pairwise_self(kernel, A)
    B = np.asarray(B, dtype=np.float64)
    if B.shape[1] != partition.dim:
        raise ValueError(f"dimension mismatch: {B.shape[1]} vs partition dim {partition.dim}")
    out = np.empty((A.shape[0], B.shape[0]))
    for lo in range(0, A.shape[0], chunk):
        hi = min(lo + chunk, A.shape[0])
        sq = np.square(A[lo:hi, None, :] - B[None, :, :]).reshape(-1, A.shape[1])
        out[lo:hi] = kernel(sq).reshape(hi - lo, B.shape[0])
    return out


def _pairwise_self(kernel, A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    out = np.zeros((n, n))
    if iu.size:
        sq = np.square(A[iu] - A[ju])
        vals = kernel(sq)
        out[iu, ju] = vals
        out[ju, iu] = vals
    return out
