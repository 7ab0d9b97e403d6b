"""Simulation models for the benchmark examples.

Five fixed two-class populations:

1. i.i.d. coordinates, normal with variance 5/3 vs Student t with 5 df
2. centered Gaussian, 10x10 compound-symmetry blocks, rho 0.3 vs 0.7
3. centered Gaussian, AR(1) correlation, rho 0.3 vs 0.7
4. i.i.d. Cauchy(0, 1) vs Cauchy(0.75, 0.75)
5. centered Gaussian, diagonal covariance with variances (1, 0.5) on the
   two halves of the coordinates, swapped between classes

Sampling is deterministic given an integer seed; per-class substreams are
spawned from the seed so classes never share a stream.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .dissimilarity import (
    BlockPartition,
    DissimilaritySpec,
    Phi,
    block_means,
    phi_eval,
    _GAMMA_FUNCS,
)

__all__ = [
    "Example",
    "ExampleSpec",
    "BayesRiskEstimate",
    "SeparabilityEstimate",
    "default_train_sizes",
    "generate",
    "average_variance",
    "log_density",
    "true_partition",
    "estimate_bayes_risk",
    "estimate_separability",
]

_BLOCK_SIZE = 10  # compound-symmetry block width in example 2
_RHO_1, _RHO_2 = 0.3, 0.7
_CAUCHY = ((0.0, 1.0), (0.75, 0.75))
_NORMAL_VAR = 5.0 / 3.0
_T_DF = 5.0


class Example(enum.Enum):
    EX1 = 1
    EX2 = 2
    EX3 = 3
    EX4 = 4
    EX5 = 5


@dataclass(frozen=True)
class ExampleSpec:
    """One benchmark population pair at a fixed dimension."""

    example: Example
    d: int

    def __post_init__(self):
        object.__setattr__(self, "example", Example(self.example))
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if self.example is Example.EX2 and self.d % _BLOCK_SIZE != 0:
            raise ValueError(
                f"example 2 needs the dimension divisible by {_BLOCK_SIZE}, got {self.d}"
            )


def default_train_sizes(example: Example) -> tuple[int, int]:
    """Per-class training sizes used by the benchmarks (50/25 for example 4)."""
    return (50, 25) if Example(example) is Example.EX4 else (50, 50)


def _rng_for(seed: int, class_j: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(class_j,)))
    )


def _ex5_sds(d: int, class_j: int) -> np.ndarray:
    half = d // 2
    first = np.full(half, 1.0) if class_j == 0 else np.full(d - half, np.sqrt(0.5))
    second = np.full(d - half, np.sqrt(0.5)) if class_j == 0 else np.full(half, 1.0)
    return np.concatenate([first, second])


@lru_cache(maxsize=None)
def _cs_cholesky(rho: float) -> np.ndarray:
    block = np.full((_BLOCK_SIZE, _BLOCK_SIZE), rho)
    np.fill_diagonal(block, 1.0)
    return np.linalg.cholesky(block)


@lru_cache(maxsize=None)
def _cs_inverse(rho: float) -> tuple[np.ndarray, float]:
    block = np.full((_BLOCK_SIZE, _BLOCK_SIZE), rho)
    np.fill_diagonal(block, 1.0)
    sign, logdet = np.linalg.slogdet(block)
    return np.linalg.inv(block), float(logdet)


def _sample_blocks(rng: np.random.Generator, count: int, d: int, rho: float) -> np.ndarray:
    L = _cs_cholesky(rho)
    z = rng.standard_normal((count, d // _BLOCK_SIZE, _BLOCK_SIZE))
    return np.einsum("ij,nbj->nbi", L, z).reshape(count, d)


def _sample_ar(rng: np.random.Generator, count: int, d: int, rho: float) -> np.ndarray:
    # closed-form Cholesky of the AR(1) correlation applied as a recursion
    z = rng.standard_normal((count, d))
    x = np.empty_like(z)
    x[:, 0] = z[:, 0]
    c = np.sqrt(1.0 - rho * rho)
    for i in range(1, d):
        x[:, i] = rho * x[:, i - 1] + c * z[:, i]
    return x


def generate(spec: ExampleSpec, class_j: int, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` i.i.d. rows from the class distribution, deterministically."""
    if class_j not in (0, 1):
        raise ValueError("class index must be 0 or 1")
    if count < 1:
        raise ValueError("count must be positive")
    rng = _rng_for(seed, class_j)
    ex, d = spec.example, spec.d
    if ex is Example.EX1:
        if class_j == 0:
            return rng.standard_normal((count, d)) * np.sqrt(_NORMAL_VAR)
        z = rng.standard_normal((count, d))
        chi = rng.chisquare(_T_DF, size=(count, d))
        return z / np.sqrt(chi / _T_DF)
    if ex is Example.EX2:
        return _sample_blocks(rng, count, d, _RHO_1 if class_j == 0 else _RHO_2)
    if ex is Example.EX3:
        return _sample_ar(rng, count, d, _RHO_1 if class_j == 0 else _RHO_2)
    if ex is Example.EX4:
        loc, scale = _CAUCHY[class_j]
        return loc + scale * np.tan(np.pi * (rng.random((count, d)) - 0.5))
    return rng.standard_normal((count, d)) * _ex5_sds(d, class_j)


def average_variance(spec: ExampleSpec, class_j: int) -> float:
    """d^-1 trace of the class covariance (undefined for the Cauchy example)."""
    ex, d = spec.example, spec.d
    if ex is Example.EX1:
        return _NORMAL_VAR if class_j == 0 else _T_DF / (_T_DF - 2.0)
    if ex in (Example.EX2, Example.EX3):
        return 1.0
    if ex is Example.EX5:
        return float(np.mean(np.square(_ex5_sds(d, class_j))))
    raise ValueError("the Cauchy example has no finite covariance")


def true_partition(spec: ExampleSpec) -> BlockPartition:
    """The generating block structure, where one exists.

    Examples 1, 4 and 5 have independent coordinates (singletons); example 2
    has contiguous blocks of ten.  Example 3's AR dependence has no block
    structure, so asking for it is a configuration error.
    """
    if spec.example is Example.EX2:
        return BlockPartition.contiguous(spec.d, _BLOCK_SIZE)
    if spec.example is Example.EX3:
        raise ValueError("example 3 has auto-regressive dependence, no true blocks")
    return BlockPartition.singletons(spec.d)


def log_density(spec: ExampleSpec, class_j: int, X) -> np.ndarray:
    """Exact log density of each row under the class distribution."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != spec.d:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {spec.d}")
    ex, d = spec.example, spec.d
    if ex is Example.EX1:
        if class_j == 0:
            return -0.5 * (d * np.log(2 * np.pi * _NORMAL_VAR) + (X * X).sum(axis=1) / _NORMAL_VAR)
        nu = _T_DF
        const = gammaln((nu + 1) / 2) - gammaln(nu / 2) - 0.5 * np.log(nu * np.pi)
        return d * const - ((nu + 1) / 2) * np.log1p(X * X / nu).sum(axis=1)
    if ex is Example.EX2:
        rho = _RHO_1 if class_j == 0 else _RHO_2
        inv, logdet = _cs_inverse(rho)
        blocks = X.reshape(X.shape[0], d // _BLOCK_SIZE, _BLOCK_SIZE)
        quad = np.einsum("nbi,ij,nbj->n", blocks, inv, blocks)
        n_blocks = d // _BLOCK_SIZE
        return -0.5 * (d * np.log(2 * np.pi) + n_blocks * logdet + quad)
    if ex is Example.EX3:
        rho = _RHO_1 if class_j == 0 else _RHO_2
        if d == 1:
            return -0.5 * (np.log(2 * np.pi) + X[:, 0] ** 2)
        one = 1.0 - rho * rho
        quad = (
            X[:, 0] ** 2
            + X[:, -1] ** 2
            + (1 + rho * rho) * np.square(X[:, 1:-1]).sum(axis=1)
            - 2 * rho * (X[:, :-1] * X[:, 1:]).sum(axis=1)
        ) / one
        return -0.5 * (d * np.log(2 * np.pi) + (d - 1) * np.log(one) + quad)
    if ex is Example.EX4:
        loc, scale = _CAUCHY[class_j]
        return (
            d * np.log(scale / np.pi) - np.log(np.square(X - loc) + scale * scale).sum(axis=1)
        )
    sds = _ex5_sds(d, class_j)
    return -0.5 * (
        d * np.log(2 * np.pi) + 2 * np.log(sds).sum() + (np.square(X) / np.square(sds)).sum(axis=1)
    )


@dataclass(frozen=True)
class BayesRiskEstimate:
    risk: float
    std_error: float
    mc_size: int


def _bayes_risk_core(draw0, draw1, logpdf0, logpdf1, mc_size: int) -> BayesRiskEstimate:
    wrong0 = wrong1 = 0
    done = 0
    while done < mc_size:
        m = min(_MC_CHUNK, mc_size - done)
        x0 = draw0(m, done)
        x1 = draw1(m, done)
        wrong0 += int(np.sum(logpdf1(x0) > logpdf0(x0)))
        wrong1 += int(np.sum(logpdf0(x1) >= logpdf1(x1)))
        done += m
    e0, e1 = wrong0 / mc_size, wrong1 / mc_size
    risk = 0.5 * (e0 + e1)
    var = 0.25 * (e0 * (1 - e0) + e1 * (1 - e1)) / mc_size
    return BayesRiskEstimate(risk, float(np.sqrt(var)), mc_size)


def estimate_bayes_risk(spec: ExampleSpec, mc_size: int, seed: int) -> BayesRiskEstimate:
    """Monte-Carlo risk of the exact density-ratio rule under equal priors.

    Ties go to class 0, matching the rule's argmax with smallest-index
    preference; they occur with probability zero here.
    """
    if mc_size < 1:
        raise ValueError("mc_size must be positive")
    s0, s1 = (
        int(c.generate_state(1, np.uint64)[0] >> 1)
        for c in np.random.SeedSequence(entropy=seed).spawn(2)
    )
    return _bayes_risk_core(
        lambda m, off: generate(spec, 0, m, s0 + off),
        lambda m, off: generate(spec, 1, m, s1 + off),
        lambda X: log_density(spec, 0, X),
        lambda X: log_density(spec, 1, X),
        mc_size,
    )


@dataclass(frozen=True)
class SeparabilityEstimate:
    """Plug-in estimates of the limiting separation constants."""

    xi_12: float
    tau_12: float
    tau_21: float
    mc_size: int
    std_errors: dict


_MC_CHUNK = 20_000


def _limit_h(draw_a, draw_b, spec, partition, mc_size, seed_a, seed_b):
    """Estimate of phi(mean over blocks of E gamma(block mean square diff)).

    One independent (U, V) pair per draw; returns the estimate and a
    delta-method standard error.
    """
    vals = np.empty(mc_size)
    done = 0
    while done < mc_size:
        m = min(_MC_CHUNK, mc_size - done)
        u = draw_a(m, seed_a + done)
        v = draw_b(m, seed_b + done)
        bm = block_means(np.square(u - v), partition)
        vals[done : done + m] = _GAMMA_FUNCS[spec.gamma](bm).mean(axis=1)
        done += m
    mean = float(vals.mean())
    se_inner = float(vals.std(ddof=1) / np.sqrt(mc_size))
    if spec.phi is Phi.SQRT:
        slope = 0.5 / np.sqrt(mean) if mean > 0 else 0.0
    else:
        slope = 1.0
    return float(phi_eval(spec.phi, mean)), slope * se_inner


def _separability_core(draw0, draw1, spec, partition, n1, n2, mc_size, seed):
    base = np.random.SeedSequence(entropy=seed)
    s = [int(c.generate_state(1, np.uint64)[0] >> 1) for c in base.spawn(6)]
    h11, se11 = _limit_h(draw0, draw0, spec, partition, mc_size, s[0], s[1])
    h22, se22 = _limit_h(draw1, draw1, spec, partition, mc_size, s[2], s[3])
    h12, se12 = _limit_h(draw0, draw1, spec, partition, mc_size, s[4], s[5])

    n = n1 + n2
    w1, w2 = n1 / (n - 1), (n2 - 1) / (n - 1)
    v1, v2 = (n1 - 1) / (n - 1), n2 / (n - 1)
    a, b = h12 - h11, h12 - h22
    xi = h12 - 0.5 * (h11 + h22)
    tau12 = w1 * abs(a) + w2 * abs(b)
    tau21 = v1 * abs(a) + v2 * abs(b)

    sa, sb = np.sign(a), np.sign(b)
    se_xi = float(np.sqrt(se12**2 + 0.25 * se11**2 + 0.25 * se22**2))

    def se_tau(wa, wb):
        return float(
            np.sqrt(
                (wa * sa + wb * sb) ** 2 * se12**2 + (wa * sa) ** 2 * se11**2 + (wb * sb) ** 2 * se22**2
            )
        )

    return SeparabilityEstimate(
        xi_12=float(xi),
        tau_12=float(tau12),
        tau_21=float(tau21),
        mc_size=mc_size,
        std_errors={
            "xi_12": se_xi,
            "tau_12": se_tau(w1, w2),
            "tau_21": se_tau(v1, v2),
            "h_11": se11,
            "h_22": se22,
            "h_12": se12,
        },
    )


def estimate_separability(
    spec: ExampleSpec,
    dissim: DissimilaritySpec,
    partition: BlockPartition,
    n1: int,
    n2: int,
    mc_size: int,
    seed: int,
) -> SeparabilityEstimate:
    """Monte-Carlo plug-in estimates of the separation constants.

    ``n1``/``n2`` enter through the finite-sample fractions of the
    nearest-neighbor constant; draws are independent across the three
    limiting dissimilarities.
    """
    if partition.dim != spec.d:
        raise ValueError(f"partition covers {partition.dim} coordinates, example has {spec.d}")
    if min(n1, n2) < 2:
        raise ValueError("class sizes must be at least 2")
    if mc_size < 2:
        raise ValueError("mc_size must be at least 2")

    def drawer(class_j):
        return lambda count, sub_seed: generate(spec, class_j, count, sub_seed)

    return _separability_core(drawer(0), drawer(1), dissim, partition, n1, n2, mc_size, seed)
