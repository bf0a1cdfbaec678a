"""
Permutation independence test on the empirical earth mover's covariance,
and seeded Monte Carlo checks for the Gaussian bounds and the unit-cube
mean distance.

Every replicate draws from its own random stream, spawned by counter from
the master seed, so results do not depend on how replicates are scheduled.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dependence import (
    PairedSample,
    empirical_ecor,
    empirical_ecov,
    empirical_evar,
    gaussian_ecor_bounds,
)
from .errors import UndefinedCorrelationError
from .univariate import cube_evar_bounds, cube_evar_erf_integral

MIN_PERMUTATIONS = 19
_SEED_MASK = (1 << 64) - 1


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for replicate ``index`` of a run seeded by ``seed``."""
    ss = np.random.SeedSequence(int(seed) & _SEED_MASK, spawn_key=(int(index),))
    return np.random.default_rng(ss)


@dataclass
class TestResult:
    __test__ = False

    observed_statistic: float
    permutations: int
    p_value: float
    seed: int
    replicates: list[float] | None = None

    def to_dict(self) -> dict:
        out = {
            "observed_statistic": self.observed_statistic,
            "permutations": self.permutations,
            "p_value": self.p_value,
            "seed": self.seed,
        }
        if self.replicates is not None:
            out["replicates"] = list(self.replicates)
        return out


def _permuted_stats(s: PairedSample, seed: int, indices) -> list[float]:
    out = []
    for b in indices:
        perm = replicate_rng(seed, b).permutation(s.n)
        out.append(empirical_ecov(s.with_y(s.y[perm])))
    return out


def p_value(observed: float, permuted) -> float:
    """Add-one permutation p-value; ties within round-off count as exceedances."""
    permuted = np.asarray(permuted, dtype=float)
    tol = 1e-12 * max(1.0, abs(observed))
    hits = int(np.sum(permuted >= observed - tol))
    return (1 + hits) / (len(permuted) + 1)


def permutation_test_ecov(
    s: PairedSample,
    permutations: int = 199,
    seed: int = 0,
    workers: int = 1,
    keep_replicates: bool = False,
) -> TestResult:
    """Test independence of the x and y margins by permuting y.

    With ``workers > 1`` replicates are spread over processes; the result is
    identical to the sequential one.
    """
    if s.n < 4:
        raise ValueError("permutation test needs n >= 4")
    if permutations < MIN_PERMUTATIONS:
        raise ValueError(f"need at least {MIN_PERMUTATIONS} permutations")
    if min(empirical_evar(s.x, s.metric_x), empirical_evar(s.y, s.metric_y)) <= 0:
        raise UndefinedCorrelationError("independence test undefined: degenerate margin")
    observed = empirical_ecov(s)
    if workers > 1:
        chunks = [range(w, permutations, workers) for w in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_permuted_stats, [s] * workers, [seed] * workers, chunks))
        stats = [0.0] * permutations
        for chunk, values in zip(chunks, parts):
            for b, v in zip(chunk, values):
                stats[b] = v
    else:
        stats = _permuted_stats(s, seed, range(permutations))
    return TestResult(
        observed_statistic=observed,
        permutations=permutations,
        p_value=p_value(observed, stats),
        seed=seed,
        replicates=stats if keep_replicates else None,
    )


def bivariate_normal(rng, n, rho, sigma_x=1.0, sigma_y=1.0):
    z = rng.standard_normal((2, n))
    x = sigma_x * z[0]
    y = sigma_y * (rho * z[0] + math.sqrt(1.0 - rho * rho) * z[1])
    return x, y


@dataclass
class GaussianSummary:
    rho: float
    n: int
    mean: float
    q05: float
    median: float
    q95: float
    upper_bound: float
    lower_bound: float
    values: list[float] = field(repr=False, default_factory=list)


def mc_validate_gaussian(
    rho: float,
    n: int = 30,
    replicates: int = 50,
    seed: int = 0,
    sigma_x: float = 1.0,
    sigma_y: float = 1.0,
) -> GaussianSummary:
    """Empirical eCor over simulated bivariate normal samples."""
    if not -1 < rho < 1:
        raise ValueError("rho must lie strictly inside (-1, 1)")
    if n < 10:
        raise ValueError("need n >= 10")
    if replicates < 1:
        raise ValueError("need at least one replicate")
    values = []
    for b in range(replicates):
        x, y = bivariate_normal(replicate_rng(seed, b), n, rho, sigma_x, sigma_y)
        values.append(empirical_ecor(PairedSample(x, y)))
    upper, lower = gaussian_ecor_bounds(rho, sigma_x, sigma_y)
    q05, median, q95 = np.quantile(values, [0.05, 0.5, 0.95])
    return GaussianSummary(
        rho=rho,
        n=n,
        mean=float(np.mean(values)),
        q05=float(q05),
        median=float(median),
        q95=float(q95),
        upper_bound=upper,
        lower_bound=lower,
        values=values,
    )


@dataclass
class CubeEstimate:
    n_dim: int
    draws: int
    estimate: float
    stderr: float
    quadrature: float
    lower_bound: float
    upper_bound: float


def mc_validate_cube(n_dim: int, draws: int = 10**6, seed: int = 0, chunk: int = 250_000) -> CubeEstimate:
    """Monte Carlo mean distance between uniform points of the unit cube."""
    if n_dim < 1:
        raise ValueError("n_dim must be >= 1")
    if draws < 10**4:
        raise ValueError("need at least 10**4 draws")
    total = 0.0
    total_sq = 0.0
    for b, start in enumerate(range(0, draws, chunk)):
        m = min(chunk, draws - start)
        rng = replicate_rng(seed, b)
        d = np.linalg.norm(rng.random((m, n_dim)) - rng.random((m, n_dim)), axis=1)
        total += math.fsum(d)
        total_sq += math.fsum(d * d)
    mean = total / draws
    var = max(total_sq / draws - mean * mean, 0.0) * draws / (draws - 1)
    lo, hi = cube_evar_bounds(n_dim)
    return CubeEstimate(
        n_dim=n_dim,
        draws=draws,
        estimate=mean,
        stderr=math.sqrt(var / draws),
        quadrature=cube_evar_erf_integral(n_dim),
        lower_bound=lo,
        upper_bound=hi,
    )
