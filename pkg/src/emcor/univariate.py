"""
Closed forms for real-valued samples.

Everything here works on step-function CDFs exactly: the 1-D earth mover
distance through sorted samples or the integral of ``|F - G|``, Gini's
mean difference through the sorted-rank identity, and the ``2 F (1 - F)``
integral.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from scipy import integrate, special

from .metric import MetricSpec, as_points, cross_matrix
from .transport import TransportProblem, solve_transport


def _real_sample(xs, name="sample") -> np.ndarray:
    arr = np.asarray(xs, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite values")
    return arr


def quantile_inverse(sorted_sample, u: float) -> float:
    """Generalized inverse ``sup{t : F(t) <= u}`` of the empirical CDF."""
    xs = _real_sample(sorted_sample)
    if np.any(np.diff(xs) < 0):
        raise ValueError("sample must be sorted")
    if not 0 <= u < 1:
        raise ValueError("u must lie in [0, 1)")
    # F(t) <= u holds up to the (floor(n u) + 1)-th order statistic.
    return float(xs[math.floor(Fraction(u) * len(xs))])


def cdf_l1_distance(a, wa, b, wb) -> float:
    """``integral |F - G| dt`` for two weighted discrete distributions.

    Weights are normalized separately; both CDFs are step functions so the
    integral is a finite sum over the merged support.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    wa = np.asarray(wa, dtype=float)
    wb = np.asarray(wb, dtype=float)
    oa, ob = np.argsort(a, kind="stable"), np.argsort(b, kind="stable")
    a, wa = a[oa], np.cumsum(wa[oa]) / wa.sum()
    b, wb = b[ob], np.cumsum(wb[ob]) / wb.sum()
    grid = np.union1d(a, b)
    if grid.size < 2:
        return 0.0
    ia = np.searchsorted(a, grid[:-1], side="right")
    ib = np.searchsorted(b, grid[:-1], side="right")
    fa = np.where(ia > 0, wa[np.maximum(ia - 1, 0)], 0.0)
    fb = np.where(ib > 0, wb[np.maximum(ib - 1, 0)], 0.0)
    return float(np.sum(np.abs(fa - fb) * np.diff(grid)))


def wasserstein_1d(xs, ys) -> float:
    """Earth mover distance between two empirical distributions on the line."""
    x = _real_sample(xs, "xs")
    y = _real_sample(ys, "ys")
    if len(x) == len(y):
        return float(np.mean(np.abs(np.sort(x) - np.sort(y))))
    return cdf_l1_distance(x, np.ones(len(x)), y, np.ones(len(y)))


def gini_mean_difference(xs) -> float:
    """Average ``|x_i - x_j|`` over all n**2 ordered pairs, in O(n log n)."""
    x = np.sort(_real_sample(xs))
    n = len(x)
    ranks = 2 * np.arange(1, n + 1) - n - 1
    return max(2.0 * math.fsum(ranks * x) / n**2, 0.0)


def gini_mean_difference_pairwise(xs) -> float:
    """The O(n**2) definition; kept as an independent check."""
    x = _real_sample(xs)
    return float(np.abs(x[:, None] - x[None, :]).mean())


def evar_cdf_integral(xs) -> float:
    """``2 * integral F (1 - F)`` for the empirical CDF."""
    x = np.sort(_real_sample(xs))
    n = len(x)
    f = np.arange(1, n) / n
    return 2.0 * math.fsum(f * (1 - f) * np.diff(x))


def _series_deficit(u):
    # 1 - h(u) for small u, where
    # h(u) = sqrt(pi) erf(u) / u - (1 - exp(-u^2)) / u^2.
    total = np.zeros_like(u)
    u2 = u * u
    term = np.ones_like(u)
    for k in range(1, 14):
        term = term * u2
        a_k = 2.0 / (math.factorial(k) * (2 * k + 1)) - 1.0 / math.factorial(k + 1)
        total += (-1) ** (k + 1) * a_k * term
    return total


def _bracket_deficit(u):
    u = np.asarray(u, dtype=float)
    small = u < 0.5
    out = np.empty_like(u)
    out[small] = _series_deficit(u[small])
    v = u[~small]
    out[~small] = 1.0 - (
        math.sqrt(math.pi) * special.erf(v) / v - (-np.expm1(-v * v)) / (v * v)
    )
    return out


def _cube_integrand(u, n):
    # (1 - h^n) / u^2, continuous at u = 0 with limit n / 6.
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.empty_like(u)
    zero = u == 0
    out[zero] = n / 6.0
    q = _bracket_deficit(u[~zero])
    out[~zero] = -np.expm1(n * np.log1p(-q)) / u[~zero] ** 2
    return out


def cube_evar_erf_integral(n: int, rtol: float = 1e-10) -> float:
    """Mean distance between two uniform points of the unit n-cube.

    Integrates ``(1/sqrt(pi)) * int_0^inf (1 - h(u)^n) du / u^2``. The
    range ``[1, inf)`` is mapped onto ``(0, 1]`` by ``u = 1/t``, which
    turns the ``1/u^2`` tail into a bounded integrand.
    """
    if int(n) != n or n < 1:
        raise ValueError("dimension must be a positive integer")
    n = int(n)
    head, err_head = integrate.quad(
        lambda u: _cube_integrand(u, n)[0], 0.0, 1.0,
        epsabs=0.0, epsrel=rtol, limit=200,
    )

    def tail_integrand(t):
        if t == 0.0:
            return 1.0
        q = _bracket_deficit(np.array([1.0 / t]))[0]
        return -math.expm1(n * math.log1p(-q))

    tail, err_tail = integrate.quad(
        tail_integrand, 0.0, 1.0, epsabs=0.0, epsrel=rtol, limit=200
    )
    value = (head + tail) / math.sqrt(math.pi)
    err = (err_head + err_tail) / math.sqrt(math.pi)
    if not math.isfinite(value) or err > 1e-8 * abs(value):
        raise ArithmeticError(f"quadrature did not converge (error estimate {err:g})")
    return value


def cube_evar_bounds(n: int) -> tuple[float, float]:
    """``(sqrt(n)/3, sqrt(n/6))``."""
    return math.sqrt(n) / 3.0, math.sqrt(n / 6.0)


def sequence_emd(xs, ys, m: MetricSpec | None = None) -> float:
    """``min over permutations pi of sum_i d(x_i, y_pi(i))``.

    Scalar samples use the sorted formula; anything else solves the
    unit-mass assignment with the transport solver.
    """
    m = MetricSpec.euclidean() if m is None else m
    x = as_points(m, xs)
    y = as_points(m, ys)
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) == 0:
        return 0.0
    if m.kind in ("euclidean", "manhattan") and x.shape[1] == 1 and y.shape[1] == 1:
        return math.fsum(np.abs(np.sort(x[:, 0]) - np.sort(y[:, 0])))
    ones = np.ones(len(x), dtype=np.int64)
    plan = solve_transport(TransportProblem(ones, ones, cross_matrix(m, x, y)))
    return plan.total_cost


def sequence_emd_bruteforce(xs, ys, m: MetricSpec | None = None) -> float:
    """Exhaustive minimum over all permutations; only for small n."""
    m = MetricSpec.euclidean() if m is None else m
    d = cross_matrix(m, xs, ys)
    n = d.shape[0]
    if d.shape != (n, n):
        raise ValueError("length mismatch")
    if n > 8:
        raise ValueError("too many points for permutation enumeration")
    rows = np.arange(n)
    return min(
        math.fsum(d[rows, list(perm)]) for perm in itertools.permutations(range(n))
    )
