"""
Seeded self-check suite behind ``emcor validate``.

Each check reproduces one known value, identity or bound and reports
pass/fail with the worst observed deviation. By default the expensive
checks run at reduced size; ``full=True`` uses the acceptance sizes.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .baselines import distance_correlation, distance_covariance
from .dependence import (
    BernoulliPair,
    PairedSample,
    bernoulli_ecor_closed_form,
    build_product_measure,
    conditional_coupling_ecov,
    discrete_ecov_exact,
    ecov_lower_bound_remark2,
    empirical_ecor,
    empirical_ecov,
    empirical_evar,
)
from .inference import mc_validate_cube, mc_validate_gaussian, permutation_test_ecov, replicate_rng
from .metric import MetricSpec, Similarity, apply_similarity
from .transport import TransportProblem, brute_force_transport, solve_transport
from .univariate import (
    cube_evar_bounds,
    cube_evar_erf_integral,
    evar_cdf_integral,
    gini_mean_difference,
    gini_mean_difference_pairwise,
    wasserstein_1d,
)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _four_point(seed, full):
    s = PairedSample([1, 2, 3, 4], [4, 2, 3, 1])
    t0 = time.perf_counter()
    ecov = empirical_ecov(s)
    ecor = empirical_ecor(s)
    elapsed = time.perf_counter() - t0
    ex, ey = empirical_evar(s.x), empirical_evar(s.y)
    dev = max(abs(ecov - 1.0), abs(ex - 1.25), abs(ey - 1.25), abs(ecor - 0.8))
    return dev <= 1e-9 and elapsed < 1.0, f"max dev {dev:.2e}, {elapsed:.3f}s"


def bernoulli_grid(steps: int = 10):
    """Valid (p_x, p_y, p_xy) triples on a rational grid, both margins nondegenerate."""
    grid = [Fraction(i, steps) for i in range(1, steps)]
    out = []
    for px, py in itertools.product(grid, grid):
        lo = max(Fraction(0), px + py - 1)
        hi = min(px, py)
        out.extend(BernoulliPair(px, py, lo + (hi - lo) * j / 4) for j in range(5))
    return out


def _bernoulli(seed, full):
    rng = np.random.default_rng(seed)
    triples = bernoulli_grid(5 if not full else 10)
    if not full:
        triples = [triples[i] for i in rng.choice(len(triples), 50, replace=False)]
    worst = 0.0
    for b in triples:
        ecov, ecor = bernoulli_ecor_closed_form(b)
        solved = discrete_ecov_exact(b.to_joint())
        denom = 2 * min(b.p_x * (1 - b.p_x), b.p_y * (1 - b.p_y))
        worst = max(worst, abs(solved - float(ecov)), abs(solved / float(denom) - float(ecor)))
    return worst <= 1e-9, f"{len(triples)} triples, max dev {worst:.2e}"


def _gini(seed, full):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        x = rng.normal(size=rng.integers(1, 201)) * rng.uniform(0.1, 10)
        a, b, c = gini_mean_difference(x), gini_mean_difference_pairwise(x), evar_cdf_integral(x)
        worst = max(worst, abs(a - b), abs(a - c))
    return worst <= 1e-10, f"max dev {worst:.2e}"


def _self_pair(seed, full):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50 if full else 15):
        x = np.round(rng.normal(size=rng.integers(2, 31 if full else 16)), 1)
        s = PairedSample(x, x)
        worst = max(worst, abs(empirical_ecov(s) - empirical_evar(x)))
    return worst <= 1e-8, f"max dev {worst:.2e}"


def _random_sample(rng, n):
    kind = rng.integers(4)
    if kind == 0:
        x = rng.normal(size=n)
        return PairedSample(x, x + rng.normal(size=n))
    if kind == 1:
        return PairedSample(rng.integers(0, 3, n), rng.integers(0, 3, n))
    if kind == 2:
        return PairedSample(
            rng.normal(size=(n, 2)), rng.normal(size=(n, 2)),
            MetricSpec.manhattan(2), MetricSpec.euclidean(2),
        )
    return PairedSample(
        rng.integers(0, 2, (n, 2)), rng.normal(size=n),
        MetricSpec.discrete(2), MetricSpec.euclidean(),
    )


def _bounds(seed, full):
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(200 if full else 40):
        s = _random_sample(rng, int(rng.integers(2, 26 if full else 13)))
        ecov = empirical_ecov(s)
        gap = ecov - min(empirical_evar(s.x, s.metric_x), empirical_evar(s.y, s.metric_y))
        if s.metric_x.compatible(s.metric_y) and s.x.shape[1:] == s.y.shape[1:]:
            gap = max(gap, ecov_lower_bound_remark2(s) - ecov)
        if s.metric_y.kind != "precomputed" and s.y.shape[1] == 1:
            gap = max(gap, ecov - conditional_coupling_ecov(s))
        worst = max(worst, gap)
    return worst <= 1e-9, f"worst violation {worst:.2e}"


def random_similarity(rng, dim):
    scale = float(rng.uniform(0.2, 5.0))
    if dim == 1:
        q = np.array([[rng.choice([-1.0, 1.0])]])
    else:
        a = rng.uniform(0, 2 * np.pi)
        q = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    return Similarity(scale, q, rng.normal(size=dim) * 3)


def _similarity(seed, full):
    rng = np.random.default_rng(seed)
    worst_inv = worst_one = 0.0
    for _ in range(50 if full else 12):
        dim = int(rng.integers(1, 3))
        n = int(rng.integers(3, 13))
        m = MetricSpec.euclidean(dim)
        x = rng.normal(size=(n, dim))
        y = x + rng.normal(size=(n, dim))
        f = random_similarity(rng, dim)
        base = empirical_ecor(PairedSample(x, y, m, m))
        moved = empirical_ecor(PairedSample(apply_similarity(f, m, x), apply_similarity(f, m, y), m, m))
        worst_inv = max(worst_inv, abs(base - moved))
        worst_one = max(worst_one, abs(empirical_ecor(PairedSample(x, apply_similarity(f, m, x), m, m)) - 1))
    ok = worst_inv <= 1e-9 and worst_one <= 1e-8
    return ok, f"invariance dev {worst_inv:.2e}, eCor(X,f(X)) dev {worst_one:.2e}"


def _oracle(seed, full):
    rng = np.random.default_rng(seed)
    worst = 0.0
    count = 0
    for n in (2, 3):
        for _ in range(10 if full else 3):
            s = PairedSample(rng.integers(0, 4, n), rng.integers(0, 4, n))
            p = build_product_measure(s)
            worst = max(worst, abs(solve_transport(p).total_cost - brute_force_transport(p)))
            count += 1
    for _ in range(100 if full else 25):
        S, D = rng.integers(1, 5, 2)
        total = int(rng.integers(max(S, D), 11))
        sup = _partition(rng, total, S)
        dem = _partition(rng, total, D)
        c = rng.integers(0, 10, (S, D)).astype(float)
        p = TransportProblem(sup, dem, c)
        worst = max(worst, abs(solve_transport(p).total_cost - brute_force_transport(p)))
        count += 1
    return worst == 0.0, f"{count} instances, max dev {worst:.2e}"


def _partition(rng, total, parts):
    cuts = np.sort(rng.choice(np.arange(1, total), parts - 1, replace=False)) if parts > 1 else []
    return np.diff(np.r_[0, cuts, total]).astype(int)


def _wasserstein(seed, full):
    rng = np.random.default_rng(seed)
    worst_eq = worst_neq = 0.0
    for _ in range(100 if full else 25):
        n = int(rng.integers(1, 15))
        x, y = rng.normal(size=n), rng.normal(size=n) + 1
        ones = np.ones(n, dtype=int)
        ref = solve_transport(TransportProblem(ones, ones, np.abs(x[:, None] - y[None, :]), n)).total_cost
        worst_eq = max(worst_eq, abs(wasserstein_1d(x, y) - ref))
    for _ in range(20 if full else 5):
        x = rng.integers(0, 50, rng.integers(1, 8)) / 10
        y = rng.integers(0, 50, rng.integers(1, 8)) / 10
        # Midpoint Riemann sum on a grid fine enough to hit every breakpoint.
        t = (np.arange(-10, 600) + 0.5) / 100
        fx = np.searchsorted(np.sort(x), t, side="right") / len(x)
        fy = np.searchsorted(np.sort(y), t, side="right") / len(y)
        riemann = float(np.sum(np.abs(fx - fy)) / 100)
        worst_neq = max(worst_neq, abs(wasserstein_1d(x, y) - riemann))
    ok = worst_eq <= 1e-9 and worst_neq <= 1e-8
    return ok, f"equal-size dev {worst_eq:.2e}, unequal dev {worst_neq:.2e}"


def _cube(seed, full):
    draws = 10**6 if full else 2 * 10**5
    one = cube_evar_erf_integral(1)
    parts = [f"n=1 {one:.9f}"]
    ok = abs(one - 1 / 3) <= 1e-6
    for n in (2, 3):
        est = mc_validate_cube(n, draws, seed)
        lo, hi = cube_evar_bounds(n)
        tol = 0.003 if full else 0.006
        ok &= abs(est.estimate - est.quadrature) <= tol and lo <= est.quadrature <= hi
        parts.append(f"n={n} quad {est.quadrature:.5f} mc {est.estimate:.5f}")
    return ok, ", ".join(parts)


def _gaussian(seed, full):
    reps = 50 if full else 10
    ok = True
    parts = []
    for rho in (0.3, 0.6, 0.9):
        g = mc_validate_gaussian(rho, 30, reps, seed)
        ok &= g.mean <= g.upper_bound + 0.15 and g.mean >= g.lower_bound - 0.15
        parts.append(f"rho={rho} mean {g.mean:.3f} in [{g.lower_bound - 0.15:.3f}, {g.upper_bound + 0.15:.3f}]")
    return ok, "; ".join(parts)


def _trivariate(seed, full):
    s = PairedSample([0, 1], [0, 1], z=[0, 1])
    ecov = empirical_ecov(s)
    ecor = empirical_ecor(s)
    g = np.array(list(itertools.product([0, 1], repeat=3)))
    grid = empirical_ecov(PairedSample(g[:, 0], g[:, 1], z=g[:, 2]))
    dev = max(abs(ecov - 0.75), abs(ecor - 1.5), abs(grid))
    return dev <= 1e-12, f"eCov {ecov}, eCor {ecor}, grid {grid}"


def _permutation(seed, full):
    x = np.arange(20.0)
    dep = permutation_test_ecov(PairedSample(x, x), 199, seed)
    runs = 200 if full else 40
    pvals = []
    for r in range(runs):
        rng = replicate_rng(seed, 10_000 + r)
        s = PairedSample(rng.normal(size=8), rng.normal(size=8))
        pvals.append(permutation_test_ecov(s, 39, seed + r).p_value)
    deciles = np.histogram(pvals, bins=np.linspace(0, 1, 11))[0]
    ok = dep.p_value <= 0.01 and (not full or np.all(deciles > 0))
    return ok, f"dependent p={dep.p_value:.4f}, decile counts {deciles.tolist()}"


def _baseline(seed, full):
    x = np.arange(10.0)
    dcor = distance_correlation(PairedSample(x, 2 * x + 3))
    dcov = distance_covariance(PairedSample([0, 1], [0, 1]))
    ok = abs(dcor - 1) <= 1e-9 and abs(dcov - 0.5) <= 1e-12
    return ok, f"dCor {dcor!r}, dCov {dcov!r}"


def _performance(seed, full):
    rng = np.random.default_rng(seed)
    parts = []
    ok = True
    for n, limit in ((50, 5.0), (100, 60.0)) if full else ((50, 5.0),):
        x = rng.normal(size=n)
        s = PairedSample(x, x + rng.normal(size=n))
        t0 = time.perf_counter()
        empirical_ecov(s)
        elapsed = time.perf_counter() - t0
        ok &= elapsed < limit
        parts.append(f"n={n} {elapsed:.2f}s (limit {limit:g}s)")
    return ok, ", ".join(parts)


CHECKS = [
    ("four-point", _four_point),
    ("bernoulli-closed-form", _bernoulli),
    ("gini-equivalence", _gini),
    ("evar-equals-gini", _self_pair),
    ("ecov-bounds", _bounds),
    ("similarity", _similarity),
    ("solver-vs-enumeration", _oracle),
    ("wasserstein-1d", _wasserstein),
    ("cube-evar", _cube),
    ("gaussian-bounds", _gaussian),
    ("trivariate", _trivariate),
    ("permutation-test", _permutation),
    ("distance-correlation", _baseline),
    ("performance", _performance),
]


def run_checks(seed: int = 0, full: bool = False, only=None) -> list[Check]:
    results = []
    for name, fn in CHECKS:
        if only and name not in only:
            continue
        t0 = time.perf_counter()
        try:
            passed, detail = fn(seed, full)
        except Exception as exc:  # a crashing check is a failed check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(Check(name, bool(passed), detail, time.perf_counter() - t0))
    return results


def format_table(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  result  detail"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {'PASS' if c.passed else 'FAIL':<6}  {c.detail}")
    return "\n".join(lines)
