"""
Earth mover's covariance, variance and correlation.

The empirical covariance is the optimal transport cost between the joint
empirical measure (mass 1/n at each observed pair) and the product of its
marginals (mass 1/n**2 at each grid pair), under the sum metric on pairs.
Masses are integerized (times n**2, or n**3 for triples, or the common
denominator for rational joints) so the transport solver works on exact
integers.

Coincident atoms are merged by exact value equality, never by tolerance.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import baselines as bl
from .errors import UndefinedCorrelationError
from .metric import MetricSpec, as_points, cross_matrix, pairwise_matrix
from .transport import MAX_CELLS, ProblemTooLarge, TransportPlan, TransportProblem, solve_transport
from .univariate import cdf_l1_distance, gini_mean_difference

__all__ = [
    "PairedSample",
    "DiscreteJoint",
    "BernoulliPair",
    "DependenceReport",
    "build_product_measure",
    "solve_ecov",
    "empirical_ecov",
    "empirical_evar",
    "empirical_ecor",
    "discrete_ecov_exact",
    "bernoulli_ecor_closed_form",
    "ecov_lower_bound_remark2",
    "conditional_coupling_ecov",
    "gaussian_ecor_bounds",
    "normal_evar",
    "trivariate_ecov",
    "trivariate_ecor",
    "dependence_report",
]


@dataclass(eq=False)
class PairedSample:
    """Aligned observations ``(x_i, y_i)`` or ``(x_i, y_i, z_i)``.

    Each margin carries its own metric; points are stored in the
    normalized form of :func:`emcor.metric.as_points`.
    """

    x: np.ndarray
    y: np.ndarray
    metric_x: MetricSpec = None
    metric_y: MetricSpec = None
    z: np.ndarray | None = None
    metric_z: MetricSpec | None = None

    def __post_init__(self):
        self.metric_x = self.metric_x or MetricSpec.euclidean()
        self.metric_y = self.metric_y or MetricSpec.euclidean()
        self.x = as_points(self.metric_x, self.x)
        self.y = as_points(self.metric_y, self.y)
        if self.z is not None:
            self.metric_z = self.metric_z or MetricSpec.euclidean()
            self.z = as_points(self.metric_z, self.z)
        sizes = {len(m) for m in self.margins()}
        if len(sizes) != 1:
            raise ValueError(f"margins have different lengths: {sorted(sizes)}")

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def trivariate(self) -> bool:
        return self.z is not None

    def margins(self):
        out = [self.x, self.y]
        if self.z is not None:
            out.append(self.z)
        return out

    def metrics(self):
        out = [self.metric_x, self.metric_y]
        if self.z is not None:
            out.append(self.metric_z)
        return out

    def with_y(self, y) -> PairedSample:
        return PairedSample(self.x, y, self.metric_x, self.metric_y, self.z, self.metric_z)


def _unique(pts: np.ndarray):
    if pts.ndim == 1:
        return np.unique(pts, return_inverse=True, return_counts=True)
    u, inv, counts = np.unique(pts, axis=0, return_inverse=True, return_counts=True)
    return u, inv.reshape(-1), counts


def _joint_product_problem(
    dists: Sequence[np.ndarray],
    joint_idx: np.ndarray,
    joint_mass: np.ndarray,
    product_mass: np.ndarray,
    scale: float,
    max_cells: int,
) -> TransportProblem:
    """Transport from joint atoms to the full grid of product atoms.

    ``dists[m]`` is the distance matrix among the distinct points of margin
    ``m``; ``joint_idx[s]`` holds the per-margin point indices of joint atom
    ``s``; ``product_mass`` has one axis per margin.
    """
    S = len(joint_idx)
    D = product_mass.size
    if S * D > max_cells:
        raise ProblemTooLarge(f"{S}x{D} transport exceeds {max_cells} cells")
    cost = np.zeros((S,) + product_mass.shape)
    k = len(dists)
    for m, d in enumerate(dists):
        shape = [S] + [1] * k
        shape[m + 1] = d.shape[0]
        cost = cost + d[joint_idx[:, m]].reshape(shape)
    keep = product_mass.reshape(-1) > 0
    return TransportProblem(
        joint_mass, product_mass.reshape(-1)[keep], cost.reshape(S, D)[:, keep], scale
    )


def build_product_measure(s: PairedSample, max_cells: int = MAX_CELLS) -> TransportProblem:
    """Integer transport problem: joint empirical measure vs product measure.

    Joint atoms get mass ``count * n**(k-1)`` and product atoms
    ``prod of marginal counts`` for ``k`` margins; the scale is ``n**k``.
    """
    n = s.n
    if n < 2:
        raise ValueError("need at least two observations")
    uniq = [_unique(p) for p in s.margins()]
    dists = [pairwise_matrix(m, u) for m, (u, _, _) in zip(s.metrics(), uniq)]
    codes = np.stack([inv for _, inv, _ in uniq], axis=1)
    joint_idx, joint_counts = np.unique(codes, axis=0, return_counts=True)
    k = len(uniq)
    product = uniq[0][2].astype(np.int64)
    for _, _, counts in uniq[1:]:
        product = np.multiply.outer(product, counts.astype(np.int64))
    return _joint_product_problem(
        dists, joint_idx, joint_counts * n ** (k - 1), product, float(n**k), max_cells
    )


def solve_ecov(s: PairedSample, max_cells: int = MAX_CELLS) -> tuple[float, TransportPlan, TransportProblem]:
    """Empirical covariance together with the optimal plan and its problem."""
    p = build_product_measure(s, max_cells)
    plan = solve_transport(p, max_cells)
    return max(plan.total_cost, 0.0), plan, p


def empirical_ecov(s: PairedSample) -> float:
    """Earth mover's covariance of a bivariate (or trivariate) sample."""
    return solve_ecov(s)[0]


def empirical_evar(pts, m: MetricSpec | None = None) -> float:
    """Mean of all n**2 pairwise distances (Gini's mean difference)."""
    m = m or MetricSpec.euclidean()
    pts = as_points(m, pts)
    if len(pts) < 2:
        raise ValueError("need at least two observations")
    if m.kind in ("euclidean", "manhattan") and pts.shape[1] == 1:
        return gini_mean_difference(pts[:, 0])
    return float(pairwise_matrix(m, pts).mean())


def _ratio(ecov: float, evars: Sequence[float]) -> float:
    denom = min(evars)
    if denom <= 0:
        raise UndefinedCorrelationError("eCor undefined: degenerate margin")
    return ecov / denom


def empirical_ecor(s: PairedSample) -> float:
    """``eCov / min(eVar_x, eVar_y)``; undefined for a constant margin."""
    evars = [empirical_evar(p, m) for p, m in zip(s.margins(), s.metrics())]
    if min(evars) <= 0:
        raise UndefinedCorrelationError("eCor undefined: degenerate margin")
    return _ratio(empirical_ecov(s), evars)


def trivariate_ecov(s: PairedSample) -> float:
    if not s.trivariate:
        raise ValueError("sample has no z margin")
    return empirical_ecov(s)


def trivariate_ecor(s: PairedSample) -> float:
    """``eCov(X, Y, Z) / min of the three eVars``; not bounded by 1."""
    if not s.trivariate:
        raise ValueError("sample has no z margin")
    return empirical_ecor(s)


@dataclass(eq=False)
class DiscreteJoint:
    """Finite-support joint law with exact rational atom masses."""

    atoms: list
    metric_x: MetricSpec = None
    metric_y: MetricSpec = None

    def __post_init__(self):
        self.metric_x = self.metric_x or MetricSpec.euclidean()
        self.metric_y = self.metric_y or MetricSpec.euclidean()
        if not self.atoms:
            raise ValueError("joint law needs at least one atom")
        atoms = [(x, y, Fraction(w)) for x, y, w in self.atoms]
        if any(w <= 0 for _, _, w in atoms):
            raise ValueError("atom masses must be positive")
        total = sum(w for _, _, w in atoms)
        if total != 1:
            raise ValueError(f"atom masses sum to {total}, not 1")
        self.atoms = atoms

    def _indexed(self):
        xs = as_points(self.metric_x, [_point(a[0]) for a in self.atoms])
        ys = as_points(self.metric_y, [_point(a[1]) for a in self.atoms])
        ux, ix, _ = _unique(xs)
        uy, iy, _ = _unique(ys)
        joint: dict[tuple[int, int], Fraction] = {}
        for a, b, (_, _, w) in zip(ix, iy, self.atoms):
            joint[int(a), int(b)] = joint.get((int(a), int(b)), Fraction(0)) + w
        px = [Fraction(0)] * len(ux)
        py = [Fraction(0)] * len(uy)
        for (a, b), w in joint.items():
            px[a] += w
            py[b] += w
        return ux, uy, joint, px, py


def _point(p):
    return np.atleast_1d(np.asarray(p))


def discrete_ecov_exact(j: DiscreteJoint, max_cells: int = MAX_CELLS) -> float:
    """Covariance of a rational joint law, solved with integerized masses."""
    ux, uy, joint, px, py = j._indexed()
    product = [[a * b for b in py] for a in px]
    dens = [w.denominator for w in joint.values()]
    dens += [w.denominator for row in product for w in row]
    scale = math.lcm(*dens)
    keys = sorted(joint)
    p = _joint_product_problem(
        [pairwise_matrix(j.metric_x, ux), pairwise_matrix(j.metric_y, uy)],
        np.array(keys, dtype=np.intp),
        np.array([int(joint[k] * scale) for k in keys], dtype=np.int64),
        np.array([[int(w * scale) for w in row] for row in product], dtype=np.int64),
        float(scale),
        max_cells,
    )
    return max(solve_transport(p, max_cells).total_cost, 0.0)


@dataclass(frozen=True)
class BernoulliPair:
    """Two indicators with P(X=1), P(Y=1) and P(X=Y=1)."""

    p_x: Fraction
    p_y: Fraction
    p_xy: Fraction

    def __post_init__(self):
        for name in ("p_x", "p_y", "p_xy"):
            v = Fraction(getattr(self, name))
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
            object.__setattr__(self, name, v)
        lo = max(Fraction(0), self.p_x + self.p_y - 1)
        hi = min(self.p_x, self.p_y)
        if not lo <= self.p_xy <= hi:
            raise ValueError(f"p_xy={self.p_xy} outside the Frechet bounds [{lo}, {hi}]")

    def to_joint(self) -> DiscreteJoint:
        cells = {
            (1, 1): self.p_xy,
            (1, 0): self.p_x - self.p_xy,
            (0, 1): self.p_y - self.p_xy,
            (0, 0): 1 - self.p_x - self.p_y + self.p_xy,
        }
        return DiscreteJoint([(x, y, w) for (x, y), w in cells.items() if w > 0])


def bernoulli_ecor_closed_form(b: BernoulliPair) -> tuple[Fraction, Fraction]:
    """Exact ``(eCov, eCor)`` for a pair of indicators."""
    gap = abs(b.p_xy - b.p_x * b.p_y)
    denom = min(b.p_x * (1 - b.p_x), b.p_y * (1 - b.p_y))
    if denom == 0:
        raise UndefinedCorrelationError("eCor undefined: degenerate margin")
    return 2 * gap, gap / denom


def ecov_lower_bound_remark2(s: PairedSample) -> float:
    """``|mean d(x_i, y_i) - mean d(x_i, y_j)|``, a lower bound on eCov.

    Both margins must live in the same metric space.
    """
    if not s.metric_x.compatible(s.metric_y):
        raise ValueError("lower bound needs both margins in one metric space")
    if s.n < 2:
        raise ValueError("need at least two observations")
    d = cross_matrix(s.metric_x, s.x, s.y)
    return abs(math.fsum(np.diag(d)) / s.n - math.fsum(d.ravel()) / s.n**2)


def _is_real_margin(m: MetricSpec, pts: np.ndarray) -> bool:
    return m.kind in ("euclidean", "manhattan") and pts.ndim == 2 and pts.shape[1] == 1


def conditional_coupling_ecov(s: PairedSample | DiscreteJoint) -> float:
    """``sum_x P(x) * integral |G(y|x) - G(y)| dy``, an upper bound on eCov.

    This is the cost of the coupling that keeps ``X' = X`` and moves each
    conditional law of ``Y`` onto the marginal by its quantile map.
    """
    if isinstance(s, DiscreteJoint):
        ux, uy, joint, px, py = s._indexed()
        if not _is_real_margin(s.metric_y, uy):
            raise ValueError("conditional coupling needs a real-valued y margin")
        yv = uy[:, 0]
        total = 0.0
        for a, wa in enumerate(px):
            cond = np.array([float(joint.get((a, b), 0)) for b in range(len(uy))])
            total += float(wa) * cdf_l1_distance(yv, cond, yv, np.array(py, dtype=float))
        return total
    if not _is_real_margin(s.metric_y, s.y):
        raise ValueError("conditional coupling needs a real-valued y margin")
    y = s.y[:, 0]
    _, groups, counts = _unique(s.x)
    ones = np.ones(s.n)
    total = 0.0
    for g, count in enumerate(counts):
        sub = y[groups == g]
        total += count / s.n * cdf_l1_distance(sub, np.ones(len(sub)), y, ones)
    return float(total)


def normal_evar(sigma: float) -> float:
    """eVar of a normal margin with standard deviation ``sigma``."""
    return 2.0 * sigma / math.sqrt(math.pi)


def gaussian_ecor_bounds(rho: float, sigma_x: float = 1.0, sigma_y: float = 1.0) -> tuple[float, float]:
    """``(upper, lower)`` bounds on eCor of a bivariate normal.

    The lower bound is only known for equal variances; otherwise it is 0.
    """
    if not -1 <= rho <= 1:
        raise ValueError("rho must lie in [-1, 1]")
    if sigma_x <= 0 or sigma_y <= 0:
        raise ValueError("standard deviations must be positive")
    upper = math.sqrt(1.0 - math.sqrt(1.0 - rho * rho))
    lower = abs(1.0 - math.sqrt(1.0 - rho)) if sigma_x == sigma_y else 0.0
    return upper, lower


@dataclass
class DependenceReport:
    ecov: float
    evar_x: float
    evar_y: float
    ecor: float
    lower_bound_remark2: float | None
    upper_bound_theorem2: float
    conditional_upper_bound: float | None
    dcor: float | None
    pearson: float | None
    n: int
    supply_nodes: int
    demand_nodes: int
    arcs: int
    augmentations: int
    solve_seconds: float | None = None

    def to_dict(self, timings: bool = False) -> dict:
        out = asdict(self)
        if not timings:
            out.pop("solve_seconds")
        return out


def dependence_report(s: PairedSample, baselines: bool = True) -> DependenceReport:
    """Everything we know how to compute about one bivariate sample."""
    if s.trivariate:
        raise ValueError("dependence_report is bivariate; use trivariate_ecor")
    evar_x = empirical_evar(s.x, s.metric_x)
    evar_y = empirical_evar(s.y, s.metric_y)
    t0 = time.perf_counter()
    ecov, plan, problem = solve_ecov(s)
    seconds = time.perf_counter() - t0
    ecor = _ratio(ecov, [evar_x, evar_y])

    lower = ecov_lower_bound_remark2(s) if s.metric_x.compatible(s.metric_y) and (
        not s.metric_x.is_coordinate or s.x.shape[1] == s.y.shape[1]
    ) else None
    cond = conditional_coupling_ecov(s) if _is_real_margin(s.metric_y, s.y) else None
    dcor = pearson = None
    if baselines:
        try:
            dcor = bl.distance_correlation(s)
        except UndefinedCorrelationError:
            dcor = None
        if _is_real_margin(s.metric_x, s.x) and _is_real_margin(s.metric_y, s.y):
            pearson = bl.pearson_correlation(s.x[:, 0], s.y[:, 0])
    S, D = problem.shape
    return DependenceReport(
        ecov=ecov,
        evar_x=evar_x,
        evar_y=evar_y,
        ecor=ecor,
        lower_bound_remark2=lower,
        upper_bound_theorem2=min(evar_x, evar_y),
        conditional_upper_bound=cond,
        dcor=dcor,
        pearson=pearson,
        n=s.n,
        supply_nodes=S,
        demand_nodes=D,
        arcs=S * D,
        augmentations=plan.augmentations,
        solve_seconds=seconds,
    )
