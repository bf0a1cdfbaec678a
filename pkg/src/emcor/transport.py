"""
Exact solver for the balanced transportation problem.

Supplies and demands are positive integers, costs are nonnegative reals.
The main solver is successive shortest paths with node potentials: units
of the larger side are routed one source node at a time along a shortest
augmenting path (Dijkstra on reduced costs) to a node of the smaller side
with free capacity, pushing the full bottleneck each time.

Because one side of the problems we care about is much smaller than the
other (n joint atoms against n**2 product atoms), Dijkstra runs over the
small side only. A hop between two small-side nodes ``k -> k'`` means
"move a unit of some large-side node currently shipped to ``k`` over to
``k'``"; its cost ``min_r c[r, k'] - c[r, k]`` over the rows ``r`` shipped
to ``k`` does not depend on the potentials, so it is cached and refreshed
only for nodes whose support changes.

A naive cycle-canceling solver and an exhaustive enumerator are kept for
cross-checks.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

MAX_CELLS = 10**7
MAX_BRUTE_FORCE_UNITS = 10
OPT_TOL = 1e-9


class TransportError(ValueError):
    """Malformed or unsupported transportation problem."""


class ProblemTooLarge(TransportError):
    pass


@dataclass(eq=False)
class TransportProblem:
    """Balanced transportation problem.

    ``scale`` is the integerization factor of the masses: the plan's
    ``total_cost`` is the raw cost divided by it.
    """

    supplies: np.ndarray
    demands: np.ndarray
    costs: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        self.supplies = _as_masses(self.supplies, "supplies")
        self.demands = _as_masses(self.demands, "demands")
        self.costs = np.asarray(self.costs, dtype=float)
        if self.costs.shape != (len(self.supplies), len(self.demands)):
            raise TransportError(
                f"cost matrix is {self.costs.shape}, expected "
                f"{(len(self.supplies), len(self.demands))}"
            )
        if not np.all(np.isfinite(self.costs)):
            raise TransportError("costs must be finite")
        if np.any(self.costs < 0):
            raise TransportError("costs must be nonnegative")
        if int(self.supplies.sum()) != int(self.demands.sum()):
            raise TransportError(
                f"unbalanced problem: supply {int(self.supplies.sum())} "
                f"!= demand {int(self.demands.sum())}"
            )
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise TransportError("scale must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return self.costs.shape

    @property
    def total_units(self) -> int:
        return int(self.supplies.sum())


def _as_masses(values, name) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1 or arr.size == 0:
        raise TransportError(f"{name} must be a nonempty 1-D sequence")
    if not np.all(arr == np.round(arr)):
        raise TransportError(f"{name} must be integers")
    arr = arr.astype(np.int64)
    if np.any(arr <= 0):
        raise TransportError(f"{name} must be positive")
    return arr


@dataclass
class TransportPlan:
    """Optimal integral flow with its dual certificate.

    ``supply_potentials`` (u) and ``demand_potentials`` (v) satisfy
    ``c[i, j] - u[i] - v[j] >= 0`` everywhere, with equality where flow is
    positive.
    """

    flows: dict[tuple[int, int], int]
    total_cost: float
    raw_cost: float
    supply_potentials: np.ndarray
    demand_potentials: np.ndarray
    augmentations: int = 0
    seconds: float = 0.0
    stats: dict = field(default_factory=dict)

    def as_matrix(self, shape) -> np.ndarray:
        x = np.zeros(shape, dtype=np.int64)
        for (i, j), units in self.flows.items():
            x[i, j] = units
        return x


def solve_transport(p: TransportProblem, max_cells: int = MAX_CELLS) -> TransportPlan:
    """Optimal plan by successive shortest paths with potentials."""
    S, D = p.shape
    if S * D > max_cells:
        raise ProblemTooLarge(f"{S}x{D} cost matrix exceeds {max_cells} cells")
    t0 = time.perf_counter()
    # Dijkstra runs over the smaller side ("columns").
    if S <= D:
        x, pot_rows, pot_cols, n_aug = _ssp(p.costs.T, p.demands, p.supplies)
        x = x.T
        u, v = -pot_cols, pot_rows
    else:
        x, pot_rows, pot_cols, n_aug = _ssp(p.costs, p.supplies, p.demands)
        u, v = pot_rows, -pot_cols
    nz = np.argwhere(x > 0)
    flows = {(int(i), int(j)): int(x[i, j]) for i, j in nz}
    raw = math.fsum(float(x[i, j]) * p.costs[i, j] for i, j in nz)
    return TransportPlan(
        flows=flows,
        total_cost=raw / p.scale,
        raw_cost=raw,
        supply_potentials=u,
        demand_potentials=v,
        augmentations=n_aug,
        seconds=time.perf_counter() - t0,
        stats={"supply_nodes": S, "demand_nodes": D, "arcs": S * D},
    )


def _ssp(cost: np.ndarray, row_mass: np.ndarray, col_cap: np.ndarray):
    """Successive shortest paths, Dijkstra over columns.

    Reduced cost of arc (r, k) is ``c[r, k] - pi_r + pi_k``. Row potentials
    are implied: a row carrying flow has ``pi_r = c[r, k] + pi_k`` for every
    column it ships to, and ``pi_r = min_k c[r, k] + pi_k`` in general.
    """
    R, K = cost.shape
    x = np.zeros((R, K), dtype=np.int64)
    pot = np.zeros(K)
    free = col_cap.astype(np.int64).copy()
    # supp[k]: rows with positive flow into column k.
    supp: list[set[int]] = [set() for _ in range(K)]
    # hop[k, k']: cheapest cost change of moving a unit from k to k';
    # hop_row[k, k']: the row that achieves it (lowest index on ties).
    hop = np.full((K, K), np.inf)
    hop_row = np.full((K, K), -1, dtype=np.intp)
    n_aug = 0

    def add_row(k, r):
        delta = cost[r] - cost[r, k]
        better = (delta < hop[k]) | ((delta == hop[k]) & (r < hop_row[k]))
        hop[k, better] = delta[better]
        hop_row[k, better] = r

    def rebuild(k):
        if not supp[k]:
            hop[k] = np.inf
            hop_row[k] = -1
            return
        rows = np.array(sorted(supp[k]), dtype=np.intp)
        delta = cost[rows] - cost[rows, k][:, None]
        best = np.argmin(delta, axis=0)
        hop[k] = delta[best, np.arange(K)]
        hop_row[k] = rows[best]

    for r0 in range(R):
        need = int(row_mass[r0])
        while need > 0:
            base = cost[r0] + pot
            dist = base - base.min()
            pred = np.full(K, -1, dtype=np.intp)
            via = np.full(K, r0, dtype=np.intp)
            done = np.zeros(K, dtype=bool)
            while True:
                k = int(np.argmin(np.where(done, np.inf, dist)))
                if done[k] or not np.isfinite(dist[k]):
                    raise TransportError("no augmenting path; problem infeasible")
                if free[k] > 0:
                    end = k
                    break
                done[k] = True
                cand = dist[k] + (hop[k] - pot[k] + pot)
                better = (cand < dist) & ~done
                dist[better] = cand[better]
                pred[better] = k
                via[better] = hop_row[k, better]

            d_end = dist[end]
            pot -= np.minimum(dist, d_end)

            # Walk back from the free column to r0: arcs to increment and
            # (row, column) arcs to decrement.
            path = []
            k = end
            while pred[k] >= 0:
                path.append((int(via[k]), int(pred[k]), k))
                k = int(pred[k])
            first = k
            delta = min(need, int(free[end]))
            for r, k_from, _ in path:
                delta = min(delta, int(x[r, k_from]))

            x[r0, first] += delta
            touched_add = [(r0, first)]
            touched_del = []
            for r, k_from, k_to in reversed(path):
                x[r, k_from] -= delta
                x[r, k_to] += delta
                touched_add.append((r, k_to))
                touched_del.append((r, k_from))
            need -= delta
            free[end] -= delta
            n_aug += 1

            dirty = set()
            for r, k in touched_del:
                if x[r, k] == 0 and r in supp[k]:
                    supp[k].discard(r)
                    dirty.add(k)
            for r, k in touched_add:
                if x[r, k] > 0 and r not in supp[k]:
                    supp[k].add(r)
                    if k not in dirty:
                        add_row(k, r)
            for k in dirty:
                rebuild(k)

    pot_rows = (cost + pot).min(axis=1)
    return x, pot_rows, pot, n_aug


def verify_optimality(
    p: TransportProblem, plan: TransportPlan, tol: float = OPT_TOL
) -> tuple[bool, float]:
    """Check flow conservation and complementary slackness.

    Returns ``(ok, worst)``. Conservation errors count in units; reduced
    cost violations are relative to ``1 + |c|``.
    """
    S, D = p.shape
    for i, j in plan.flows:
        if not (0 <= i < S and 0 <= j < D):
            raise TransportError(f"flow ({i}, {j}) outside a {S}x{D} problem")
    u = np.asarray(plan.supply_potentials, dtype=float)
    v = np.asarray(plan.demand_potentials, dtype=float)
    if u.shape != (S,) or v.shape != (D,):
        raise TransportError("potentials do not match the problem shape")
    x = plan.as_matrix((S, D))
    conservation = max(
        np.abs(x.sum(axis=1) - p.supplies).max(),
        np.abs(x.sum(axis=0) - p.demands).max(),
        -min(x.min(), 0),
    )
    rc = (p.costs - u[:, None] - v[None, :]) / (1.0 + np.abs(p.costs))
    slack = max(float(np.max(-rc)), 0.0)
    if (x > 0).any():
        slack = max(slack, float(np.abs(rc[x > 0]).max()))
    worst = max(float(conservation), slack)
    return bool(conservation == 0 and slack <= tol), worst


def _integral_plans(p: TransportProblem):
    """Yield every integral feasible flow matrix (exhaustive)."""
    S, D = p.shape
    x = np.zeros((S, D), dtype=np.int64)
    left = p.demands.astype(np.int64).copy()

    def fill(i, j, remaining):
        if i == S:
            yield x
            return
        if j == D - 1:
            if remaining <= left[j]:
                x[i, j] = remaining
                left[j] -= remaining
                yield from fill(i + 1, 0, int(p.supplies[i + 1]) if i + 1 < S else 0)
                left[j] += remaining
                x[i, j] = 0
            return
        for units in range(min(remaining, int(left[j])), -1, -1):
            x[i, j] = units
            left[j] -= units
            yield from fill(i, j + 1, remaining - units)
            left[j] += units
        x[i, j] = 0

    yield from fill(0, 0, int(p.supplies[0]))


def brute_force_transport(p: TransportProblem, max_units: int = MAX_BRUTE_FORCE_UNITS) -> float:
    """Minimum cost by enumerating all integral plans; for tests only."""
    if p.total_units > max_units:
        raise ProblemTooLarge(
            f"{p.total_units} units is too many for exhaustive enumeration"
        )
    best = math.inf
    for x in _integral_plans(p):
        best = min(best, math.fsum((x * p.costs)[x > 0]))
    return best / p.scale


def cycle_canceling_transport(p: TransportProblem, max_cells: int = 2500) -> float:
    """Reference solver: northwest-corner start, then cancel negative cycles.

    Slow (Bellman-Ford per cancellation) and meant only to cross-check
    :func:`solve_transport` on small instances.
    """
    S, D = p.shape
    if S * D > max_cells:
        raise ProblemTooLarge(f"{S}x{D} is too large for cycle canceling")
    x = np.zeros((S, D), dtype=np.int64)
    a = p.supplies.copy()
    b = p.demands.copy()
    i = j = 0
    while i < S and j < D:
        units = min(a[i], b[j])
        x[i, j] = units
        a[i] -= units
        b[j] -= units
        if a[i] == 0:
            i += 1
        else:
            j += 1

    c = p.costs
    n = S + D
    eps = 1e-12 * (1.0 + float(c.max()))
    while True:
        # Residual arcs: supply i -> demand S+j always; S+j -> i if x > 0.
        arcs = [(i, S + j, c[i, j]) for i, j in itertools.product(range(S), range(D))]
        arcs += [(S + j, i, -c[i, j]) for i, j in np.argwhere(x > 0)]
        dist = np.zeros(n)
        pred = np.full(n, -1)
        last = -1
        for _ in range(n):
            last = -1
            for s, t, w in arcs:
                if dist[s] + w < dist[t] - eps:
                    dist[t] = dist[s] + w
                    pred[t] = s
                    last = t
            if last < 0:
                break
        if last < 0:
            break
        for _ in range(n):
            last = pred[last]
        cycle = [last]
        node = pred[last]
        while node != last:
            cycle.append(node)
            node = pred[node]
        cycle.reverse()
        edges = list(zip(cycle, cycle[1:] + cycle[:1]))
        back = [(t, s - S) for s, t in edges if s >= S]
        delta = min(int(x[i, j]) for i, j in back)
        for s, t in edges:
            if s < S:
                x[s, t - S] += delta
            else:
                x[t, s - S] -= delta
    return math.fsum((x * c)[x > 0]) / p.scale
