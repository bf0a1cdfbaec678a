import numpy as np
import pytest
from scipy.optimize import linprog
from scipy.sparse import eye, kron, vstack

from emcor import PairedSample

FOUR_POINT = [(1, 4), (2, 2), (3, 3), (4, 1)]


@pytest.fixture
def four_point():
    x, y = zip(*FOUR_POINT)
    return PairedSample(list(x), list(y))


@pytest.fixture
def grid4():
    return PairedSample([0, 0, 1, 1], [0, 1, 0, 1])


def lp_transport_cost(supplies, demands, costs, scale=1.0):
    """Independent oracle: the transportation LP solved by HiGHS."""
    costs = np.asarray(costs, dtype=float)
    S, D = costs.shape
    a_eq = vstack([kron(eye(S), np.ones((1, D))), kron(np.ones((1, S)), eye(D))]).tocsr()
    res = linprog(
        costs.ravel(), A_eq=a_eq, b_eq=np.r_[supplies, demands], bounds=(0, None), method="highs"
    )
    assert res.status == 0
    return res.fun / scale


def naive_ecov_lp(xs, ys, dx, dy):
    """eCov straight from the definition: n joint atoms vs n**2 grid atoms, no merging."""
    n = len(xs)
    cost = np.empty((n, n * n))
    for s in range(n):
        for i in range(n):
            for j in range(n):
                cost[s, i * n + j] = dx(xs[s], xs[i]) + dy(ys[s], ys[j])
    return lp_transport_cost(np.full(n, 1.0 / n), np.full(n * n, 1.0 / n**2), cost)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(line)
