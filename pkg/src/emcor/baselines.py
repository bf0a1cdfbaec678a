"""
Baseline dependence measures: sample distance covariance/correlation
(V-statistic form) and Pearson's product-moment correlation.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import UndefinedCorrelationError
from .metric import pairwise_matrix


def double_center(d) -> np.ndarray:
    """Subtract row and column means, add back the grand mean."""
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("double centering needs a square matrix")
    return (
        d
        - d.mean(axis=1, keepdims=True)
        - d.mean(axis=0, keepdims=True)
        + d.mean()
    )


def _centered(s):
    if s.n < 2:
        raise ValueError("need at least two observations")
    a = double_center(pairwise_matrix(s.metric_x, s.x))
    b = double_center(pairwise_matrix(s.metric_y, s.y))
    return a, b


def _dcov_sqr(a, b) -> float:
    return float(np.mean(a * b))


def distance_covariance(s) -> float:
    """Square root of ``(1/n^2) sum A_ij B_ij`` (clamped at zero)."""
    a, b = _centered(s)
    return math.sqrt(max(_dcov_sqr(a, b), 0.0))


def distance_stats(s) -> dict:
    """dCov, both dVars and dCor from one pair of centered matrices.

    ``dcor`` is ``None`` when either distance variance vanishes.
    """
    a, b = _centered(s)
    dcov = math.sqrt(max(_dcov_sqr(a, b), 0.0))
    dvar_x = math.sqrt(max(_dcov_sqr(a, a), 0.0))
    dvar_y = math.sqrt(max(_dcov_sqr(b, b), 0.0))
    denom = math.sqrt(dvar_x * dvar_y)
    dcor = None if denom == 0 else min(dcov / denom, 1.0)
    return {"dcov": dcov, "dvar_x": dvar_x, "dvar_y": dvar_y, "dcor": dcor}


def distance_correlation(s) -> float:
    stats = distance_stats(s)
    if stats["dcor"] is None:
        raise UndefinedCorrelationError("dCor undefined: degenerate margin")
    return stats["dcor"]


def pearson_correlation(xs, ys) -> float:
    x = np.asarray(xs, dtype=float).ravel()
    y = np.asarray(ys, dtype=float).ravel()
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need two samples of equal length >= 2")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise UndefinedCorrelationError("Pearson correlation undefined: zero variance")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    return max(-1.0, min(1.0, float(xc @ yc) / math.sqrt(sxx * syy)))
