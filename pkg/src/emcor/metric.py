"""
Metrics on sample points.

A :class:`MetricSpec` says how to measure the distance between two points
of one margin. Coordinate metrics (euclidean, manhattan, discrete) act on
real vectors; a precomputed metric identifies points by their index into
a validated distance matrix.

Point buffers are plain numpy arrays: shape ``(n,)`` for scalar points,
``(n, d)`` for ``d``-dimensional points, or ``(n,)`` integer indices for a
precomputed metric.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

KINDS = ("euclidean", "manhattan", "discrete", "precomputed")

_TRIANGLE_TOL = 1e-12


class MetricError(ValueError):
    """Points do not conform to a metric, or a metric is malformed."""


@dataclass(frozen=True, eq=False)
class MetricSpec:
    """How to compute the distance between two points of one margin.

    ``dimension`` may be left as ``None`` for coordinate metrics, in which
    case it is taken from the data and only checked for consistency.
    """

    kind: str
    dimension: int | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MetricError(f"unknown metric kind {self.kind!r}")
        if self.kind == "precomputed":
            if self.matrix is None:
                raise MetricError("precomputed metric needs a matrix")
            m = _validate_matrix(self.matrix)
            object.__setattr__(self, "matrix", m)
            object.__setattr__(self, "dimension", None)
        elif self.matrix is not None:
            raise MetricError(f"{self.kind} metric takes no matrix")
        elif self.dimension is not None and self.dimension < 1:
            raise MetricError("dimension must be positive")

    @classmethod
    def euclidean(cls, dimension: int | None = None) -> MetricSpec:
        return cls("euclidean", dimension)

    @classmethod
    def manhattan(cls, dimension: int | None = None) -> MetricSpec:
        return cls("manhattan", dimension)

    @classmethod
    def discrete(cls, dimension: int | None = None) -> MetricSpec:
        return cls("discrete", dimension)

    @classmethod
    def precomputed(cls, matrix) -> MetricSpec:
        return cls("precomputed", None, np.asarray(matrix, dtype=float))

    @property
    def is_coordinate(self) -> bool:
        return self.kind != "precomputed"

    def compatible(self, other: MetricSpec) -> bool:
        """True if both specs measure distances in the same space."""
        if self.kind != other.kind:
            return False
        if self.kind == "precomputed":
            return self.matrix is other.matrix or np.array_equal(
                self.matrix, other.matrix
            )
        return (
            self.dimension is None
            or other.dimension is None
            or self.dimension == other.dimension
        )


def _validate_matrix(matrix) -> np.ndarray:
    m = np.array(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise MetricError("distance matrix must be square and nonempty")
    if not np.all(np.isfinite(m)):
        raise MetricError("distance matrix has non-finite entries")
    if np.any(m < 0):
        raise MetricError("distance matrix has negative entries")
    if np.any(np.diag(m) != 0):
        raise MetricError("distance matrix must have a zero diagonal")
    if np.max(np.abs(m - m.T)) > _TRIANGLE_TOL:
        raise MetricError("distance matrix is not symmetric")
    # O(n^3) by design, one pivot at a time to keep memory at O(n^2).
    for k in range(m.shape[0]):
        via = m[:, k, None] + m[None, k, :]
        if np.any(m > via + _TRIANGLE_TOL):
            i, j = np.argwhere(m > via + _TRIANGLE_TOL)[0]
            raise MetricError(
                f"triangle inequality fails: d[{i},{j}] > d[{i},{k}] + d[{k},{j}]"
            )
    m.setflags(write=False)
    return m


def load_matrix(path) -> np.ndarray:
    """Read a distance matrix from CSV (square grid, no header) or JSON.

    The JSON layout is ``{"n": int, "d": [[...], ...]}``.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        doc = json.loads(text)
        m = np.asarray(doc["d"], dtype=float)
        if m.shape != (doc["n"], doc["n"]):
            raise MetricError(f"{path}: 'd' is not {doc['n']}x{doc['n']}")
    else:
        rows = [line for line in text.splitlines() if line.strip()]
        try:
            m = np.array([[float(c) for c in r.split(",")] for r in rows])
        except ValueError as exc:
            raise MetricError(f"{path}: {exc}") from None
    return _validate_matrix(m)


def as_points(m: MetricSpec, pts) -> np.ndarray:
    """Normalize a point buffer for ``m``: ``(n, d)`` floats or ``(n,)`` ints."""
    if m.kind == "precomputed":
        idx = np.asarray(pts)
        if idx.ndim == 2 and idx.shape[1] == 1:
            idx = idx[:, 0]
        if idx.ndim != 1:
            raise MetricError("precomputed points must be a 1-D index array")
        if idx.size and not np.all(idx == np.round(idx)):
            raise MetricError("precomputed points must be integer indices")
        idx = idx.astype(np.intp)
        n = m.matrix.shape[0]
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise MetricError(f"point index out of range for {n}x{n} matrix")
        return idx
    arr = np.asarray(pts, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise MetricError("coordinate points must be a 1-D or 2-D array")
    if not np.all(np.isfinite(arr)):
        raise MetricError("points must be finite")
    if m.dimension is not None and arr.shape[1] != m.dimension:
        raise MetricError(
            f"dimension mismatch: metric has {m.dimension}, points have {arr.shape[1]}"
        )
    return arr


def _as_point(m: MetricSpec, a) -> np.ndarray:
    if m.kind == "precomputed":
        return as_points(m, [a])
    return as_points(m, np.atleast_1d(np.asarray(a, dtype=float))[None, :])


def cross_matrix(m: MetricSpec, a, b) -> np.ndarray:
    """Distances between every point of ``a`` and every point of ``b``."""
    a = as_points(m, a)
    b = as_points(m, b)
    if m.kind == "precomputed":
        return m.matrix[np.ix_(a, b)]
    if a.shape[1] != b.shape[1]:
        raise MetricError(
            f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}"
        )
    if m.kind == "discrete":
        return (cdist(a, b, "hamming") > 0).astype(float)
    if a.shape[1] == 1:
        # Exact for scalars, no square root round trip.
        return np.abs(a[:, 0, None] - b[None, :, 0])
    if m.kind == "euclidean":
        return cdist(a, b, "euclidean")
    return cdist(a, b, "cityblock")


def pairwise_matrix(m: MetricSpec, pts) -> np.ndarray:
    """Symmetric matrix of all pairwise distances within one buffer."""
    pts = as_points(m, pts)
    if len(pts) == 0:
        raise MetricError("empty point buffer")
    d = cross_matrix(m, pts, pts)
    # cdist is symmetric up to summation order; force it exactly.
    d = np.triu(d, 1)
    return d + d.T


def distance(m: MetricSpec, a, b) -> float:
    return float(cross_matrix(m, _as_point(m, a), _as_point(m, b))[0, 0])


def pair_metric(mx: MetricSpec, my: MetricSpec, p, q) -> float:
    """Sum metric on pairs: d[(x, y), (u, v)] = dx(x, u) + dy(y, v)."""
    (x, y), (u, v) = p, q
    return distance(mx, x, u) + distance(my, y, v)


@dataclass(frozen=True, eq=False)
class Similarity:
    """The map x -> scale * Q x + translation.

    ``orthogonal`` defaults to the identity. Reflections (det Q = -1) are
    allowed.
    """

    scale: float
    orthogonal: np.ndarray | None = None
    translation: np.ndarray | float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise MetricError("similarity scale must be positive")
        if self.orthogonal is not None:
            q = np.atleast_2d(np.asarray(self.orthogonal, dtype=float))
            if q.shape[0] != q.shape[1]:
                raise MetricError("orthogonal part must be square")
            if np.max(np.abs(q @ q.T - np.eye(len(q)))) > 1e-12:
                raise MetricError("orthogonal part is not orthogonal")
            object.__setattr__(self, "orthogonal", q)

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        flat = pts.ndim == 1
        arr = pts[:, None] if flat else pts
        if self.orthogonal is not None:
            if self.orthogonal.shape[0] != arr.shape[1]:
                raise MetricError("similarity and points differ in dimension")
            arr = arr @ self.orthogonal.T
        out = self.scale * arr + np.asarray(self.translation, dtype=float)
        return out[:, 0] if flat else out


def _is_signed_permutation(q: np.ndarray) -> bool:
    r = np.round(q)
    return (
        np.array_equal(q, r)
        and np.all(np.abs(r).sum(axis=0) == 1)
        and np.all(np.abs(r).sum(axis=1) == 1)
    )


def apply_similarity(s: Similarity, m: MetricSpec, pts) -> np.ndarray:
    """Map every point through ``s``; distances under ``m`` scale by ``s.scale``.

    Only euclidean and manhattan metrics have a coordinate similarity of
    this form. Under manhattan the orthogonal part must be a signed
    permutation, since general rotations do not preserve L1 distances.
    """
    if m.kind not in ("euclidean", "manhattan"):
        raise MetricError(f"no coordinate similarity for {m.kind} metric")
    arr = as_points(m, pts)
    q = s.orthogonal
    if m.kind == "manhattan" and q is not None and not _is_signed_permutation(q):
        raise MetricError("manhattan similarities need a signed permutation")
    return s(arr)


def hilbert_cube_embed(m: MetricSpec, pts, anchors=None, n_coords: int | None = None):
    """Embed points into the Hilbert cube via distances to anchor points.

    Point ``x`` maps to ``(b(x, a_j) / j)`` for ``j = 1..k`` where
    ``b = d / (1 + d)`` is the bounded version of the metric. Anchors
    default to the points themselves; ``n_coords`` truncates them.
    """
    pts = as_points(m, pts)
    anchors = pts if anchors is None else as_points(m, anchors)
    if n_coords is not None:
        anchors = anchors[:n_coords]
    if len(anchors) == 0:
        raise MetricError("hilbert cube embedding needs at least one anchor")
    d = cross_matrix(m, pts, anchors)
    return (d / (1.0 + d)) / np.arange(1, len(anchors) + 1)
