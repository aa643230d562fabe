"""Planar point primitives shared by the solvers.

Point sets travel through the library as ``(n, 2)`` float64 arrays.  The
:class:`Point2D` and :class:`Instance` types exist for the public surface;
everything accepting "points" also accepts a list of ``Point2D`` or any
array-like of coordinate pairs.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

SOURCES = ("tsplib", "uniform", "clustered", "literal")

# cross products below this fraction of the squared bbox diagonal count as collinear
COLLINEAR_RTOL = 1e-9


class Point2D(namedtuple("Point2D", "x y")):
    """An immutable planar point with finite coordinates."""

    __slots__ = ()

    def __new__(cls, x, y):
        x, y = float(x), float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"non-finite coordinate ({x}, {y})")
        return super().__new__(cls, x, y)


@dataclass(frozen=True, eq=False)
class Instance:
    """An ordered planar point set plus where it came from."""

    points: np.ndarray
    name: str = "unnamed"
    source: str = "literal"
    seed: Optional[int] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = as_points(self.points)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.source not in SOURCES:
            raise ValueError(f"unknown instance source {self.source!r}")

    def __len__(self):
        return len(self.points)

    @property
    def n(self) -> int:
        return len(self.points)

    def point(self, i: int) -> Point2D:
        return Point2D(*self.points[i])


def as_points(points) -> np.ndarray:
    """Coerce ``points`` to a fresh ``(n, 2)`` float64 array and reject NaN/inf."""
    if isinstance(points, Instance):
        points = points.points
    arr = np.array(points, dtype=np.float64)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) coordinate array, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("coordinates must be finite")
    return arr


def dist(p, q) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def distance_matrix(points) -> np.ndarray:
    pts = as_points(points)
    diff = pts[:, None, :] - pts[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def diameter_estimate(pts: np.ndarray) -> float:
    """Bounding-box diagonal: within a factor sqrt(2) of the true diameter."""
    if len(pts) == 0:
        return 0.0
    span = pts.max(axis=0) - pts.min(axis=0)
    return float(math.hypot(span[0], span[1]))


def angular_order(points, center) -> np.ndarray:
    """Indices of ``points`` sorted by angle around ``center``.

    Angles are ``atan2`` values in (-pi, pi].  Equal angles are ordered by
    distance from the center, then by index.  Points exactly at the center
    come first, in index order.
    """
    pts = as_points(points)
    cx, cy = float(center[0]), float(center[1])
    # adding 0.0 turns -0.0 into +0.0 so atan2 never returns -pi
    dx = (pts[:, 0] - cx) + 0.0
    dy = (pts[:, 1] - cy) + 0.0
    ang = np.arctan2(dy, dx)
    rad = np.hypot(dx, dy)
    ang[(dx == 0.0) & (dy == 0.0)] = -np.inf
    order = np.argsort(ang)
    s = ang[order]
    eq = s[1:] == s[:-1]
    if eq.any():
        # re-sort only the runs of equal angle, by distance then index
        in_run = np.zeros(len(s), dtype=bool)
        in_run[1:] |= eq
        in_run[:-1] |= eq
        starts = in_run & ~np.concatenate(([False], eq))
        pos = np.flatnonzero(in_run)
        run = np.cumsum(starts)[pos]
        members = order[pos]
        order[pos] = members[np.lexsort((members, rad[members], run))]
    return order


def cyclic_order(points, center) -> np.ndarray:
    """:func:`angular_order` with points at the center moved into the widest angular gap.

    Rank-offset constructions only see the cyclic sequence, so placing the
    coincident block by geometry rather than at the atan2 branch cut keeps
    them invariant under rotation.  Without coincident points the result
    equals :func:`angular_order`.
    """
    order = angular_order(points, center)
    pts = as_points(points)
    at_center = (pts[order, 0] == center[0]) & (pts[order, 1] == center[1])
    z = int(at_center.sum())
    if z == 0 or z == len(order):
        return order
    rest = order[z:]
    ang = np.arctan2(pts[rest, 1] - center[1], pts[rest, 0] - center[0])
    gaps = np.append(np.diff(ang), ang[0] + 2 * math.pi - ang[-1])
    g = int(np.argmax(gaps))
    return np.concatenate([order[:z], rest[g + 1:], rest[:g + 1]])


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points, tol: Optional[float] = None) -> list:
    """Strict convex hull (Andrew's monotone chain), counterclockwise.

    Returns hull vertex indices.  Collinear and duplicate points are dropped;
    ``tol`` is the absolute cross-product threshold, by default
    ``COLLINEAR_RTOL`` times the squared bounding-box diagonal.
    """
    pts = as_points(points)
    n = len(pts)
    if n < 3:
        return list(range(n))
    if tol is None:
        tol = COLLINEAR_RTOL * diameter_estimate(pts) ** 2
    order = np.lexsort((pts[:, 1], pts[:, 0]))

    def chain(seq):
        out = []
        for i in seq:
            while len(out) >= 2 and _cross(pts[out[-2]], pts[out[-1]], pts[i]) <= tol:
                out.pop()
            out.append(int(i))
        return out

    lower = chain(order)
    upper = chain(order[::-1])
    return lower[:-1] + upper[:-1]


def is_convex_position(points) -> bool:
    """True iff every point is a strict vertex of the convex hull."""
    pts = as_points(points)
    if len(pts) < 3:
        raise ValueError("convexity test needs at least 3 points")
    return len(convex_hull(pts)) == len(pts)
