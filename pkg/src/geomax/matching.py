"""Maximum weight perfect matching: the antipodal-rank heuristic and local search."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import as_points, cyclic_order
from .weber import weber_combinatorial, weber_numeric

DEFAULT_BUDGET = 1_000_000


class OddCardinalityError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Matching:
    """Perfect matching as rows ``(i, j)`` with ``i < j``, sorted by ``i``."""

    pairs: np.ndarray
    value: float

    @classmethod
    def from_pairs(cls, points, pairs) -> "Matching":
        pts = as_points(points)
        pairs = np.sort(np.asarray(pairs, dtype=np.int64).reshape(-1, 2), axis=1)
        pairs = pairs[np.argsort(pairs[:, 0], kind="stable")]
        return cls(pairs, matching_value(pts, pairs))

    def __len__(self):
        return len(self.pairs)


def matching_value(points, pairs) -> float:
    pts = as_points(points)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    a, b = pts[pairs[:, 0]], pts[pairs[:, 1]]
    return float(np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1]).sum())


def validate_matching(n: int, matching: Matching) -> None:
    pairs = np.asarray(matching.pairs)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or 2 * len(pairs) != n:
        raise ValueError(f"not a perfect matching on {n} points")
    seen = np.bincount(pairs.ravel(), minlength=n) if pairs.size else np.zeros(n, int)
    if len(seen) != n or not (seen == 1).all() or (pairs[:, 0] >= pairs[:, 1]).any():
        raise ValueError("invalid matching: every index must appear in exactly one pair (i < j)")


def matching_center(points, center_mode: str = "numeric"):
    if center_mode == "numeric":
        return weber_numeric(points)
    if center_mode == "combinatorial":
        return weber_combinatorial(points)
    raise ValueError(f"unknown center mode {center_mode!r}")


def cross_pairs(points, center) -> np.ndarray:
    """Pair angular rank ``r`` with rank ``r + n/2`` around ``center``."""
    order = cyclic_order(points, center)
    h = len(order) // 2
    return np.column_stack([order[:h], order[h:]])


def cross_matching(points, center_mode: str = "numeric", center=None) -> Matching:
    """Match each point with the point half a turn further in angular order.

    The center is the numeric Weber point by default, or the balanced
    six-sector center with ``center_mode="combinatorial"``.  An explicit
    ``center`` overrides both.
    """
    pts = as_points(points)
    n = len(pts)
    if n % 2:
        raise OddCardinalityError("odd cardinality; drop a point first")
    if n < 2:
        raise ValueError("matching needs at least 2 points")
    if center is None:
        center = matching_center(pts, center_mode).center
    return Matching.from_pairs(pts, cross_pairs(pts, center))


def certify_ratio(points, center, matching: Matching) -> float:
    """Largest per-edge factor ``sqrt(2 / (1 - cos phi))`` over the matched pairs.

    ``phi`` is the angle at ``center`` between the rays to the two matched
    points; ``(d(c,p) + d(c,q)) <= factor * d(p,q)`` for each pair, so the
    factor times the matching value bounds the star value at ``center``.
    A pair with a point at the center contributes 2.
    """
    pts = as_points(points)
    pairs = np.asarray(matching.pairs)
    if len(pairs) == 0:
        return 1.0
    u = pts[pairs[:, 0]] - np.asarray(center, dtype=float)
    v = pts[pairs[:, 1]] - np.asarray(center, dtype=float)
    cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    dot = (u * v).sum(axis=1)
    phi = np.arctan2(np.abs(cross), dot)
    degenerate = (~u.any(axis=1)) | (~v.any(axis=1))
    with np.errstate(divide="ignore"):
        factor = 1.0 / np.sin(0.5 * phi)
    factor[degenerate] = 2.0
    return float(factor.max())


def _edge_len(pts, a, b):
    return np.hypot(pts[a, 0] - pts[b, 0], pts[a, 1] - pts[b, 1])


def matching_local_search(points, start: Matching, budget: int = DEFAULT_BUDGET,
                          seed: int = 0, time_limit: Optional[float] = None) -> Matching:
    """Improve a perfect matching with 2-exchanges plus random kicks.

    Pairs are scanned in random order; for each pair every other pair is
    tried in both reconnections and the best improving exchange is applied.
    When a full pass finds nothing, two random pairs are re-paired at random
    and the search continues.  ``budget`` counts exchange evaluations; the
    best matching seen is returned, so the value never decreases.
    """
    pts = as_points(points)
    n = len(pts)
    validate_matching(n, start)
    m = n // 2
    if m < 2:
        return start
    rng = np.random.default_rng(seed)
    deadline = None if time_limit is None else time.monotonic() + time_limit
    A = start.pairs[:, 0].copy()
    B = start.pairs[:, 1].copy()
    L = _edge_len(pts, A, B)
    cur = float(L.sum())
    best_val, best_A, best_B = cur, A.copy(), B.copy()
    eps = 1e-12 * max(cur, 1e-300)
    used = 0

    while used < budget:
        improved = False
        for p in rng.permutation(m):
            if used >= budget or (deadline is not None and time.monotonic() > deadline):
                break
            a, b = A[p], B[p]
            # option 1: (a, A[q]) + (b, B[q]); option 2: (a, B[q]) + (b, A[q])
            base = L[p] + L
            g1 = _edge_len(pts, a, A) + _edge_len(pts, b, B) - base
            g2 = _edge_len(pts, a, B) + _edge_len(pts, b, A) - base
            g1[p] = g2[p] = -np.inf
            used += 2 * (m - 1)
            q1, q2 = int(np.argmax(g1)), int(np.argmax(g2))
            if max(g1[q1], g2[q2]) <= eps:
                continue
            if g1[q1] >= g2[q2]:
                q, gain = q1, g1[q1]
                na, nb = (a, A[q]), (b, B[q])
            else:
                q, gain = q2, g2[q2]
                na, nb = (a, B[q]), (b, A[q])
            A[p], B[p] = na
            A[q], B[q] = nb
            L[p] = _edge_len(pts, A[p], B[p])
            L[q] = _edge_len(pts, A[q], B[q])
            cur += gain
            improved = True
        if deadline is not None and time.monotonic() > deadline:
            break
        cur = float(L.sum())
        if cur > best_val:
            best_val, best_A, best_B = cur, A.copy(), B.copy()
        if not improved and used < budget:
            p, q = rng.choice(m, size=2, replace=False)
            a, b, c, d = A[p], B[p], A[q], B[q]
            if rng.random() < 0.5:
                A[p], B[p], A[q], B[q] = a, c, b, d
            else:
                A[p], B[p], A[q], B[q] = a, d, b, c
            L[p] = _edge_len(pts, A[p], B[p])
            L[q] = _edge_len(pts, A[q], B[q])
            used += 1

    cur = float(L.sum())
    if cur > best_val:
        best_val, best_A, best_B = cur, A, B
    result = Matching.from_pairs(pts, np.column_stack([best_A, best_B]))
    if result.value < start.value:
        return start
    return result
