"""Ground truth at desk scale: exhaustive optima, the matching LP, and a fractional tour point."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment

from .geometry import angular_order, as_points, distance_matrix, is_convex_position
from .matching import Matching, OddCardinalityError
from .tour import Tour
from .weber import weber_numeric

BRUTE_MATCHING_CAP = 12
BRUTE_TOUR_CAP = 10
LP_CAP = 2000
SUBTOUR_CAP = 16


class CapExceededError(ValueError):
    pass


class InfeasibleError(ValueError):
    pass


@dataclass(frozen=True)
class FractionalMatching:
    weights: dict
    value: float

    def is_integral(self, atol: float = 1e-9) -> bool:
        return all(min(abs(x), abs(1 - x)) <= atol for x in self.weights.values())


@dataclass(frozen=True)
class FractionalTour:
    weights: dict
    value: float


@lru_cache(maxsize=None)
def _all_matchings(n: int) -> np.ndarray:
    """Every perfect matching of 0..n-1 in lexicographic order, shape (count, n/2, 2)."""

    def rec(rest):
        if not rest:
            yield ()
            return
        a = rest[0]
        for k in range(1, len(rest)):
            b = rest[k]
            for tail in rec(rest[1:k] + rest[k + 1:]):
                yield ((a, b),) + tail

    out = np.array(list(rec(tuple(range(n)))), dtype=np.int64)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _all_tours(n: int) -> np.ndarray:
    """Every Hamiltonian cycle on 0..n-1 once: 0 first, second vertex < last vertex."""
    perms = np.array(list(itertools.permutations(range(1, n))), dtype=np.int8)
    perms = perms[perms[:, 0] < perms[:, -1]]
    out = np.hstack([np.zeros((len(perms), 1), dtype=np.int8), perms])
    out.setflags(write=False)
    return out


def brute_matching(points, cap: int = BRUTE_MATCHING_CAP) -> Matching:
    pts = as_points(points)
    n = len(pts)
    if n % 2:
        raise OddCardinalityError("odd cardinality; drop a point first")
    if n < 2:
        raise ValueError("matching needs at least 2 points")
    if n > cap:
        raise CapExceededError(f"brute-force matching cap exceeded ({n} > {cap})")
    D = distance_matrix(pts)
    all_m = _all_matchings(n)
    values = D[all_m[..., 0], all_m[..., 1]].sum(axis=1)
    best = int(np.argmax(values))
    return Matching.from_pairs(pts, all_m[best])


def brute_tour(points, cap: int = BRUTE_TOUR_CAP) -> Tour:
    pts = as_points(points)
    n = len(pts)
    if n < 3:
        raise ValueError("tour needs at least 3 points")
    if n > cap:
        raise CapExceededError(f"brute-force tour cap exceeded ({n} > {cap})")
    D = distance_matrix(pts)
    tours = _all_tours(n)
    values = D[tours, np.roll(tours, -1, axis=1)].sum(axis=1)
    best = int(np.argmax(values))
    return Tour.from_order(pts, tours[best])


def lp_matching_optimum(points, cap: int = LP_CAP) -> FractionalMatching:
    """Optimum of the fractional perfect matching LP (degree 1 at every vertex, x >= 0).

    Solved as a maximum weight assignment on the bipartite double cover,
    halved: an assignment using ``i -> j`` and ``j -> i`` gives ``x_ij = 1``,
    a longer assignment cycle gives weight 1/2 on each of its edges.
    """
    pts = as_points(points)
    n = len(pts)
    if n % 2:
        raise OddCardinalityError("odd cardinality; drop a point first")
    if n < 2:
        raise ValueError("matching needs at least 2 points")
    if n > cap:
        raise CapExceededError(f"LP cap exceeded ({n} > {cap})")
    D = distance_matrix(pts)
    cost = -D
    np.fill_diagonal(cost, np.inf)
    rows, cols = linear_sum_assignment(cost)
    weights: dict = {}
    for i, j in zip(rows.tolist(), cols.tolist()):
        key = (min(i, j), max(i, j))
        weights[key] = weights.get(key, 0.0) + 0.5
    value = float(sum(x * D[i, j] for (i, j), x in weights.items()))
    return FractionalMatching(weights, value)


def verify_subtour_point(n: int, weights: dict, atol: float = 1e-9) -> None:
    """Check degree-2 equalities and every cut constraint by subset enumeration."""
    deg = np.zeros(n)
    for (i, j), x in weights.items():
        if x < -atol:
            raise InfeasibleError(f"negative weight {x} on edge ({i}, {j})")
        deg[i] += x
        deg[j] += x
    bad = np.flatnonzero(np.abs(deg - 2.0) > atol)
    if len(bad):
        v = int(bad[0])
        raise InfeasibleError(f"degree constraint violated at vertex {v}: {deg[v]} != 2")
    if n > SUBTOUR_CAP:
        raise CapExceededError(f"cut enumeration cap exceeded ({n} > {SUBTOUR_CAP})")
    masks = np.arange(1, (1 << n) - 1, dtype=np.int64)
    cut = np.zeros(len(masks))
    for (i, j), x in weights.items():
        cut += x * (((masks >> i) & 1) != ((masks >> j) & 1))
    low = np.flatnonzero(cut < 2.0 - atol)
    if len(low):
        S = [v for v in range(n) if (int(masks[low[0]]) >> v) & 1]
        raise InfeasibleError(f"cut constraint violated for S={S}: {cut[low[0]]} < 2")


def subtour_fractional_construction(points) -> FractionalTour:
    """Weight 1 on the diagonals and 1/2 on the near-diagonals of a convex even polygon.

    Diagonals join angular ranks ``i`` and ``i + n/2``; near-diagonals join
    ``i`` and ``i + n/2 - 1``.  The point is checked against the degree and
    cut constraints before it is returned.
    """
    pts = as_points(points)
    n = len(pts)
    if n % 2 or n < 4:
        raise ValueError("need an even number of at least 4 points")
    if n > SUBTOUR_CAP:
        raise CapExceededError(f"cut enumeration cap exceeded ({n} > {SUBTOUR_CAP})")
    if not is_convex_position(pts):
        raise ValueError("points are not in strictly convex position")
    ranks = angular_order(pts, weber_numeric(pts).center)
    h = n // 2
    weights: dict = {}

    def add(r, s, x):
        i, j = int(ranks[r % n]), int(ranks[s % n])
        key = (min(i, j), max(i, j))
        weights[key] = weights.get(key, 0.0) + x

    for r in range(h):
        add(r, r + h, 1.0)
    for r in range(n):
        add(r, r + h - 1, 0.5)
    verify_subtour_point(n, weights)
    D = distance_matrix(pts)
    value = float(sum(x * D[i, j] for (i, j), x in weights.items()))
    return FractionalTour(weights, value)
