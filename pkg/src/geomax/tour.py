"""Maximum TSP: near-diagonal construction around the Weber center, and 2-opt search."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import as_points, cyclic_order, is_convex_position
from .weber import weber_numeric

DEFAULT_BUDGET = 1_000_000
CANDIDATES = 16


@dataclass(frozen=True, eq=False)
class Tour:
    """Hamiltonian cycle in canonical form: starts at 0, ``order[1] < order[-1]``."""

    order: np.ndarray
    value: float

    @classmethod
    def from_order(cls, points, order) -> "Tour":
        pts = as_points(points)
        order = canonical_order(order)
        return cls(order, tour_value(pts, order))

    def __len__(self):
        return len(self.order)

    def edges(self) -> np.ndarray:
        return np.column_stack([self.order, np.roll(self.order, -1)])


def canonical_order(order) -> np.ndarray:
    order = np.asarray(order, dtype=np.int64)
    if len(order) == 0:
        return order
    k = int(np.flatnonzero(order == 0)[0]) if (order == 0).any() else int(np.argmin(order))
    order = np.roll(order, -k)
    if len(order) > 2 and order[1] > order[-1]:
        order = np.concatenate(([order[0]], order[1:][::-1]))
    return order


def tour_value(points, order) -> float:
    pts = as_points(points)
    p = pts[np.asarray(order, dtype=np.int64)]
    q = np.roll(p, -1, axis=0)
    return float(np.hypot(p[:, 0] - q[:, 0], p[:, 1] - q[:, 1]).sum())


def validate_tour(n: int, tour: Tour) -> None:
    order = np.asarray(tour.order)
    if order.shape != (n,) or not np.array_equal(np.sort(order), np.arange(n)):
        raise ValueError(f"invalid tour: order must be a permutation of 0..{n - 1}")


def _rank_dist(pts, ranks, i, j):
    a, b = pts[ranks[i % len(ranks)]], pts[ranks[j % len(ranks)]]
    return np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1])


def near_diagonal_exchange(points, ranks):
    """For even ``n``: length of the near-diagonal 2-factor and the gain of each exchange.

    ``ranks[r]`` is the point at angular rank ``r``.  Entry ``i`` of the gain
    array is the change from swapping near-diagonals ``(i, i+n/2+1)`` and
    ``(i+1, i+n/2)`` for diagonals ``(i, i+n/2)`` and ``(i+1, i+1+n/2)``.
    """
    pts = as_points(points)
    n = len(ranks)
    h = n // 2
    i = np.arange(n)
    L = float(_rank_dist(pts, ranks, i, i + h - 1).sum())
    gains = (_rank_dist(pts, ranks, i, i + h) + _rank_dist(pts, ranks, i + 1, i + 1 + h)
             - _rank_dist(pts, ranks, i, i + h + 1) - _rank_dist(pts, ranks, i + 1, i + h))
    return L, gains


def _exchanged_cycle(n: int, i: int) -> np.ndarray:
    """Rank sequence of the near-diagonal 2-factor after the exchange at ``i``."""
    h = n // 2
    fwd = [(r + h - 1) % n for r in range(n)]
    bwd = [(r + h + 1) % n for r in range(n)]
    nbr = [[fwd[r], bwd[r]] for r in range(n)]

    def swap(u, old, new):
        k = nbr[u].index(old)
        nbr[u][k] = new

    a, b = i % n, (i + 1) % n
    # b+h-1 == a+h and a+h+1 == b+h: the far ends trade partners
    swap(a, (a + h + 1) % n, (a + h) % n)
    swap((a + h + 1) % n, a, b)
    swap(b, (b + h - 1) % n, (b + h) % n)
    swap((b + h - 1) % n, b, a)
    seq = [0]
    prev, cur = -1, 0
    for _ in range(n - 1):
        x, y = nbr[cur]
        nxt = y if x == prev else x
        prev, cur = cur, nxt
        if cur == 0:
            break
        seq.append(cur)
    if len(seq) != n or 0 not in nbr[seq[-1]]:
        raise AssertionError(f"near-diagonal exchange at {i} did not yield a Hamiltonian cycle (n={n})")
    return np.asarray(seq, dtype=np.int64)


def cross_tour(points, center=None) -> Tour:
    """Long tour from the angular order around the Weber center.

    Odd ``n``: connect rank ``r`` to rank ``r + (n-1)/2``.  Even ``n``: take
    the near-diagonal 2-factor (step ``n/2 - 1``) and apply the single
    exchange that adds two adjacent diagonals with the largest gain; this also
    joins the two cycles the 2-factor splits into when ``n = 2 mod 4``.
    """
    pts = as_points(points)
    n = len(pts)
    if n < 3:
        raise ValueError("tour needs at least 3 points")
    if center is None:
        center = weber_numeric(pts).center
    ranks = cyclic_order(pts, center)
    if n % 2:
        seq = (np.arange(n) * ((n - 1) // 2)) % n
        return Tour.from_order(pts, ranks[seq])
    L, gains = near_diagonal_exchange(pts, ranks)
    best = int(np.argmax(gains))
    tour = Tour.from_order(pts, ranks[_exchanged_cycle(n, best)])
    expected = L + float(gains[best])
    if not math.isclose(tour.value, expected, rel_tol=1e-9, abs_tol=1e-12):
        raise AssertionError(f"tour length {tour.value} != L + D = {expected}")
    return tour


def locally_optimal_convex_tours(points, center=None) -> list:
    """The ``n/2`` tours of two adjacent diagonals plus near-diagonals, for convex even sets.

    Values come from one O(n) pass of the exchange gains; building each
    tour's order is O(n).  Their maximum is the value of :func:`cross_tour`.
    """
    pts = as_points(points)
    n = len(pts)
    if n < 4 or n % 2:
        raise ValueError("need an even number of at least 4 points")
    if not is_convex_position(pts):
        raise ValueError("points are not in strictly convex position")
    if center is None:
        center = weber_numeric(pts).center
    ranks = cyclic_order(pts, center)
    L, gains = near_diagonal_exchange(pts, ranks)
    tours = []
    for i in range(n // 2):
        order = ranks[_exchanged_cycle(n, i)]
        tours.append(Tour(canonical_order(order), L + float(gains[i])))
    return tours


def _candidate_lists(pts, k: int):
    n = len(pts)
    if n - 1 <= k:
        return [[j for j in range(n) if j != i] for i in range(n)]
    ranks = cyclic_order(pts, weber_numeric(pts).center)
    rank_of = np.empty(n, dtype=np.int64)
    rank_of[ranks] = np.arange(n)
    offs = np.arange(-(k // 2), k - k // 2) + n // 2
    cand = ranks[(rank_of[:, None] + offs[None, :]) % n]
    return [[int(c) for c in row if c != i] for i, row in enumerate(cand)]


def _reverse(order, pos, i, j):
    """Reverse the cyclic position range i..j (inclusive) in place."""
    n = len(order)
    length = (j - i) % n + 1
    if 2 * length > n:
        # reversing the complement yields the same cycle, reflected
        i, j = (j + 1) % n, (i - 1) % n
        length = n - length
    for _ in range(length // 2):
        a, b = order[i], order[j]
        order[i], order[j] = b, a
        pos[b], pos[a] = i, j
        i = (i + 1) % n
        j = (j - 1) % n


def tour_local_search(points, start: Tour, budget: int = DEFAULT_BUDGET, seed: int = 0,
                      time_limit: Optional[float] = None, neighbors: int = CANDIDATES) -> Tour:
    """2-opt hill climbing for long tours with double-bridge kicks.

    Candidate partners for each point are the ``neighbors`` points nearest
    its antipodal angular rank, the far-point analogue of nearest-neighbour
    lists.  ``budget`` counts move evaluations.  Returns the best tour seen.
    """
    pts = as_points(points)
    n = len(pts)
    validate_tour(n, start)
    if n <= 3:
        return start
    rng = np.random.default_rng(seed)
    deadline = None if time_limit is None else time.monotonic() + time_limit
    xs, ys = pts[:, 0].tolist(), pts[:, 1].tolist()
    hyp = math.hypot

    def d(a, b):
        return hyp(xs[a] - xs[b], ys[a] - ys[b])

    cand = _candidate_lists(pts, neighbors)
    order = start.order.tolist()
    pos = [0] * n
    for k, v in enumerate(order):
        pos[v] = k
    cur = start.value
    best_val, best_order = cur, list(order)
    eps = 1e-12 * max(cur, 1e-300)
    used = 0

    def out_of_time():
        return deadline is not None and time.monotonic() > deadline

    while used < budget and not out_of_time():
        improved = True
        while improved and used < budget:
            improved = False
            for a in rng.permutation(n).tolist():
                if used >= budget:
                    break
                pa = pos[a]
                succ_a, pred_a = order[(pa + 1) % n], order[pa - 1]
                for c in cand[a]:
                    used += 2
                    pc = pos[c]
                    succ_c = order[(pc + 1) % n]
                    if c != succ_a and succ_c != a:
                        gain = d(a, c) + d(succ_a, succ_c) - d(a, succ_a) - d(c, succ_c)
                        if gain > eps:
                            _reverse(order, pos, (pa + 1) % n, pc)
                            cur += gain
                            improved = True
                            break
                    pred_c = order[pc - 1]
                    if c != pred_a and pred_c != a:
                        gain = d(a, c) + d(pred_a, pred_c) - d(a, pred_a) - d(c, pred_c)
                        if gain > eps:
                            _reverse(order, pos, pc, (pa - 1) % n)
                            cur += gain
                            improved = True
                            break
            if out_of_time():
                break
        cur = tour_value(pts, order)
        if cur > best_val:
            best_val, best_order = cur, list(order)
        if used >= budget:
            break
        # double-bridge kick from the best tour
        a, b, c = sorted(rng.choice(np.arange(1, n), size=3, replace=False).tolist())
        base = best_order
        order = base[:a] + base[b:c] + base[a:b] + base[c:]
        for k, v in enumerate(order):
            pos[v] = k
        cur = tour_value(pts, order)
        used += 1

    cur = tour_value(pts, order)
    if cur > best_val:
        best_val, best_order = cur, list(order)
    result = Tour.from_order(pts, best_order)
    return result if result.value >= start.value else start
