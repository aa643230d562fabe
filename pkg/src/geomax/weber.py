"""Minimum-star (Fermat-Weber) solvers and the star upper bounds.

The star value ``sum_i d(c, p_i)`` at any center ``c`` bounds the maximum
weight perfect matching from above, because every matching edge is at most
as long as the two rays joining its endpoints through ``c``.  Two refinements
are provided: a numerically optimized center (Weiszfeld then Newton), and
the improved bound which credits each point with half of its smallest
triangle-inequality slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .geometry import Point2D, as_points, diameter_estimate

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000
NEWTON_SWITCH = 1e-6
WEISZFELD_PATIENCE = 200
# over-relaxation cap; any factor in [0, 2] keeps Weiszfeld steps non-increasing
OVERRELAX_MAX = 1.8
MAX_CONDITION = 1e12
SNAP_RTOL = 1e-12
FWP_PRIME_CAP = 20_000
SECTOR = math.pi / 3


@dataclass
class WeberResult:
    """A candidate star center and how it was obtained.

    ``gradient_norm`` is the norm of the star objective's gradient divided
    by ``n`` (so it lies in [0, 1]); it is NaN when the center sits on an
    input point, where the objective is not differentiable.
    """

    center: Point2D
    value: float
    method: str
    iterations: int
    gradient_norm: float
    converged: bool = True
    status: str = "gradient"
    anchored: bool = False
    sector_balanced: bool = False
    rotation: Optional[float] = None
    history: list = field(default_factory=list, repr=False)


def fwp_value(points, center) -> float:
    pts = as_points(points)
    return float(np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1]).sum())


def _anchor_test(q, c, r, near):
    """Optimality test at a data point: |sum of unit vectors to the rest| <= multiplicity."""
    far = ~near
    m = int(near.sum())
    if not far.any():
        return True, np.zeros(2), m
    rf = r[far]
    grad = np.array([((c[0] - q[far, 0]) / rf).sum(), ((c[1] - q[far, 1]) / rf).sum()])
    return float(np.hypot(*grad)) <= m, grad, m


def weber_numeric(points, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                  start=None) -> WeberResult:
    """Minimize the star value by Weiszfeld iteration refined with Newton steps.

    Weiszfeld steps, over-relaxed by the observed contraction rate, run
    until the relative gradient drops below 1e-6 (or for at most 200
    steps), then safeguarded Newton steps with backtracking take over.  Iterates that land on an input point are handled with the
    anchored optimality test; if the test fails the iterate steps off along
    the descent direction.  ``history`` lists the objective at each accepted
    iterate and is non-increasing.

    Non-convergence is not an error: the best iterate is returned with
    ``converged=False`` and ``status="max_iter"``.
    """
    pts = as_points(points)
    n = len(pts)
    if n == 0:
        raise ValueError("empty instance")
    origin = pts.mean(axis=0)
    q = pts - origin
    diam = diameter_estimate(q)
    if diam == 0.0:
        center = Point2D(*pts[0])
        return WeberResult(center, 0.0, "weiszfeld", 0, math.nan, True, "anchored", True,
                           history=[0.0])
    snap = SNAP_RTOL * diam
    c = np.zeros(2) if start is None else np.asarray(start, dtype=float) - origin

    history = []
    method = "weiszfeld"
    status = "max_iter"
    anchored = False
    grad_norm = math.nan
    wz_steps = 0
    prev_g = None
    prev_c, prev_f = None, math.inf
    it = 0
    for it in range(max_iter + 1):
        dx = c[0] - q[:, 0]
        dy = c[1] - q[:, 1]
        r = np.hypot(dx, dy)
        f = float(r.sum())
        if f > prev_f:
            # floating-point noise at the optimum; keep the better iterate
            c, f = prev_c, prev_f
            status = "stalled"
            break
        history.append(f)
        prev_c, prev_f = c, f
        k = int(np.argmin(r))
        mean_r = f / n

        if r[k] <= snap or r[k] <= 1e-4 * mean_r:
            c_k = q[k].copy()
            r_k = np.hypot(c_k[0] - q[:, 0], c_k[1] - q[:, 1])
            near = r_k <= snap
            optimal, gvec, m = _anchor_test(q, c_k, r_k, near)
            if optimal:
                if r[k] > 0.0:
                    history.append(float(r_k.sum()))
                c, anchored, status = c_k, True, "anchored"
                break
            if r[k] <= snap:
                # step off the data point along -grad (Kuhn's modified step)
                gn = float(np.hypot(*gvec))
                step = (gn - m) / float((1.0 / r_k[~near]).sum())
                d = -gvec / gn
                t = step
                while t > 1e-18 * diam:
                    cand = c_k + t * d
                    if np.hypot(cand[0] - q[:, 0], cand[1] - q[:, 1]).sum() < f:
                        break
                    t *= 0.5
                c = c_k + t * d
                wz_steps += 1
                prev_g = None
                continue

        g = np.array([(dx / r).sum(), (dy / r).sum()])
        grad_norm = float(np.hypot(*g)) / n
        if grad_norm <= tol:
            status = "gradient"
            break
        if it == max_iter:
            break

        c_new = None
        if grad_norm > NEWTON_SWITCH and wz_steps < WEISZFELD_PATIENCE:
            # extrapolate by the observed contraction rate
            lam = 1.0
            if prev_g is not None and grad_norm < prev_g:
                lam = min(OVERRELAX_MAX, 1.0 / (1.0 - grad_norm / prev_g))
            c_new = c + lam * (_weiszfeld_step(q, r) - c)
            prev_g = grad_norm
            wz_steps += 1
        else:
            c_new = _newton_step(q, c, r, g, f)
            if c_new is None:
                c_new = _weiszfeld_step(q, r)
            else:
                method = "newton"
        if np.hypot(*(c_new - c)) <= 1e-15 * diam:
            status = "stalled"
            break
        c = c_new

    center = Point2D(*(c + origin))
    if anchored:
        # exact data-point coordinates so angular_order sees the coincidence
        center = Point2D(*pts[int(np.argmin(np.hypot(*(q - c).T)))])
        grad_norm = math.nan
    value = fwp_value(pts, center)
    return WeberResult(center, value, method, it, grad_norm, status != "max_iter", status,
                       anchored, history=history)


def _weiszfeld_step(q, r):
    w = 1.0 / r
    return np.array([(q[:, 0] * w).sum(), (q[:, 1] * w).sum()]) / w.sum()


def _newton_step(q, c, r, g, f):
    ux = (c[0] - q[:, 0]) / r
    uy = (c[1] - q[:, 1]) / r
    w = 1.0 / r
    hxx = float((w * (1.0 - ux * ux)).sum())
    hyy = float((w * (1.0 - uy * uy)).sum())
    hxy = float((-w * ux * uy).sum())
    H = np.array([[hxx, hxy], [hxy, hyy]])
    lo, hi = np.linalg.eigvalsh(H)
    if lo <= 0.0 or hi / lo > MAX_CONDITION:
        return None
    s = -np.linalg.solve(H, g)
    slope = float(g @ s)
    t = 1.0
    while t > 1e-12:
        cand = c + t * s
        fc = float(np.hypot(cand[0] - q[:, 0], cand[1] - q[:, 1]).sum())
        if fc <= f + 1e-4 * t * slope:
            return cand
        t *= 0.5
    return None


def _sector_check(interior, m) -> bool:
    # u_k = (boundary points of ray k sent forward) - (those of ray k+3)
    C = [interior[k] - interior[k + 3] + m[(k + 1) % 6] - m[(k + 4) % 6] for k in range(3)]
    S = C[0] + C[1] + C[2]
    if S % 2:
        return False
    u0 = -S // 2
    u1 = u0 + C[0]
    u2 = u1 + C[1]
    return (-m[3] <= u0 <= m[0]) and (-m[4] <= u1 <= m[1]) and (-m[5] <= u2 <= m[2])


def sector_balance(points, center, atol: float = 1e-9) -> Optional[float]:
    """Find a rotation of six pi/3 sectors around ``center`` with balanced opposite sectors.

    Sector ``k`` covers angles ``[theta + k*pi/3, theta + (k+1)*pi/3)``.  A
    point lying exactly on a sector boundary may be counted on either side.
    Points at the center belong to no sector.  Returns the rotation ``theta``
    in ``[0, pi/3)`` or ``None`` if no rotation balances all three pairs.

    The sweep visits every critical rotation once, O(n log n) overall.
    """
    pts = as_points(points)
    dx = pts[:, 0] - center[0]
    dy = pts[:, 1] - center[1]
    r = np.hypot(dx, dy)
    keep = r > SNAP_RTOL * max(diameter_estimate(pts), 1e-300)
    alpha = np.mod(np.arctan2(dy[keep], dx[keep]), 2 * math.pi)
    if len(alpha) % 2:
        return None
    s = np.floor(alpha / SECTOR).astype(np.int64)
    beta = alpha - s * SECTOR
    wrap = beta >= SECTOR - atol
    beta[wrap] = 0.0
    s[wrap] += 1
    beta[beta < atol] = 0.0
    s %= 6

    order = np.argsort(beta, kind="stable")
    beta, s = beta[order], s[order]
    interior = np.bincount(s, minlength=6).tolist()
    zeros = [0] * 6
    if len(beta) == 0:
        return 0.0

    # the open interval before the first group is the one after the last, relabeled;
    # group boundaries: consecutive betas within atol form one critical rotation
    cuts = np.flatnonzero(np.diff(beta) > atol) + 1
    starts = np.concatenate(([0], cuts))
    ends = np.concatenate((cuts, [len(beta)]))
    for a, b in zip(starts, ends):
        theta = float(beta[a])
        m = [0] * 6
        for k in s[a:b].tolist():
            interior[k] -= 1
            m[k] += 1
        if _sector_check(interior, m):
            return theta
        for k in s[a:b].tolist():
            interior[(k - 1) % 6] += 1
        if _sector_check(interior, zeros):
            nxt = float(beta[b]) if b < len(beta) else SECTOR
            return 0.5 * (theta + nxt)
    return None


def weber_combinatorial(points, candidates: int = 200, radius_frac: float = 0.05,
                        numeric: Optional[WeberResult] = None) -> WeberResult:
    """Best-effort search for a center with a balanced six-sector partition.

    Starts from the numeric Weber center; if no rotation balances the sectors
    there, tries up to ``candidates`` grid points within ``radius_frac`` of
    the diameter, nearest first.  When nothing balances, the numeric center
    is returned with ``sector_balanced=False``.
    """
    pts = as_points(points)
    if len(pts) == 0:
        raise ValueError("empty instance")
    if len(pts) < 2:
        raise ValueError("combinatorial center needs at least 2 points")
    if numeric is None:
        numeric = weber_numeric(pts)
    c0 = np.array(numeric.center)
    theta = sector_balance(pts, c0)
    if theta is not None:
        return _balanced(numeric, numeric.center, numeric.value, theta)

    radius = radius_frac * diameter_estimate(pts)
    for off in _grid_offsets(radius, candidates):
        c = Point2D(*(c0 + off))
        theta = sector_balance(pts, c)
        if theta is not None:
            return _balanced(numeric, c, fwp_value(pts, c), theta)
    return WeberResult(numeric.center, numeric.value, numeric.method, numeric.iterations,
                       numeric.gradient_norm, numeric.converged, numeric.status,
                       numeric.anchored, False, None, numeric.history)


def _balanced(numeric, center, value, theta):
    return WeberResult(center, value, "combinatorial", numeric.iterations, math.nan,
                       True, "balanced", False, True, theta)


def _grid_offsets(radius, count, half=7):
    ticks = np.arange(-half, half + 1) * (radius / half)
    gx, gy = np.meshgrid(ticks, ticks)
    offs = np.column_stack([gx.ravel(), gy.ravel()])
    norm = np.hypot(offs[:, 0], offs[:, 1])
    ang = np.arctan2(offs[:, 1], offs[:, 0])
    ok = (norm > 0) & (norm <= radius * (1 + 1e-12))
    offs, norm, ang = offs[ok], norm[ok], ang[ok]
    return offs[np.lexsort((ang, norm))][:count]


class _ImprovedStar:
    """Evaluator for the improved star bound at arbitrary centers (O(n^2) per call)."""

    DENSE_LIMIT = 4000

    def __init__(self, pts):
        self.origin = pts.mean(axis=0)
        self.q = pts - self.origin
        self.n = len(pts)
        self.D = None
        if self.n <= self.DENSE_LIMIT:
            diff = self.q[:, None, :] - self.q[None, :, :]
            self.D = np.hypot(diff[..., 0], diff[..., 1])
            np.fill_diagonal(self.D, -np.inf)

    def __call__(self, c) -> float:
        q = self.q
        r = np.hypot(q[:, 0] - c[0], q[:, 1] - c[1])
        if self.D is not None:
            slack = r + (r[None, :] - self.D).min(axis=1)
        else:
            slack = np.empty(self.n)
            step = 1024
            for a in range(0, self.n, step):
                b = min(a + step, self.n)
                blk = np.hypot(q[a:b, None, 0] - q[None, :, 0], q[a:b, None, 1] - q[None, :, 1])
                blk[np.arange(b - a), np.arange(a, b)] = -np.inf
                slack[a:b] = r[a:b] + (r[None, :] - blk).min(axis=1)
        return float(r.sum() - 0.5 * slack.sum())


def improved_star_value(points, center) -> float:
    """The improved star bound evaluated at a fixed center (valid for every center)."""
    pts = as_points(points)
    if len(pts) < 2:
        raise ValueError("improved bound needs at least 2 points")
    ev = _ImprovedStar(pts)
    return ev(np.asarray(center, dtype=float) - ev.origin)


def fwp_improved(points, start, max_iter: int = 200, cap: int = FWP_PRIME_CAP) -> float:
    """Locally minimize the improved star bound over the center, starting at ``start``.

    Every center yields a valid upper bound on the maximum matching, so a
    local optimum is still a bound.  The result never exceeds the value at
    ``start``, which in turn never exceeds the plain star value there.
    """
    pts = as_points(points)
    n = len(pts)
    if n < 2:
        raise ValueError("improved bound needs at least 2 points")
    if n > cap:
        raise ValueError(f"FWP' cap exceeded ({n} > {cap} points)")
    ev = _ImprovedStar(pts)
    c0 = np.asarray(start, dtype=float) - ev.origin
    f0 = ev(c0)
    h = 1e-3 * max(diameter_estimate(ev.q), 1e-300)
    simplex = np.array([c0, c0 + [h, 0.0], c0 + [0.0, h]])
    res = minimize(ev, c0, method="Nelder-Mead",
                   options={"maxiter": max_iter, "initial_simplex": simplex,
                            "xatol": 1e-12 * h, "fatol": 0.0})
    return min(f0, float(res.fun))
