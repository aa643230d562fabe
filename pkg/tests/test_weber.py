import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from _corpus import SQRT3, SQUARE
from geomax.exact import brute_matching
from geomax.instances import GeneratorConfig, equilateral_clusters, generate
from geomax.weber import (fwp_improved, fwp_value, improved_star_value, sector_balance,
                          weber_combinatorial, weber_numeric)


def star_oracle(pts):
    """Independent minimum of the star objective: scipy from several starts."""
    f = lambda c: np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1]).sum()
    starts = [pts.mean(axis=0), np.median(pts, axis=0)] + list(pts[:3])
    best = min((minimize(f, s, method="Nelder-Mead",
                         options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 20000})
                for s in starts), key=lambda r: r.fun)
    return best.fun


def balanced_by_enumeration(pts, center, theta, atol=1e-9):
    """Count sectors at rotation theta, trying every split of boundary points."""
    sector = math.pi / 3
    interior = [0] * 6
    boundary = [0] * 6  # boundary[k]: points on the ray at theta + k*sector
    for x, y in pts:
        dx, dy = x - center[0], y - center[1]
        if math.hypot(dx, dy) <= 1e-12:
            continue
        a = (math.atan2(dy, dx) - theta) % (2 * math.pi)
        k, rem = divmod(a, sector)
        k = int(k) % 6
        if rem < atol:
            boundary[k] += 1
        elif sector - rem < atol:
            boundary[(k + 1) % 6] += 1
        else:
            interior[k] += 1
    for split in itertools.product(*(range(m + 1) for m in boundary)):
        cnt = interior[:]
        for k in range(6):
            cnt[k] += split[k]
            cnt[(k - 1) % 6] += boundary[k] - split[k]
        if all(cnt[k] == cnt[k + 3] for k in range(3)):
            return True
    return False


def test_two_points():
    w = weber_numeric([(0, 0), (2, 0)])
    assert w.value == pytest.approx(2.0, rel=1e-12)
    assert 0 <= w.center.x <= 2 and abs(w.center.y) < 1e-12


def test_equilateral_triangle():
    pts = [(0, 0), (1, 0), (0.5, SQRT3 / 2)]
    w = weber_numeric(pts)
    assert w.value == pytest.approx(SQRT3, rel=1e-10)
    assert w.center.x == pytest.approx(0.5, abs=1e-9)
    assert w.center.y == pytest.approx(SQRT3 / 6, abs=1e-9)
    assert w.converged and not w.anchored


def test_square():
    w = weber_numeric(SQUARE)
    assert w.value == pytest.approx(2 * math.sqrt(2), rel=1e-12)
    assert (w.center.x, w.center.y) == pytest.approx((0.5, 0.5), abs=1e-10)
    assert fwp_value(SQUARE, (0.5, 0.5)) == pytest.approx(2 * math.sqrt(2), rel=1e-15)


def test_empty_raises():
    with pytest.raises(ValueError, match="empty instance"):
        weber_numeric(np.zeros((0, 2)))


def test_single_point():
    w = weber_numeric([(3.0, 4.0)])
    assert w.value == 0.0 and tuple(w.center) == (3.0, 4.0)


def test_anchored_at_obtuse_vertex():
    # angle at the origin is about 174 degrees, so the median sits on that vertex
    pts = [(0.0, 0.0), (1.0, 0.0), (-0.9, 0.1)]
    w = weber_numeric(pts)
    assert w.anchored and w.status == "anchored"
    assert tuple(w.center) == (0.0, 0.0)
    assert w.value == pytest.approx(1.0 + math.hypot(0.9, 0.1), rel=1e-15)
    assert math.isnan(w.gradient_norm)


def test_anchored_on_multiplicity():
    # three coincident points outweigh the two others
    pts = [(0, 0)] * 3 + [(1, 0), (0, 1)]
    w = weber_numeric(pts)
    assert tuple(w.center) == (0.0, 0.0) and w.anchored


def test_collinear():
    w = weber_numeric([(0, 0), (1, 0), (5, 0)])
    assert w.value == pytest.approx(5.0, rel=1e-12)
    assert w.center.x == pytest.approx(1.0, abs=1e-9)


def test_max_iter_reports_nonconvergence():
    pts = generate(GeneratorConfig(50, "uniform", seed=3)).points
    w = weber_numeric(pts, max_iter=1)
    assert not w.converged and w.status == "max_iter"
    assert w.value >= weber_numeric(pts).value - 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 80), st.sampled_from(["uniform", "clustered"]))
def test_matches_independent_minimizer(seed, n, kind):
    pts = generate(GeneratorConfig(n, kind, seed=seed)).points
    w = weber_numeric(pts)
    ref = star_oracle(pts)
    assert w.value <= ref * (1 + 1e-9) + 1e-12
    assert w.value >= ref * (1 - 1e-7)
    hist = np.array(w.history)
    assert (np.diff(hist) <= 1e-12 * hist[0]).all()
    assert w.value == pytest.approx(fwp_value(pts, w.center), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-100, 100), st.floats(-100, 100),
       st.floats(0.01, 100))
def test_similarity_equivariance(seed, tx, ty, s):
    pts = np.random.default_rng(seed).uniform(0, 1, size=(30, 2))
    a = weber_numeric(pts)
    b = weber_numeric(s * pts + [tx, ty])
    assert b.value == pytest.approx(s * a.value, rel=1e-8)
    assert b.center.x == pytest.approx(s * a.center.x + tx, abs=1e-6 * s + 1e-9)


def test_sector_balance_square():
    theta = sector_balance(SQUARE, (0.5, 0.5))
    assert theta is not None
    assert balanced_by_enumeration(SQUARE, (0.5, 0.5), theta)


def test_sector_balance_clusters(tri6):
    theta = sector_balance(tri6, (0.0, 0.0))
    assert theta == 0.0
    assert balanced_by_enumeration(tri6, (0, 0), theta)


def test_sector_balance_odd_and_empty():
    assert sector_balance([(1, 0), (0, 1), (-1, 0)], (0, 0)) is None
    assert sector_balance(np.zeros((0, 2)), (0, 0)) == 0.0


def test_sector_balance_impossible():
    # all points in a narrow wedge: opposite sectors are empty
    pts = [(1, 0.01 * i) for i in range(4)]
    assert sector_balance(pts, (0, 0)) is None


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_sector_balance_against_enumeration(seed, half):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, size=(2 * half, 2))
    c = rng.uniform(-0.3, 0.3, size=2)
    theta = sector_balance(pts, c)
    if theta is not None:
        assert 0 <= theta < math.pi / 3
        assert balanced_by_enumeration(pts, c, theta)
    else:
        # every critical rotation and every gap midpoint fails
        a = np.sort(np.mod(np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0]), math.pi / 3))
        cand = np.concatenate([a, (a[:-1] + a[1:]) / 2, [(a[-1] + a[0] + math.pi / 3) / 2]])
        assert not any(balanced_by_enumeration(pts, c, t) for t in cand)


def test_combinatorial_balanced_examples(tri6):
    c = weber_combinatorial(tri6)
    assert c.sector_balanced and c.status == "balanced"
    assert (c.center.x, c.center.y) == pytest.approx((0.0, 0.0), abs=1e-12)
    s = weber_combinatorial(SQUARE)
    assert s.sector_balanced


@pytest.mark.parametrize("seed", range(10))
def test_combinatorial_not_better_than_numeric(seed):
    pts = generate(GeneratorConfig(40, "clustered", k=3, seed=seed)).points
    num = weber_numeric(pts)
    com = weber_combinatorial(pts, numeric=num)
    assert num.value <= com.value * (1 + 1e-12)
    if com.sector_balanced:
        assert balanced_by_enumeration(pts, com.center, com.rotation)
    again = weber_numeric(pts, start=com.center)
    assert again.value <= com.value * (1 + 1e-12)


def test_combinatorial_errors():
    with pytest.raises(ValueError):
        weber_combinatorial(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        weber_combinatorial([(0, 0)])


def test_improved_examples(tri6):
    assert fwp_improved(tri6, (0, 0)) == pytest.approx(6 * SQRT3, rel=1e-9)
    assert fwp_improved(SQUARE, (0.5, 0.5)) == pytest.approx(2 * math.sqrt(2), rel=1e-9)
    # at the origin: radii 2, slack to the other clusters 4 - 2*sqrt3 each
    assert improved_star_value(tri6, (0, 0)) == pytest.approx(12 - 3 * (4 - 2 * SQRT3),
                                                              rel=1e-12)


def test_improved_cap_and_small():
    pts = np.random.default_rng(0).uniform(size=(20, 2))
    with pytest.raises(ValueError, match="cap exceeded"):
        fwp_improved(pts, (0.5, 0.5), cap=10)
    with pytest.raises(ValueError):
        fwp_improved([(0, 0)], (0, 0))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_improved_between_optimum_and_star(seed, half):
    pts = np.random.default_rng(seed).uniform(size=(2 * half, 2))
    w = weber_numeric(pts)
    fp = fwp_improved(pts, w.center)
    assert fp <= w.value * (1 + 1e-12)
    assert brute_matching(pts).value <= fp * (1 + 1e-9)
    # any centre gives a valid bound
    c = np.random.default_rng(seed + 1).uniform(-1, 2, size=2)
    assert brute_matching(pts).value <= improved_star_value(pts, c) * (1 + 1e-9)


def test_improved_chunked_matches_dense(monkeypatch):
    from geomax import weber
    pts = np.random.default_rng(4).uniform(size=(300, 2))
    dense = improved_star_value(pts, (0.4, 0.55))
    monkeypatch.setattr(weber._ImprovedStar, "DENSE_LIMIT", 10)
    assert improved_star_value(pts, (0.4, 0.55)) == pytest.approx(dense, rel=1e-12)


def test_equilateral_clusters_center():
    for n in (6, 12, 30):
        w = weber_numeric(equilateral_clusters(n).points)
        assert w.value == pytest.approx(2 * n, rel=1e-12)
