import io

import numpy as np
import pytest
from scipy.integrate import dblquad

from geomax.geometry import Instance
from geomax.instances import (GeneratorConfig, TsplibError, UnsupportedFormatError,
                              cluster_centers, drop_last_if_odd, equilateral_clusters, generate,
                              load_instance, parse_native, parse_tsplib, regular_polygon,
                              write_native, write_tsplib)
from geomax.matching import cross_matching
from geomax.tour import cross_tour
from geomax.weber import weber_numeric

TINY = """NAME : tiny
COMMENT : four corners
TYPE : TSP
DIMENSION : 4
EDGE_WEIGHT_TYPE : EUC_2D
NODE_COORD_SECTION
1 0 0
2 1 0
3 1 1
4 0 1
EOF
"""


def test_parse_minimal():
    inst = parse_tsplib(TINY)
    assert inst.name == "tiny" and inst.source == "tsplib" and inst.n == 4
    assert inst.points.tolist() == [[0, 0], [1, 0], [1, 1], [0, 1]]
    assert parse_tsplib(io.StringIO(TINY), name="x").name == "x"


def test_parse_ceil_and_scientific():
    text = TINY.replace("EUC_2D", "CEIL_2D").replace("2 1 0", "2 1.5e0 0")
    assert parse_tsplib(text).points[1].tolist() == [1.5, 0.0]


def test_parse_unsupported():
    with pytest.raises(UnsupportedFormatError, match="EXPLICIT"):
        parse_tsplib(TINY.replace("EUC_2D", "EXPLICIT"))


def test_parse_deficit():
    text = TINY.replace("DIMENSION : 4", "DIMENSION : 6")
    with pytest.raises(TsplibError, match="deficit 2") as exc:
        parse_tsplib(text)
    assert exc.value.lineno == 6


def test_parse_missing_dimension():
    with pytest.raises(TsplibError, match="DIMENSION"):
        parse_tsplib(TINY.replace("DIMENSION : 4\n", ""))


def test_roundtrips(tmp_path):
    inst = generate(GeneratorConfig(25, "clustered", seed=4))
    back = parse_tsplib(write_tsplib(inst))
    assert np.array_equal(back.points, inst.points)
    back = parse_native(write_native(inst))
    assert np.array_equal(back.points, inst.points) and back.source == "literal"
    p = tmp_path / "x.tsp"
    p.write_text(write_tsplib(inst))
    assert np.array_equal(load_instance(p).points, inst.points)
    p = tmp_path / "y.txt"
    p.write_text(write_native(inst))
    loaded = load_instance(p)
    assert loaded.name == "y" and np.array_equal(loaded.points, inst.points)


def test_native_errors():
    with pytest.raises(ValueError):
        parse_native("")
    with pytest.raises(ValueError):
        parse_native("3\n0 0\n1 1\n")
    with pytest.raises(ValueError):
        parse_native("1\n0 zero\n")


def test_drop_last_if_odd():
    odd = generate(GeneratorConfig(5, seed=1))
    even = drop_last_if_odd(odd)
    assert even.n == 4 and even.name.endswith("-droplast")
    assert np.array_equal(even.points, odd.points[:4])
    same = generate(GeneratorConfig(4, seed=1))
    assert drop_last_if_odd(same) is same
    assert drop_last_if_odd(Instance(np.zeros((1, 2)))).n == 0


def test_uniform_deterministic():
    a = generate(GeneratorConfig(100, seed=7))
    b = generate(GeneratorConfig(100, seed=7))
    c = generate(GeneratorConfig(100, seed=8))
    assert np.array_equal(a.points, b.points) and not np.array_equal(a.points, c.points)
    assert ((a.points >= 0) & (a.points < 1)).all()
    assert a.source == "uniform" and a.seed == 7 and a.name == "100"


def test_clustered_shape():
    cfg = GeneratorConfig(500, "clustered", k=4, cluster_radius=0.05, seed=3)
    inst = generate(cfg)
    assert inst.name == "500c" and inst.meta["k"] == 4
    centers = cluster_centers(cfg)
    assert centers.shape == (4, 2)
    gap = inst.points[:, None, :] - centers[None, :, :]
    assert (np.hypot(gap[..., 0], gap[..., 1]).min(axis=1) <= 0.05 + 1e-12).all()
    assert np.array_equal(generate(cfg).points, inst.points)


def test_degenerate_cluster_does_not_crash():
    pts = generate(GeneratorConfig(40, "clustered", k=1, cluster_radius=1e-9, seed=0)).points
    assert cross_matching(pts).value >= 0
    assert len(cross_tour(pts).order) == 40


def test_config_validation():
    for kw in ({"n": 0}, {"n": 5, "k": 0}, {"n": 5, "cluster_radius": 0.6},
               {"n": 5, "kind": "gaussian"}):
        with pytest.raises(ValueError):
            GeneratorConfig(**kw)


def test_literals():
    assert regular_polygon(6).n == 6
    assert equilateral_clusters(9).n == 9
    with pytest.raises(ValueError):
        equilateral_clusters(7)


def test_uniform_star_limit():
    # mean distance from the square's centre to a uniform point
    ref, _ = dblquad(lambda y, x: np.hypot(x, y), -0.5, 0.5, -0.5, 0.5)
    assert ref == pytest.approx(0.38259785, abs=1e-8)
    pts = generate(GeneratorConfig(100_000, seed=1)).points
    assert weber_numeric(pts).value / 100_000 == pytest.approx(ref, abs=0.003)
