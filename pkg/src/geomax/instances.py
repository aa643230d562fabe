"""Instance sources: a TSPLIB subset, a plain native format, and random generators.

Random streams
--------------
Generators use numpy's PCG64 bit generator.  The 64-bit seed feeds a
``SeedSequence`` that is split with ``spawn(2)``: child 0 draws cluster
centers, child 1 draws the points.  Uniform instances fill an ``(n, 2)``
block from child 1 in row order, i.e. x then y per point.  Clustered
instances draw, from child 1 and in this order, ``n`` cluster labels, ``n``
radii in ``[0, r)`` and ``n`` angles in ``[0, 2*pi)``.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import Instance

SUPPORTED_WEIGHT_TYPES = ("EUC_2D", "CEIL_2D")


class TsplibError(ValueError):
    def __init__(self, message: str, lineno: Optional[int] = None):
        self.lineno = lineno
        super().__init__(message if lineno is None else f"line {lineno}: {message}")


class UnsupportedFormatError(TsplibError):
    pass


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    kind: str = "uniform"
    k: int = 5
    cluster_radius: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not 0.0 < self.cluster_radius < 0.5:
            raise ValueError("cluster_radius must lie in (0, 0.5)")
        if self.kind not in ("uniform", "clustered"):
            raise ValueError(f"unknown generator kind {self.kind!r}")


def _streams(seed: int):
    children = np.random.SeedSequence(int(seed) & (2**64 - 1)).spawn(2)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def gen_uniform(config: GeneratorConfig) -> Instance:
    if config.kind != "uniform":
        raise ValueError("gen_uniform needs kind='uniform'")
    _, rng = _streams(config.seed)
    pts = rng.random((config.n, 2))
    return Instance(pts, f"{config.n}", "uniform", config.seed)


def cluster_centers(config: GeneratorConfig) -> np.ndarray:
    """The ``k`` cluster centers a clustered config draws, inside ``[r, 1-r]^2``."""
    rng, _ = _streams(config.seed)
    r = config.cluster_radius
    return rng.uniform(r, 1.0 - r, size=(config.k, 2))


def gen_clustered(config: GeneratorConfig) -> Instance:
    """Points in ``k`` discs of radius ``cluster_radius``, uniform in polar coordinates.

    Each point picks its cluster uniformly at random, so cluster sizes are
    ``n/k`` only in expectation.  The radius is uniform on ``[0, r)``, which
    concentrates points toward the cluster centers.
    """
    if config.kind != "clustered":
        raise ValueError("gen_clustered needs kind='clustered'")
    centers = cluster_centers(config)
    _, rng = _streams(config.seed)
    n = config.n
    label = rng.integers(0, config.k, size=n)
    rad = rng.uniform(0.0, config.cluster_radius, size=n)
    ang = rng.uniform(0.0, 2 * math.pi, size=n)
    pts = centers[label] + np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    return Instance(pts, f"{n}c", "clustered", config.seed, {"k": config.k})


def generate(config: GeneratorConfig) -> Instance:
    return gen_uniform(config) if config.kind == "uniform" else gen_clustered(config)


def drop_last_if_odd(instance: Instance) -> Instance:
    if len(instance) % 2 == 0:
        return instance
    return Instance(instance.points[:-1], f"{instance.name}-droplast", instance.source,
                    instance.seed, dict(instance.meta))


def regular_polygon(n: int, radius: float = 1.0, phase: float = 0.0) -> Instance:
    t = phase + 2 * math.pi * np.arange(n) / n
    return Instance(np.column_stack([radius * np.cos(t), radius * np.sin(t)]),
                    f"regular{n}", "literal")


def equilateral_clusters(n: int) -> Instance:
    """``n/3`` coincident points at each of (-2, 0), (1, sqrt 3), (1, -sqrt 3)."""
    if n % 3:
        raise ValueError("n must be a multiple of 3")
    s3 = math.sqrt(3.0)
    base = np.array([(-2.0, 0.0), (1.0, s3), (1.0, -s3)])
    return Instance(np.tile(base, (n // 3, 1)), f"tri{n}", "literal")


def parse_tsplib(text, name: Optional[str] = None) -> Instance:
    """Read a 2-D TSPLIB instance (EUC_2D or CEIL_2D coordinates).

    ``text`` is a string or a text stream.  Coordinates are kept as given;
    callers measure true Euclidean distances, never rounded ones.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    header = {}
    coords = []
    in_coords = False
    section_line = None
    lineno = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        if line == "EOF":
            break
        if in_coords:
            parts = line.split()
            if len(parts) == 3 and not parts[0].rstrip(":").isalpha():
                try:
                    coords.append((float(parts[1]), float(parts[2])))
                except ValueError:
                    raise TsplibError(f"bad coordinate row {line!r}", lineno) from None
                continue
            in_coords = False
        key, sep, value = line.partition(":")
        key = key.strip().upper()
        if key == "NODE_COORD_SECTION":
            in_coords = True
            section_line = lineno
            if "DIMENSION" not in header:
                raise TsplibError("NODE_COORD_SECTION before DIMENSION", lineno)
            continue
        if key.endswith("_SECTION"):
            raise UnsupportedFormatError(f"unsupported section {key}", lineno)
        if sep:
            header[key] = (value.strip(), lineno)
            if key == "EDGE_WEIGHT_TYPE" and value.strip().upper() not in SUPPORTED_WEIGHT_TYPES:
                raise UnsupportedFormatError(f"unsupported EDGE_WEIGHT_TYPE {value.strip()}",
                                             lineno)
            if key == "DIMENSION":
                try:
                    int(value)
                except ValueError:
                    raise TsplibError(f"bad DIMENSION {value.strip()!r}", lineno) from None
        else:
            raise TsplibError(f"unrecognized line {line!r}", lineno)

    if "DIMENSION" not in header:
        raise TsplibError("missing DIMENSION", lineno)
    if section_line is None:
        raise TsplibError("missing NODE_COORD_SECTION", lineno)
    dim = int(header["DIMENSION"][0])
    if len(coords) != dim:
        raise TsplibError(
            f"DIMENSION is {dim} but {len(coords)} coordinate rows were read "
            f"(deficit {dim - len(coords)})", section_line)
    label = name or header.get("NAME", ("tsplib", 0))[0]
    return Instance(np.array(coords, dtype=float).reshape(-1, 2), label, "tsplib")


def write_tsplib(instance: Instance) -> str:
    lines = [f"NAME : {instance.name}", "TYPE : TSP", f"DIMENSION : {len(instance)}",
             "EDGE_WEIGHT_TYPE : EUC_2D", "NODE_COORD_SECTION"]
    lines += [f"{i + 1} {x!r} {y!r}" for i, (x, y) in enumerate(instance.points.tolist())]
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def write_native(instance: Instance) -> str:
    rows = [f"{x!r} {y!r}" for x, y in instance.points.tolist()]
    return "\n".join([str(len(rows))] + rows) + "\n"


def parse_native(text, name: str = "native") -> Instance:
    stream = io.StringIO(text) if isinstance(text, str) else text
    lines = [ln for ln in (raw.strip() for raw in stream) if ln]
    if not lines:
        raise ValueError("empty native instance")
    try:
        n = int(lines[0])
        pts = [tuple(float(v) for v in ln.split()) for ln in lines[1:]]
    except ValueError as exc:
        raise ValueError(f"bad native instance: {exc}") from None
    if len(pts) != n or any(len(p) != 2 for p in pts):
        raise ValueError(f"native instance declares {n} points but has {len(pts)} rows")
    return Instance(np.array(pts, dtype=float).reshape(-1, 2), name, "literal")


def load_instance(path) -> Instance:
    """Read a TSPLIB or native file, chosen by content."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    base = os.path.splitext(os.path.basename(str(path)))[0]
    if "NODE_COORD_SECTION" in text or "DIMENSION" in text:
        return parse_tsplib(text)
    return parse_native(text, base)
