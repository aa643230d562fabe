"""Standalone SVG drawings of point sets with a matching or tour on top."""

from __future__ import annotations

from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

from .geometry import as_points
from .matching import Matching
from .tour import Tour

CANVAS = 800.0
MARGIN = 0.05


def _num(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".") if v == v else "0"


def render_svg(points, solution: Optional[object] = None, title: Optional[str] = None) -> str:
    """SVG 1.1 document: points as circles, solution edges as lines.

    The viewport is the bounding box plus a 5% margin on every side; y
    grows upward as in the input coordinates.  Output bytes depend only on
    the inputs.
    """
    pts = as_points(points)
    if len(pts) == 0:
        raise ValueError("nothing to render: empty instance")
    lo = pts.min(axis=0)
    span = pts.max(axis=0) - lo
    side = float(span.max()) or 1.0
    pad = MARGIN * side
    scale = CANVAS / (side + 2 * pad)
    w = (float(span[0]) + 2 * pad) * scale
    h = (float(span[1]) + 2 * pad) * scale
    xs = (pts[:, 0] - lo[0] + pad) * scale
    ys = h - (pts[:, 1] - lo[1] + pad) * scale
    radius = max(0.6, min(4.0, 0.25 * CANVAS / np.sqrt(len(pts))))

    edges = np.zeros((0, 2), dtype=np.int64)
    if isinstance(solution, Matching):
        edges = np.asarray(solution.pairs, dtype=np.int64)
    elif isinstance(solution, Tour):
        edges = solution.edges()
    elif solution is not None:
        raise TypeError(f"cannot render solution of type {type(solution).__name__}")

    out = ['<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
           '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'width="{_num(w)}" height="{_num(h)}" viewBox="0 0 {_num(w)} {_num(h)}">']
    if title:
        out.append(f"<title>{escape(title)}</title>")
    out.append('<rect width="100%" height="100%" fill="white"/>')
    if len(edges):
        out.append('<g stroke="#1f5fa8" stroke-width="0.8" stroke-opacity="0.7">')
        for a, b in edges.tolist():
            out.append(f'<line x1="{_num(xs[a])}" y1="{_num(ys[a])}" '
                       f'x2="{_num(xs[b])}" y2="{_num(ys[b])}"/>')
        out.append("</g>")
    out.append('<g fill="#c0392b">')
    r = _num(radius)
    for x, y in zip(xs.tolist(), ys.tolist()):
        out.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="{r}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
