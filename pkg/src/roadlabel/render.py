"""SVG output: roads drawn with their style, names set along label paths."""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

from .labelcore import Labeling
from .roadgraph import RoadGraph

CASING = "#8c8c8c"
TEXT = "#222222"


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _path_data(points, flip) -> str:
    pts = [flip(p) for p in points]
    head = f"M{_fmt(pts[0][0])},{_fmt(pts[0][1])}"
    return head + "".join(f" L{_fmt(x)},{_fmt(y)}" for x, y in pts[1:])


def svg_document(g: RoadGraph, labeling: Labeling, margin: float | None = None) -> str:
    """Deterministic SVG text for ``g`` with ``labeling`` on top."""
    xs = [p[0] for p in g.vertices.values()] + [c[0] for e in g.edges.values() for c in e.geometry.coords]
    ys = [p[1] for p in g.vertices.values()] + [c[1] for e in g.edges.values() for c in e.geometry.coords]
    if not xs:
        xs, ys = [0.0], [0.0]
    widest = max((r.stroke for r in g.roads.values()), default=1.0)
    pad = margin if margin is not None else 2 * widest
    x0, x1 = min(xs) - pad, max(xs) + pad
    y0, y1 = min(ys) - pad, max(ys) + pad
    w, h = x1 - x0, y1 - y0

    def flip(p):
        # map y grows north, SVG y grows down
        return (p[0] - x0, y1 - p[1])

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" '
        f'width="{_fmt(w)}" height="{_fmt(h)}" viewBox="0 0 {_fmt(w)} {_fmt(h)}">',
        f'<rect width="{_fmt(w)}" height="{_fmt(h)}" fill="#f2efe9"/>',
    ]
    order = sorted(g.edges.values(), key=lambda e: (g.roads[e.road].rank, e.id))
    out.append('<g id="casing" fill="none" stroke-linecap="round" stroke-linejoin="round">')
    for e in order:
        r = g.roads[e.road]
        out.append(
            f'<path d="{_path_data(e.geometry.coords, flip)}" stroke="{CASING}" stroke-width="{_fmt(r.stroke * 1.2)}"/>'
        )
    out.append("</g>")
    out.append('<g id="roads" fill="none" stroke-linecap="round" stroke-linejoin="round">')
    for e in order:
        r = g.roads[e.road]
        out.append(
            f'<path d="{_path_data(e.geometry.coords, flip)}" stroke={quoteattr(r.color)} stroke-width="{_fmt(r.stroke)}"/>'
        )
    out.append("</g>")
    labels = labeling.sorted().labels
    if labels:
        out.append("<defs>")
        for i, label in enumerate(labels):
            pts = list(label.polyline(g).coords)
            # read left to right
            if pts[-1][0] < pts[0][0] - 1e-9 or (math.isclose(pts[-1][0], pts[0][0]) and pts[-1][1] < pts[0][1]):
                pts.reverse()
            out.append(f'<path id="label{i}" d="{_path_data(pts, flip)}"/>')
        out.append("</defs>")
        out.append(f'<g id="labels" fill="{TEXT}" font-family="monospace">')
        for i, label in enumerate(labels):
            r = g.roads[label.road]
            out.append(
                f'<text font-size="{_fmt(r.font)}" dominant-baseline="central">'
                f'<textPath xlink:href="#label{i}" href="#label{i}">{escape(r.name)}</textPath></text>'
            )
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_svg(g: RoadGraph, labeling: Labeling, path: str | Path) -> None:
    Path(path).write_text(svg_document(g, labeling), encoding="utf-8")
