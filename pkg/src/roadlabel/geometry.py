"""Planar geometry primitives used throughout the labeling pipeline.

Polylines carry a cached arc-length table so that label endpoints can be
addressed by geodesic offset. Polygons are plain shapely polygons, oriented
with a counterclockwise exterior and clockwise holes.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import shapely
from shapely.geometry import LineString, MultiPolygon, Polygon
from shapely.geometry.polygon import orient

EPS = 1e-9
CAP_CHORDS = 8

Point = tuple[float, float]


class Polyline:
    """Immutable polyline with cumulative arc lengths."""

    __slots__ = ("coords", "cum")

    def __init__(self, coords: Iterable[Sequence[float]]):
        pts: list[Point] = []
        for x, y in coords:
            p = (float(x), float(y))
            if not (math.isfinite(p[0]) and math.isfinite(p[1])):
                raise ValueError(f"non-finite coordinate {p}")
            if pts and math.hypot(p[0] - pts[-1][0], p[1] - pts[-1][1]) <= EPS:
                continue
            pts.append(p)
        if len(pts) < 2:
            raise ValueError("polyline needs at least two distinct vertices")
        cum = [0.0]
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            cum.append(cum[-1] + math.hypot(x1 - x0, y1 - y0))
        self.coords = tuple(pts)
        self.cum = tuple(cum)

    @property
    def length(self) -> float:
        return self.cum[-1]

    def __len__(self) -> int:
        return len(self.coords)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Polyline) and self.coords == other.coords

    def __hash__(self) -> int:
        return hash(self.coords)

    def __repr__(self) -> str:
        return f"Polyline({list(self.coords)!r})"

    def point_at(self, s: float) -> Point:
        return point_at_arclength(self, s)

    def reversed(self) -> Polyline:
        return Polyline(self.coords[::-1])

    def start_direction(self) -> Point:
        return _unit(self.coords[0], self.coords[1])

    def end_direction(self) -> Point:
        return _unit(self.coords[-2], self.coords[-1])

    def bends(self) -> list[tuple[float, float]]:
        """(arc position, absolute turning angle in degrees) per interior vertex."""
        out = []
        for i in range(1, len(self.coords) - 1):
            d0 = _unit(self.coords[i - 1], self.coords[i])
            d1 = _unit(self.coords[i], self.coords[i + 1])
            out.append((self.cum[i], turn_angle(d0, d1)))
        return out

    def sub(self, a: float, b: float) -> Polyline:
        """Sub-polyline between arc positions a < b."""
        a = max(0.0, a)
        b = min(self.length, b)
        if b - a <= EPS:
            raise ValueError(f"empty sub-polyline [{a}, {b}]")
        pts = [self.point_at(a)]
        i = bisect_right(self.cum, a)
        while i < len(self.cum) and self.cum[i] < b:
            pts.append(self.coords[i])
            i += 1
        pts.append(self.point_at(b))
        return Polyline(pts)

    def project(self, pt: Sequence[float]) -> float:
        """Arc position of the point of the polyline closest to ``pt``."""
        best_d, best_s = math.inf, 0.0
        px, py = pt
        for i in range(len(self.coords) - 1):
            (x0, y0), (x1, y1) = self.coords[i], self.coords[i + 1]
            dx, dy = x1 - x0, y1 - y0
            seg2 = dx * dx + dy * dy
            t = ((px - x0) * dx + (py - y0) * dy) / seg2
            t = min(1.0, max(0.0, t))
            qx, qy = x0 + t * dx, y0 + t * dy
            d = math.hypot(px - qx, py - qy)
            if d < best_d - EPS:
                best_d, best_s = d, self.cum[i] + t * math.sqrt(seg2)
        return best_s

    def to_shapely(self) -> LineString:
        return LineString(self.coords)


def _unit(a: Point, b: Point) -> Point:
    dx, dy = b[0] - a[0], b[1] - a[1]
    n = math.hypot(dx, dy)
    return (dx / n, dy / n)


def turn_angle(d0: Sequence[float], d1: Sequence[float]) -> float:
    """Absolute turning angle in degrees between two unit directions."""
    c = max(-1.0, min(1.0, d0[0] * d1[0] + d0[1] * d1[1]))
    return math.degrees(math.acos(c))


def point_at_arclength(p: Polyline, s: float) -> Point:
    """Point at geodesic distance ``s`` from the first vertex of ``p``."""
    total = p.cum[-1]
    if s < -EPS or s > total + EPS:
        raise ValueError(f"arc length {s} outside [0, {total}]")
    if s <= 0.0:
        return p.coords[0]
    if s >= total:
        return p.coords[-1]
    i = bisect_right(p.cum, s) - 1
    seg = p.cum[i + 1] - p.cum[i]
    t = (s - p.cum[i]) / seg
    (x0, y0), (x1, y1) = p.coords[i], p.coords[i + 1]
    return (x0 + t * (x1 - x0), y0 + t * (y1 - y0))


def hull(segment: Sequence[Sequence[float]], width: float) -> Polygon:
    """Capsule of radius ``width`` around a segment.

    Each cap is a half-circle inscribed with ``CAP_CHORDS`` chords, so the
    polygon is contained in the exact capsule.
    """
    if not width > 0:
        raise ValueError("hull width must be positive")
    (ax, ay), (bx, by) = segment
    length = math.hypot(bx - ax, by - ay)
    if length <= EPS:
        raise ValueError("degenerate segment")
    base = math.atan2(by - ay, bx - ax)
    ring = []
    for cx, cy, start in ((bx, by, base - math.pi / 2), (ax, ay, base + math.pi / 2)):
        for k in range(CAP_CHORDS + 1):
            ang = start + math.pi * k / CAP_CHORDS
            ring.append((cx + width * math.cos(ang), cy + width * math.sin(ang)))
    return orient(Polygon(ring), 1.0)


def polyline_hull(p: Polyline, width: float) -> Polygon:
    """Union of the segment hulls of a polyline (round joins, same chord count)."""
    poly = p.to_shapely().buffer(width, quad_segs=CAP_CHORDS // 2)
    return orient(poly, 1.0)


def _polygons(geom) -> list[Polygon]:
    if geom.is_empty:
        return []
    if isinstance(geom, Polygon):
        return [geom]
    if isinstance(geom, MultiPolygon):
        return list(geom.geoms)
    return [g for g in getattr(geom, "geoms", []) if isinstance(g, Polygon)]


def polygon_union(polys: Iterable[Polygon]) -> list[Polygon]:
    """Union of polygons as disjoint oriented polygons in a stable order."""
    polys = list(polys)
    for p in polys:
        if not p.is_valid:
            raise ValueError(f"invalid polygon: {shapely.is_valid_reason(p)}")
    merged = shapely.unary_union(polys)
    out = [orient(p, 1.0) for p in _polygons(merged) if p.area > 0]
    out.sort(key=lambda p: (p.bounds, p.area))
    return out


@dataclass(frozen=True)
class Triangle:
    vertices: tuple[Point, Point, Point]
    # internal[i] flags the edge vertices[i] -> vertices[(i + 1) % 3]
    internal: tuple[bool, bool, bool]

    @property
    def centroid(self) -> Point:
        (ax, ay), (bx, by), (cx, cy) = self.vertices
        return ((ax + bx + cx) / 3.0, (ay + by + cy) / 3.0)

    def edge(self, i: int) -> tuple[Point, Point]:
        return self.vertices[i], self.vertices[(i + 1) % 3]

    @property
    def area(self) -> float:
        (ax, ay), (bx, by), (cx, cy) = self.vertices
        return abs((bx - ax) * (cy - ay) - (cx - ax) * (by - ay)) / 2.0


def _edge_key(a: Point, b: Point) -> tuple[Point, Point]:
    return (a, b) if a <= b else (b, a)


def triangulate_interior(
    poly: Polygon, constraint_points: Sequence[Point] = ()
) -> list[Triangle]:
    """Constrained Delaunay triangulation of a polygon interior.

    ``constraint_points`` lying on the boundary are inserted as extra
    boundary vertices; interior points are not supported.
    """
    if not poly.is_valid:
        raise ValueError(f"invalid polygon: {shapely.is_valid_reason(poly)}")
    if constraint_points:
        poly = _insert_boundary_points(poly, constraint_points)
    tris = shapely.constrained_delaunay_triangles(poly)
    raw = []
    for t in tris.geoms:
        c = t.exterior.coords[:3]
        if Polygon(c).area <= EPS * EPS:
            continue
        raw.append(tuple((float(x), float(y)) for x, y in c))
    use: dict[tuple[Point, Point], int] = {}
    for v in raw:
        for i in range(3):
            k = _edge_key(v[i], v[(i + 1) % 3])
            use[k] = use.get(k, 0) + 1
    return [
        Triangle(v, tuple(use[_edge_key(v[i], v[(i + 1) % 3])] > 1 for i in range(3)))
        for v in raw
    ]


def _insert_boundary_points(poly: Polygon, points: Sequence[Point]) -> Polygon:
    def refine(ring):
        coords = list(ring.coords)[:-1]
        out = []
        for i, a in enumerate(coords):
            b = coords[(i + 1) % len(coords)]
            out.append(a)
            seg = LineString([a, b])
            extra = [
                (seg.project(shapely.Point(p)), p)
                for p in points
                if seg.distance(shapely.Point(p)) <= EPS and p != a and p != b
            ]
            out.extend(p for _, p in sorted(extra))
        return out

    return Polygon(refine(poly.exterior), [refine(r) for r in poly.interiors])


def _point_segment_distance(p: Point, a: Point, b: Point) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = max(0.0, min(1.0, ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / seg2))
    return math.hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy)


def simplify_with_clearance(
    p: Polyline,
    tolerance: float,
    container: Polygon | None = None,
    clearance: float = 0.0,
) -> Polyline:
    """Douglas-Peucker simplification that refuses shortcuts near the container boundary.

    A shortcut between two kept vertices is taken only when every skipped
    vertex is closer than ``tolerance`` to it and, if a container is given,
    the shortcut stays inside the container at distance ``clearance`` or
    more from its boundary.
    """
    pts = p.coords
    if tolerance <= 0 or len(pts) <= 2:
        return p
    boundary = container.boundary if container is not None else None
    keep = [False] * len(pts)
    keep[0] = keep[-1] = True
    stack = [(0, len(pts) - 1)]
    while stack:
        i, j = stack.pop()
        if j <= i + 1:
            continue
        dmax, k = -1.0, i + 1
        for m in range(i + 1, j):
            d = _point_segment_distance(pts[m], pts[i], pts[j])
            if d > dmax:
                dmax, k = d, m
        if dmax < tolerance and _shortcut_clear(pts[i], pts[j], container, boundary, clearance):
            continue
        keep[k] = True
        stack.append((k, j))
        stack.append((i, k))
    return Polyline(q for q, flag in zip(pts, keep) if flag)


def _shortcut_clear(a, b, container, boundary, clearance) -> bool:
    if container is None:
        return True
    seg = LineString([a, b])
    if not container.covers(seg):
        return False
    return seg.distance(boundary) >= clearance - EPS


class SegmentOverlap(NamedTuple):
    """Collinear overlap of two segments, endpoints ordered along the first."""

    start: Point
    end: Point


def segment_intersection(
    a: Sequence[Point], b: Sequence[Point], tol: float = 0.0
) -> Point | SegmentOverlap | None:
    """Intersection of two segments with endpoint snapping.

    Returns the crossing point, a snapped point when an endpoint of one
    segment lies within ``tol`` of the other, a ``SegmentOverlap`` for
    collinear overlaps, or None.
    """
    (ax, ay), (bx, by) = a
    (cx, cy), (dx, dy) = b
    rx, ry = bx - ax, by - ay
    sx, sy = dx - cx, dy - cy
    la, lb = math.hypot(rx, ry), math.hypot(sx, sy)
    denom = rx * sy - ry * sx
    if abs(denom) <= EPS * la * lb:
        return _parallel_case(a, b, tol, la)
    t = ((cx - ax) * sy - (cy - ay) * sx) / denom
    u = ((cx - ax) * ry - (cy - ay) * rx) / denom
    slack_t = EPS / la
    slack_u = EPS / lb
    if -slack_t <= t <= 1 + slack_t and -slack_u <= u <= 1 + slack_u:
        t = min(1.0, max(0.0, t))
        return (ax + t * rx, ay + t * ry)
    if tol > 0:
        for p, (q0, q1) in ((a[0], b), (a[1], b), (b[0], a), (b[1], a)):
            if _point_segment_distance(p, q0, q1) <= tol:
                return _project_onto(p, q0, q1)
    return None


def _project_onto(p: Point, a: Point, b: Point) -> Point:
    dx, dy = b[0] - a[0], b[1] - a[1]
    t = max(0.0, min(1.0, ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)))
    return (a[0] + t * dx, a[1] + t * dy)


def _parallel_case(a, b, tol, la):
    tol = max(tol, EPS)
    ux, uy = (a[1][0] - a[0][0]) / la, (a[1][1] - a[0][1]) / la
    offsets = [abs((q[0] - a[0][0]) * uy - (q[1] - a[0][1]) * ux) for q in b]
    if max(offsets) > tol:
        # parallel but not collinear: only endpoint contact is possible
        for p, (q0, q1) in ((a[0], b), (a[1], b), (b[0], a), (b[1], a)):
            if _point_segment_distance(p, q0, q1) <= tol:
                return _project_onto(p, q0, q1)
        return None
    s0 = (b[0][0] - a[0][0]) * ux + (b[0][1] - a[0][1]) * uy
    s1 = (b[1][0] - a[0][0]) * ux + (b[1][1] - a[0][1]) * uy
    lo, hi = max(0.0, min(s0, s1)), min(la, max(s0, s1))
    if hi < lo - tol:
        return None
    p_lo = (a[0][0] + lo * ux, a[0][1] + lo * uy)
    if hi - lo <= EPS:
        return p_lo
    return SegmentOverlap(p_lo, (a[0][0] + hi * ux, a[0][1] + hi * uy))


def polygon_area(polys: Iterable[Polygon]) -> float:
    return sum(p.area for p in polys)
