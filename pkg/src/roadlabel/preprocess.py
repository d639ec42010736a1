"""From annotated line segments to an abstract road graph.

The pipeline has five steps:

1. identify road components: same name and look, touching hulls;
2. replace each component by the skeleton of its hull union;
3. planarize the skeletons, splitting crossings and snapping near misses;
4. build the graph: shared endpoints become junctions whose surroundings
   are cut off as junction edges;
5. block the parts of edges whose hulls overlap a more important edge.
"""

from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import shapely
from shapely.geometry import LineString, Polygon
from shapely.strtree import STRtree

from .fonts import DEFAULT_METRICS, FontMetrics
from .geometry import (
    EPS,
    Point,
    Polyline,
    SegmentOverlap,
    hull,
    polygon_union,
    polyline_hull,
    segment_intersection,
    simplify_with_clearance,
    triangulate_interior,
)
from .style import StyleConfig
from .roadgraph import GraphBuilder, RoadGraph, junctions, merge_intervals, validate
from .wellshape import DEFAULT_ALPHA_MAX

log = logging.getLogger(__name__)

DISPLACEMENT = 1e-6
DEFAULT_SNAP_TOL = 0.1
DEFAULT_MAX_SECTION_PX = 350.0


@dataclass(frozen=True)
class AnnotatedSegment:
    a: Point
    b: Point
    name: str
    stroke: float
    color: str
    font: float
    rank: int = 0

    def __post_init__(self):
        if self.stroke < self.font:
            object.__setattr__(self, "stroke", self.font)

    @property
    def look(self) -> tuple[str, str, float, float]:
        return (self.name, self.color, self.font, self.stroke)

    @property
    def length(self) -> float:
        return math.dist(self.a, self.b)


@dataclass
class RoadComponent:
    id: int
    name: str
    stroke: float
    color: str
    font: float
    rank: int
    segments: list[AnnotatedSegment]
    polygons: list[Polygon] = field(default_factory=list)

    @property
    def kind(self) -> tuple[float, str, float]:
        return (self.stroke, self.color, self.font)


@dataclass
class AnnotatedPolyline:
    coords: list[Point]
    component: int
    name: str
    stroke: float
    color: str
    font: float
    rank: int = 0

    def with_coords(self, coords) -> AnnotatedPolyline:
        return AnnotatedPolyline(list(coords), self.component, self.name, self.stroke, self.color, self.font, self.rank)

    @property
    def kind(self) -> tuple[float, str, float]:
        return (self.stroke, self.color, self.font)

    def length(self) -> float:
        return sum(math.dist(p, q) for p, q in zip(self.coords, self.coords[1:]))


def text_box(a: Point, b: Point, font: float) -> Polygon:
    """Rectangle of height ``font`` centred on the segment ``ab``."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    n = math.hypot(dx, dy)
    ox, oy = -dy / n * font / 2, dx / n * font / 2
    return Polygon([(a[0] + ox, a[1] + oy), (b[0] + ox, b[1] + oy), (b[0] - ox, b[1] - oy), (a[0] - ox, a[1] - oy)])


# ---------------------------------------------------------------- step 1


def identify_components(segments: list[AnnotatedSegment]) -> list[RoadComponent]:
    """Connected groups of equally drawn, equally named segments with touching hulls."""
    groups: dict[tuple, list[AnnotatedSegment]] = {}
    for s in segments:
        if s.length <= EPS:
            continue
        groups.setdefault(s.look, []).append(s)
    out: list[RoadComponent] = []
    for look in sorted(groups):
        members = groups[look]
        hulls = [hull((s.a, s.b), s.stroke) for s in members]
        tree = STRtree(hulls)
        parent = list(range(len(members)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        left, right = tree.query(hulls, predicate="intersects")
        for i, j in zip(left.tolist(), right.tolist()):
            a, b = find(i), find(j)
            if a != b:
                parent[max(a, b)] = min(a, b)
        comp: dict[int, list[int]] = {}
        for i in range(len(members)):
            comp.setdefault(find(i), []).append(i)
        for root in sorted(comp):
            segs = [members[i] for i in comp[root]]
            name, color, font, stroke = look
            rank = max(s.rank for s in segs)
            c = RoadComponent(len(out), name, stroke, color, font, rank, segs)
            c.polygons = polygon_union(hull((s.a, s.b), s.stroke) for s in segs)
            out.append(c)
    return out


# ---------------------------------------------------------------- step 2


def build_skeleton(
    c: RoadComponent,
    metrics: FontMetrics = DEFAULT_METRICS,
    simplify_tol: float | None = None,
) -> list[Polyline]:
    """Centre lines of the component's polygons whose text boxes fit inside.

    Polygons smaller than the box of the letter W are dropped, and so are
    leftover pieces shorter than a W, which cannot carry any text. Boundaries
    are densified before triangulating so that the skeleton follows the
    middle of long straight stretches.
    """
    w = metrics.w_width(c.font)
    min_area = w * c.font
    tol = c.font / 2 if simplify_tol is None else simplify_tol
    out: list[Polyline] = []
    for poly in c.polygons:
        if poly.area < min_area:
            continue
        for line in _skeleton_lines(poly, spacing=c.stroke):
            simple = simplify_with_clearance(line, tol, poly, c.font / 2)
            out.extend(p for p in _keep_fitting(simple, poly, c.font) if p.length >= w)
    return out


def _skeleton_lines(poly: Polygon, spacing: float) -> list[Polyline]:
    dense = shapely.segmentize(poly, spacing)
    tris = triangulate_interior(dense)
    mids: dict[tuple[Point, Point], Point] = {}

    def mid(a, b):
        key = (a, b) if a <= b else (b, a)
        if key not in mids:
            (x0, y0), (x1, y1) = key
            mids[key] = ((x0 + x1) / 2, (y0 + y1) / 2)
        return mids[key]

    segs: list[tuple[Point, Point]] = []
    for t in tris:
        inner = [i for i in range(3) if t.internal[i]]
        if len(inner) == 2:
            segs.append((mid(*t.edge(inner[0])), mid(*t.edge(inner[1]))))
        elif inner:
            for i in inner:
                segs.append((t.centroid, mid(*t.edge(i))))
    midpoints = set(mids.values())
    at: dict[Point, list[int]] = {}
    for k, (p, q) in enumerate(segs):
        at.setdefault(p, []).append(k)
        at.setdefault(q, []).append(k)
    used = [False] * len(segs)
    lines: list[list[Point]] = []

    def walk(k: int, start: Point) -> list[Point]:
        pts = [start]
        cur = start
        while True:
            used[k] = True
            p, q = segs[k]
            nxt = q if p == cur else p
            pts.append(nxt)
            cur = nxt
            if cur not in midpoints:
                return pts
            options = [j for j in at[cur] if not used[j]]
            if not options:
                return pts
            k = options[0]

    ends = sorted(p for p in at if p not in midpoints)
    for p in ends:
        for k in at[p]:
            if not used[k]:
                lines.append(walk(k, p))
    for k in range(len(segs)):
        if not used[k]:
            # a closed ring of midpoints; cut it in two so no line is closed
            ring = walk(k, min(segs[k]))
            half = len(ring) // 2
            lines.append(ring[: half + 1])
            lines.append(ring[half:])
    out = []
    for pts in lines:
        clean = [pts[0]]
        for q in pts[1:]:
            if math.dist(q, clean[-1]) > EPS:
                clean.append(q)
        if len(clean) >= 2:
            out.append(Polyline(clean))
    return _prune_spurs(out, spacing)


def _prune_spurs(lines: list[Polyline], min_len: float) -> list[Polyline]:
    """Drop short dead-end branches hanging off a branch point.

    Rounded caps produce a fan of triangles whose skeleton forks into short
    spurs, sometimes spurs of spurs, so passes repeat until nothing changes.
    At a node where every branch is a spur the longest one survives.
    """
    while True:
        kept = _prune_once(lines, min_len)
        if len(kept) == len(lines):
            return kept
        lines = kept


def _prune_once(lines: list[Polyline], min_len: float) -> list[Polyline]:
    deg: dict[Point, int] = {}
    for l in lines:
        for q in (l.coords[0], l.coords[-1]):
            deg[q] = deg.get(q, 0) + 1
    spurs: dict[Point, list[int]] = {}
    for k, l in enumerate(lines):
        a, b = l.coords[0], l.coords[-1]
        if l.length >= min_len:
            continue
        if deg[a] == 1 and deg[b] >= 2:
            spurs.setdefault(b, []).append(k)
        elif deg[b] == 1 and deg[a] >= 2:
            spurs.setdefault(a, []).append(k)
    drop: set[int] = set()
    for node, ks in spurs.items():
        if len(ks) == deg[node]:
            ks = sorted(ks, key=lambda k: (lines[k].length, k))[:-1]
        drop.update(ks)
    return [l for k, l in enumerate(lines) if k not in drop]


def _keep_fitting(line: Polyline, poly: Polygon, font: float) -> list[Polyline]:
    """Runs of consecutive segments whose text boxes lie in ``poly``."""
    region = poly.buffer(EPS * 10)
    runs: list[list[Point]] = []
    cur: list[Point] = []
    pts = line.coords
    for a, b in zip(pts, pts[1:]):
        if region.covers(text_box(a, b, font)):
            if not cur:
                cur = [a]
            cur.append(b)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    return [Polyline(r) for r in runs]


# ---------------------------------------------------------------- step 3


PLANARIZE_PASSES = 4
NODE_MERGE = 1e-7


def planarize(lines: list[AnnotatedPolyline], snap_tol: float = DEFAULT_SNAP_TOL) -> list[AnnotatedPolyline]:
    """Split polylines at mutual crossings so they meet only at endpoints.

    An endpoint within ``snap_tol`` of another polyline is moved onto it;
    a piece shorter than ``snap_tol`` left beyond a crossing is dropped.
    Snapping can bring a line exactly onto a close neighbour, so exact
    passes without snapping follow until nothing changes.
    """
    out = _planarize_pass(lines, snap_tol)
    for _ in range(PLANARIZE_PASSES - 1):
        again = _planarize_pass(out, 0.0)
        if [l.coords for l in again] == [l.coords for l in out]:
            break
        out = again
    return out


def _planarize_pass(lines: list[AnnotatedPolyline], snap_tol: float) -> list[AnnotatedPolyline]:
    # exact passes still merge points that differ by rounding only
    snap_tol = max(snap_tol, NODE_MERGE)
    segs = []
    for li, line in enumerate(lines):
        cum = 0.0
        for k, (a, b) in enumerate(zip(line.coords, line.coords[1:])):
            segs.append((li, k, a, b, cum))
            cum += math.dist(a, b)
    if not segs:
        return []
    geoms = [LineString([s[2], s[3]]) for s in segs]
    tree = STRtree(geoms)
    left, right = tree.query(geoms, predicate="dwithin", distance=snap_tol)
    cuts: dict[int, dict[float, Point]] = {i: {} for i in range(len(lines))}
    lengths = [line.length() for line in lines]
    drop: dict[int, list[tuple[float, float]]] = {}
    # endpoints shared by several polylines stay put; nearby crossings snap onto them
    ends: dict[Point, int] = {}
    for line in lines:
        for q in (tuple(line.coords[0]), tuple(line.coords[-1])):
            ends[q] = ends.get(q, 0) + 1
    # cut points closer than the tolerance are one node, so pieces share exact coordinates
    merge = snap_tol
    registry: dict[tuple[int, int], list[Point]] = {}

    def canon(p: Point) -> Point:
        cx, cy = int(math.floor(p[0] / merge)), int(math.floor(p[1] / merge))
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for q in registry.get((cx + dx, cy + dy), ()):
                    if math.dist(p, q) <= merge:
                        return q
        registry.setdefault((cx, cy), []).append(p)
        return p

    def anchor(hit: Point, *owners) -> Point:
        best, best_d = hit, snap_tol
        for li in owners:
            for q in (tuple(lines[li].coords[0]), tuple(lines[li].coords[-1])):
                d = math.dist(q, hit)
                if ends[q] > 1 and d <= best_d:
                    best, best_d = q, d
        return best

    def arc(seg, p: Point) -> float:
        li, k, a, b, cum = seg
        n = math.dist(a, b)
        t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (n * n)
        return cum + max(0.0, min(1.0, t)) * n

    for i, j in sorted(set(zip(left.tolist(), right.tolist()))):
        if i >= j:
            continue
        sa, sb = segs[i], segs[j]
        if sa[0] == sb[0]:
            continue
        hit = segment_intersection((sa[2], sa[3]), (sb[2], sb[3]), snap_tol)
        if hit is None:
            continue
        if isinstance(hit, SegmentOverlap):
            # the later polyline gives way along a shared stretch
            lo, hi = sorted((arc(sb, hit.start), arc(sb, hit.end)))
            drop.setdefault(sb[0], []).append((lo, hi))
            for p in (hit.start, hit.end):
                q = canon(tuple(p))
                cuts[sa[0]][arc(sa, p)] = q
                cuts[sb[0]][arc(sb, p)] = q
            continue
        hit = canon(anchor(tuple(hit), sa[0], sb[0]))
        cuts[sa[0]][arc(sa, hit)] = hit
        cuts[sb[0]][arc(sb, hit)] = hit

    out: list[AnnotatedPolyline] = []
    for li, line in enumerate(lines):
        L = lengths[li]
        if L <= EPS:
            continue
        coords = list(line.coords)
        pts = sorted(cuts[li].items())
        start_pt, end_pt = coords[0], coords[-1]
        # an end shared with other polylines is a node and never moves
        start_free = ends[tuple(start_pt)] == 1
        end_free = ends[tuple(end_pt)] == 1
        inner: list[tuple[float, Point]] = []
        lo_s, hi_s = 0.0, L
        for s, p in pts:
            if s <= snap_tol and start_free:
                if s >= lo_s - EPS:
                    lo_s, start_pt = s, p
            elif s >= L - snap_tol and end_free:
                if s <= hi_s + EPS or hi_s == L:
                    hi_s, end_pt = min(hi_s, s) if hi_s != L else s, p
            else:
                inner.append((s, p))
        poly = Polyline(coords)
        marks = [(lo_s, start_pt)] + inner + [(hi_s, end_pt)]
        dedup: list[tuple[float, Point]] = []
        for s, p in sorted(marks, key=lambda m: m[0]):
            if dedup and p == dedup[-1][1] and s - dedup[-1][0] <= EPS:
                continue
            dedup.append((s, p))
        for (s0, p0), (s1, p1) in zip(dedup, dedup[1:]):
            if p0 == p1:
                # a hairpin that meets the same node twice; the loop is dropped
                continue
            if any(a - EPS <= s0 and s1 <= b + EPS for a, b in drop.get(li, [])):
                continue
            piece = list(poly.sub(s0, s1).coords) if s1 - s0 > EPS else [p0, p1]
            piece[0], piece[-1] = p0, p1
            # interior vertices within the tolerance of a cut would leave slivers
            mid = [q for q in piece[1:-1] if math.dist(q, p0) > snap_tol and math.dist(q, p1) > snap_tol]
            clean = [p0]
            for q in mid + [p1]:
                if math.dist(q, clean[-1]) > EPS:
                    clean.append(q)
            if len(clean) < 2:
                continue
            clean[-1] = p1
            out.append(line.with_coords(clean))
    return out


def crossing_count(lines: list[AnnotatedPolyline], tol: float = 1e-9) -> int:
    """Pairs of polylines that meet anywhere but at shared endpoints (exhaustive)."""
    geoms = [LineString(l.coords) for l in lines]
    bad = 0
    for i in range(len(geoms)):
        for j in range(i + 1, len(geoms)):
            if not geoms[i].intersects(geoms[j]):
                continue
            ends = {tuple(lines[i].coords[0]), tuple(lines[i].coords[-1])} & {
                tuple(lines[j].coords[0]),
                tuple(lines[j].coords[-1]),
            }
            inter = geoms[i].intersection(geoms[j])
            for p in ends:
                inter = inter.difference(shapely.Point(p).buffer(tol))
            if not inter.is_empty:
                bad += 1
    return bad


# ---------------------------------------------------------------- step 4


@dataclass(frozen=True)
class GraphParams:
    delta: float | None = None
    max_section_length: float | None = None
    alpha_max: float = DEFAULT_ALPHA_MAX
    lmax_factor: float = 2.0


def build_road_graph(
    lines: list[AnnotatedPolyline],
    delta: float | None = None,
    max_section_length: float | None = None,
    metrics: FontMetrics = DEFAULT_METRICS,
    alpha_max: float = DEFAULT_ALPHA_MAX,
    lmax_factor: float = 2.0,
) -> RoadGraph:
    """Road graph of planar annotated polylines.

    ``delta`` caps how far a junction reaches into an edge (default: twice
    the widest stroke at that junction). Sections longer than
    ``max_section_length`` are cut by very short junction edges.
    """
    work = {k: line for k, line in enumerate(lines) if line.length() > EPS}
    next_id = len(lines)
    ends: dict[Point, list[tuple[int, int]]] = {}
    for k, line in work.items():
        ends.setdefault(line.coords[0], []).append((k, 0))
        ends.setdefault(line.coords[-1], []).append((k, 1))

    def unhook(k: int, end: int, p: Point) -> None:
        ends[p].remove((k, end))

    # same-road merges and detachment of ending roads
    for v in sorted(ends):
        inc = sorted(ends.get(v, []))
        if len(inc) < 2:
            continue
        comps: dict[int, list[tuple[int, int]]] = {}
        for k, end in inc:
            comps.setdefault(work[k].component, []).append((k, end))
        twice = [c for c, m in comps.items() if len(m) == 2]
        if len(twice) != 1 or any(len(m) > 2 for m in comps.values()):
            continue
        (ka, ea), (kb, eb) = comps[twice[0]]
        if ka == kb:
            continue
        others = [x for c, m in comps.items() if c != twice[0] for x in m]
        r_kind = work[ka].kind
        if any(work[k].kind == r_kind for k, _ in others):
            continue
        for k, end in others:
            line = work[k]
            coords = list(line.coords)
            p = Polyline(coords if end == 0 else coords[::-1])
            moved = p.point_at(min(DISPLACEMENT, p.length / 2))
            unhook(k, end, v)
            if end == 0:
                coords[0] = moved
            else:
                coords[-1] = moved
            work[k] = line.with_coords(coords)
            ends.setdefault(moved, []).append((k, end))
        a, b = work.pop(ka), work.pop(kb)
        unhook(ka, ea, v)
        unhook(kb, eb, v)
        ca = a.coords if ea == 1 else a.coords[::-1]
        cb = b.coords if eb == 0 else b.coords[::-1]
        merged = a.with_coords(list(ca) + list(cb[1:]))
        far_a, far_b = ca[0], cb[-1]
        ends[far_a].remove((ka, 1 - ea))
        ends[far_b].remove((kb, 1 - eb))
        work[next_id] = merged
        ends[far_a].append((next_id, 0))
        ends[far_b].append((next_id, 1))
        next_id += 1

    # junction reach at every remaining seed
    cut: dict[tuple[int, int], float] = {}
    for v in sorted(ends):
        inc = sorted(ends[v])
        if len(inc) < 2:
            continue
        d = delta if delta is not None else 2 * max(work[k].stroke for k, _ in inc)
        local = {}
        for k, end in inc:
            line = work[k]
            p = Polyline(line.coords if end == 0 else line.coords[::-1])
            near = p.sub(0.0, min(p.length, d + 2 * line.stroke))
            local[(k, end)] = (p, polyline_hull(near, line.stroke))
        for key in inc:
            p, h = local[key]
            far = 0.0
            for other in inc:
                if other == key:
                    continue
                inter = h.intersection(local[other][1])
                if inter.is_empty:
                    continue
                for q in _boundary_points(inter):
                    far = max(far, p.project(q))
            reach = min(far, d)
            cut[key] = max(reach, min(p.length / 4, 1e-3))

    b = GraphBuilder(alpha_max=alpha_max, lmax_factor=lmax_factor)
    pieces: list[tuple[int, list[Point], str]] = []
    for k in sorted(work):
        line = work[k]
        p = Polyline(line.coords)
        L = p.length
        c0 = cut.get((k, 0), 0.0)
        c1 = cut.get((k, 1), 0.0)
        if c0 + c1 >= L - EPS:
            if c0 > 0 and c1 > 0:
                m = L * c0 / (c0 + c1)
                pieces.append((k, _piece(p, 0, m), "junction"))
                pieces.append((k, _piece(p, m, L), "junction"))
            else:
                pieces.append((k, list(p.coords), "junction"))
            continue
        if c0 > 0:
            pieces.append((k, _piece(p, 0, c0), "junction"))
        lo, hi = c0, L - c1
        limit = max_section_length
        if limit is not None and hi - lo > limit:
            n = math.ceil((hi - lo) / limit)
            step = (hi - lo) / n
            s = lo
            for i in range(1, n):
                m = lo + i * step
                pieces.append((k, _piece(p, s, m - DISPLACEMENT / 2), "section"))
                pieces.append((k, _piece(p, m - DISPLACEMENT / 2, m + DISPLACEMENT / 2), "junction"))
                s = m + DISPLACEMENT / 2
            pieces.append((k, _piece(p, s, hi), "section"))
        else:
            pieces.append((k, _piece(p, lo, hi), "section"))
        if c1 > 0:
            pieces.append((k, _piece(p, L - c1, L), "junction"))

    # roads: connected groups of pieces from one component
    parent = list(range(len(pieces)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    by_point: dict[tuple[int, Point], int] = {}
    for i, (k, coords, _) in enumerate(pieces):
        comp = work[k].component
        for q in (coords[0], coords[-1]):
            j = by_point.setdefault((comp, q), i)
            if j != i:
                a, c = find(i), find(j)
                if a != c:
                    parent[max(a, c)] = min(a, c)
    road_of: dict[int, int] = {}
    for i, (k, coords, kind) in enumerate(pieces):
        root = find(i)
        if root not in road_of:
            line = work[k]
            road_of[root] = b.road(
                line.name,
                metrics.text_length(line.name, line.font),
                stroke=line.stroke,
                color=line.color,
                font=line.font,
                rank=line.rank,
                w_width=metrics.w_width(line.font),
            )
        b.edge(coords, kind, road_of[root])
    g = b.build()
    problems = validate(g)
    if problems:
        raise ValueError("road graph construction failed: " + "; ".join(problems[:10]))
    return g


def _piece(p: Polyline, a: float, b: float) -> list[Point]:
    """Coordinates of ``p`` between ``a`` and ``b``, keeping its exact end points."""
    coords = list(p.sub(a, b).coords)
    if a <= 0.0:
        coords[0] = p.coords[0]
    if b >= p.length:
        coords[-1] = p.coords[-1]
    return coords


def _boundary_points(geom) -> list[Point]:
    out: list[Point] = []
    for poly in getattr(geom, "geoms", [geom]):
        if isinstance(poly, Polygon):
            out.extend(poly.exterior.coords)
        elif hasattr(poly, "coords"):
            out.extend(poly.coords)
    return [(float(x), float(y)) for x, y in out]


# ---------------------------------------------------------------- step 5


def resolve_overlaps(g: RoadGraph, min_overlap: float = 0.01) -> RoadGraph:
    """Block the parts of less important edges that overlap another road's hull.

    Importance is (category rank, total road length, lower edge id). Edges
    of the same road and edges meeting at a common junction are left alone;
    their overlaps are resolved by the labeling itself. Overlaps with area
    below ``min_overlap`` times the product of the two strokes are treated
    as touching.
    """
    ids = sorted(g.edges)
    if not ids:
        return g
    near: dict[int, set[int]] = {e: set() for e in ids}
    for k, j in enumerate(junctions(g)):
        verts = {x for eid in j.edges for x in (g.edges[eid].u, g.edges[eid].v)}
        for x in verts:
            for eid in g.adjacency[x]:
                near[eid].add(k)
    road_len = {r: sum(g.edges[e].length for e in road.edges) for r, road in g.roads.items()}
    hulls = [polyline_hull(g.edges[i].geometry, g.road_of(i).stroke) for i in ids]
    tree = STRtree(hulls)
    left, right = tree.query(hulls, predicate="intersects")
    blocked: dict[int, list[tuple[float, float]]] = {}

    def importance(eid: int):
        e = g.edges[eid]
        return (g.roads[e.road].rank, road_len[e.road], -eid)

    for i, j in sorted(set(zip(left.tolist(), right.tolist()))):
        if i >= j:
            continue
        ea, eb = g.edges[ids[i]], g.edges[ids[j]]
        if ea.road == eb.road or {ea.u, ea.v} & {eb.u, eb.v} or near[ea.id] & near[eb.id]:
            continue
        inter = hulls[i].intersection(hulls[j])
        sa, sb = g.road_of(ea.id).stroke, g.road_of(eb.id).stroke
        if inter.area <= min_overlap * sa * sb:
            continue
        loser = ea if importance(ea.id) < importance(eb.id) else eb
        ss = [loser.geometry.project(q) for q in _boundary_points(inter)]
        lo, hi = max(0.0, min(ss)), min(loser.length, max(ss))
        if hi - lo > EPS:
            blocked.setdefault(loser.id, []).append((lo, hi))
    if not blocked:
        return g
    edges = dict(g.edges)
    for eid, items in blocked.items():
        e = edges[eid]
        edges[eid] = replace(e, blocked=tuple(merge_intervals(list(e.blocked) + items)))
    return RoadGraph(dict(g.vertices), edges, dict(g.roads), g.alpha_max, g.lmax_factor)


# ---------------------------------------------------------------- pipeline


@dataclass
class Phase1Params:
    snap_tol: float = DEFAULT_SNAP_TOL
    delta: float | None = None
    max_section_length: float | None = None
    alpha_max: float = DEFAULT_ALPHA_MAX
    lmax_factor: float = 2.0
    threads: int = 1
    metrics: FontMetrics = DEFAULT_METRICS


@dataclass
class Phase1Report:
    segments_in: int = 0
    components: int = 0
    skeleton_segments: int = 0
    planar_segments: int = 0
    sections: int = 0
    junction_edges: int = 0
    blocked_edges: int = 0
    runtime_s: float = 0.0
    skeletons: list[tuple[RoadComponent, list[Polyline]]] = field(default_factory=list, repr=False)
    planar: list[AnnotatedPolyline] = field(default_factory=list, repr=False)

    @property
    def segment_ratio(self) -> float:
        """Segments after planarization relative to the input."""
        return self.planar_segments / self.segments_in if self.segments_in else 0.0

    def to_dict(self) -> dict:
        return {
            "segments_in": self.segments_in,
            "components": self.components,
            "skeleton_segments": self.skeleton_segments,
            "planar_segments": self.planar_segments,
            "segment_ratio": self.segment_ratio,
            "sections": self.sections,
            "junction_edges": self.junction_edges,
            "blocked_edges": self.blocked_edges,
            "runtime_s": self.runtime_s,
        }


def run_phase1(segments: list[AnnotatedSegment], params: Phase1Params | None = None) -> tuple[RoadGraph, Phase1Report]:
    params = params or Phase1Params()
    start = time.perf_counter()
    report = Phase1Report(segments_in=len(segments))
    comps = identify_components(segments)
    report.components = len(comps)

    def skel(c):
        return c, build_skeleton(c, params.metrics)

    if params.threads > 1:
        with ThreadPoolExecutor(max_workers=params.threads) as pool:
            report.skeletons = list(pool.map(skel, comps))
    else:
        report.skeletons = [skel(c) for c in comps]
    lines = [
        AnnotatedPolyline(list(p.coords), c.id, c.name, c.stroke, c.color, c.font, c.rank)
        for c, polys in report.skeletons
        for p in polys
    ]
    report.skeleton_segments = sum(len(l.coords) - 1 for l in lines)
    planar = planarize(lines, params.snap_tol)
    report.planar = planar
    report.planar_segments = sum(len(l.coords) - 1 for l in planar)
    g = build_road_graph(
        planar, params.delta, params.max_section_length, params.metrics, params.alpha_max, params.lmax_factor
    )
    g = resolve_overlaps(g)
    report.sections = len(g.sections())
    report.junction_edges = len(g.edges) - report.sections
    report.blocked_edges = sum(1 for e in g.edges.values() if e.blocked)
    report.runtime_s = time.perf_counter() - start
    log.info("phase 1: %d segments -> %d sections in %.2fs", len(segments), report.sections, report.runtime_s)
    return g, report


# ---------------------------------------------------------------- input


class InputError(ValueError):
    """Malformed input file; the message names the offending feature."""


def ingest(path, style: StyleConfig | None = None) -> list[AnnotatedSegment]:
    """Annotated segments from GeoJSON road lines or a raw segment list.

    GeoJSON features need a ``name`` and a ``highway`` (or ``category``)
    property; stroke, color and font come from ``style``. Raw segments are
    objects with ``a``, ``b``, ``name`` and either ``category`` or explicit
    ``stroke``, ``color`` and ``font``.
    """
    style = style or StyleConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if isinstance(data, dict) and data.get("type") == "FeatureCollection":
        return _from_features(data.get("features", []), style, str(path))
    items = data.get("segments") if isinstance(data, dict) else data
    if not isinstance(items, list):
        raise InputError(f"{path}: expected a FeatureCollection or a list of segments")
    return _from_raw(items, style, str(path))


def _lookup(props: dict, style: StyleConfig, where: str):
    cat = props.get("highway", props.get("category"))
    if cat is None or cat not in style.categories:
        log.warning("%s: unknown road category %r, dropped", where, cat)
        return None
    if not style.included(cat):
        return None
    return style.stroke(cat), style.color(cat), style.font(cat), style.rank(cat)


def _from_features(features, style: StyleConfig, path: str) -> list[AnnotatedSegment]:
    out: list[AnnotatedSegment] = []
    for i, feat in enumerate(features):
        where = f"{path}: feature {i}"
        try:
            props = feat.get("properties") or {}
            geom = feat["geometry"]
            kind = geom["type"]
            coords = geom["coordinates"]
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"{where}: malformed feature ({exc})") from exc
        name = props.get("name")
        if not name:
            log.warning("%s: unnamed road, dropped", where)
            continue
        look = _lookup(props, style, where)
        if look is None:
            continue
        if kind == "LineString":
            parts = [coords]
        elif kind == "MultiLineString":
            parts = coords
        else:
            raise InputError(f"{where}: unsupported geometry {kind!r}")
        for part in parts:
            try:
                pts = [(float(x), float(y)) for x, y, *_ in part]
            except (TypeError, ValueError) as exc:
                raise InputError(f"{where}: bad coordinates ({exc})") from exc
            for a, b in zip(pts, pts[1:]):
                if a != b:
                    out.append(AnnotatedSegment(a, b, str(name), look[0], look[1], look[2], look[3]))
    return out


def _from_raw(items, style: StyleConfig, path: str) -> list[AnnotatedSegment]:
    out: list[AnnotatedSegment] = []
    for i, item in enumerate(items):
        where = f"{path}: segment {i}"
        try:
            a = (float(item["a"][0]), float(item["a"][1]))
            b = (float(item["b"][0]), float(item["b"][1]))
            name = item.get("name")
            if not name:
                log.warning("%s: unnamed road, dropped", where)
                continue
            if "stroke" in item:
                look = (float(item["stroke"]), str(item.get("color", "#ffffff")), float(item["font"]), int(item.get("rank", 0)))
            else:
                look = _lookup(item, style, where)
                if look is None:
                    continue
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise InputError(f"{where}: malformed segment ({exc})") from exc
        if a != b:
            out.append(AnnotatedSegment(a, b, str(name), *look))
    return out


def segments_to_json(segments: list[AnnotatedSegment]) -> str:
    """Raw segment JSON understood by :func:`ingest`."""
    rows = [
        {"a": list(s.a), "b": list(s.b), "name": s.name, "stroke": s.stroke, "color": s.color, "font": s.font, "rank": s.rank}
        for s in segments
    ]
    return json.dumps({"segments": rows}, indent=1, sort_keys=True) + "\n"
