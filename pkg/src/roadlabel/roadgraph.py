"""Abstract road graph: a planar graph of road sections and junction edges."""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple

from .geometry import EPS, Point, Polyline
from .wellshape import DEFAULT_ALPHA_MAX, DEFAULT_LMAX_FACTOR, ShapeParams, well_shaped_pieces

SECTION = "section"
JUNCTION = "junction"

Interval = tuple[float, float]


class ArcPos(NamedTuple):
    edge: int
    s: float


@dataclass(frozen=True)
class Road:
    id: int
    name: str
    length: float
    stroke: float = 1.0
    color: str = "#000000"
    font: float = 1.0
    rank: int = 0
    w_width: float = 1.0
    edges: tuple[int, ...] = ()


@dataclass(frozen=True)
class Edge:
    """Directed edge ``u -> v``; arc offsets are measured from ``u``.

    ``origin`` is set on the two halves of a section cut at its midpoint
    during decomposition: (original edge id, offset of this half's source).
    """

    id: int
    u: int
    v: int
    geometry: Polyline
    kind: str
    road: int
    blocked: tuple[Interval, ...] = ()
    pieces: tuple[Interval, ...] = ()
    origin: tuple[int, float] | None = None

    @property
    def length(self) -> float:
        return self.geometry.length

    @property
    def is_section(self) -> bool:
        return self.kind == SECTION

    def other(self, w: int) -> int:
        return self.v if w == self.u else self.u

    def reach(self, end: int) -> float:
        """Longest prefix usable by a label that enters or leaves through vertex ``end``."""
        n = self.length
        if end == self.u:
            hi = 0.0
            for a, b in self.pieces:
                if a <= EPS:
                    hi = max(hi, b)
            for a, b in self.blocked:
                hi = min(hi, max(0.0, a))
            return min(hi, n)
        lo = n
        for a, b in self.pieces:
            if b >= n - EPS:
                lo = min(lo, a)
        for a, b in self.blocked:
            lo = max(lo, min(n, b))
        return max(0.0, n - lo)

    @cached_property
    def pass_ok(self) -> bool:
        """Whether a label may cover this edge entirely."""
        n = self.length
        if self.blocked:
            return False
        return any(a <= EPS and b >= n - EPS for a, b in self.pieces)

    def middle_intervals(self, lam: float) -> list[Interval]:
        """Connected sets of offsets ``h`` such that [h, h + lam] is a valid label footprint."""
        out: list[Interval] = []
        for p, q in self.pieces:
            if q - p < lam - EPS:
                continue
            free = [(p, max(p, q - lam))]
            for a, b in self.blocked:
                lo, hi = a - lam, b
                nxt = []
                for x, y in free:
                    if hi <= x or lo >= y:
                        nxt.append((x, y))
                        continue
                    if lo >= x:
                        nxt.append((x, lo))
                    if hi <= y:
                        nxt.append((hi, y))
                free = nxt
            out.extend(free)
        return merge_intervals(out)


def merge_intervals(items: Iterable[Interval], tol: float = EPS) -> list[Interval]:
    merged: list[list[float]] = []
    for a, b in sorted(items):
        if merged and a <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


@dataclass(frozen=True)
class Junction:
    edges: tuple[int, ...]


@dataclass
class RoadGraph:
    vertices: dict[int, Point]
    edges: dict[int, Edge]
    roads: dict[int, Road]
    alpha_max: float = DEFAULT_ALPHA_MAX
    lmax_factor: float = DEFAULT_LMAX_FACTOR

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        for e in self.edges.values():
            adj[e.u].append(e.id)
            if e.v != e.u:
                adj[e.v].append(e.id)
        return {v: tuple(sorted(ids)) for v, ids in adj.items()}

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def sections(self) -> list[Edge]:
        return [e for e in self.edges.values() if e.is_section]

    def road_of(self, eid: int) -> Road:
        return self.roads[self.edges[eid].road]

    def shape_params(self, road: Road) -> ShapeParams:
        return ShapeParams(self.lmax_factor * road.w_width, self.alpha_max)

    def is_countable(self, eid: int) -> bool:
        e = self.edges[eid]
        return e.is_section and e.origin is None and e.length >= self.road_of(eid).w_width - EPS

    def with_pieces(self) -> RoadGraph:
        """Copy with well-shaped pieces recomputed for every edge."""
        edges = {}
        for eid, e in self.edges.items():
            params = self.shape_params(self.roads[e.road])
            edges[eid] = replace(e, pieces=tuple(well_shaped_pieces(e.geometry, params)))
        return RoadGraph(dict(self.vertices), edges, dict(self.roads), self.alpha_max, self.lmax_factor)

    def subgraph(self, edge_ids: Iterable[int]) -> RoadGraph:
        ids = sorted(set(edge_ids))
        edges = {i: self.edges[i] for i in ids}
        verts = sorted({w for i in ids for w in (edges[i].u, edges[i].v)})
        road_ids = sorted({e.road for e in edges.values()})
        roads = {}
        for r in road_ids:
            road = self.roads[r]
            roads[r] = replace(road, edges=tuple(i for i in road.edges if i in edges))
        return RoadGraph({w: self.vertices[w] for w in verts}, edges, roads, self.alpha_max, self.lmax_factor)

    # serialization

    def to_dict(self) -> dict:
        return {
            "alpha_max": self.alpha_max,
            "lmax_factor": self.lmax_factor,
            "vertices": [[i, x, y] for i, (x, y) in sorted(self.vertices.items())],
            "edges": [
                {
                    "id": e.id,
                    "u": e.u,
                    "v": e.v,
                    "kind": e.kind,
                    "road": e.road,
                    "coords": [list(c) for c in e.geometry.coords],
                    "blocked": [list(b) for b in e.blocked],
                    "pieces": [list(p) for p in e.pieces],
                    **({"origin": list(e.origin)} if e.origin is not None else {}),
                }
                for _, e in sorted(self.edges.items())
            ],
            "roads": [
                {
                    "id": r.id,
                    "name": r.name,
                    "length": r.length,
                    "stroke": r.stroke,
                    "color": r.color,
                    "font": r.font,
                    "rank": r.rank,
                    "w_width": r.w_width,
                    "edges": list(r.edges),
                }
                for _, r in sorted(self.roads.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> RoadGraph:
        vertices = {int(i): (float(x), float(y)) for i, x, y in data["vertices"]}
        edges = {}
        for d in data["edges"]:
            origin = d.get("origin")
            e = Edge(
                id=int(d["id"]),
                u=int(d["u"]),
                v=int(d["v"]),
                geometry=Polyline(d["coords"]),
                kind=d["kind"],
                road=int(d["road"]),
                blocked=tuple((float(a), float(b)) for a, b in d.get("blocked", [])),
                pieces=tuple((float(a), float(b)) for a, b in d.get("pieces", [])),
                origin=(int(origin[0]), float(origin[1])) if origin else None,
            )
            edges[e.id] = e
        roads = {}
        for d in data["roads"]:
            r = Road(
                id=int(d["id"]),
                name=d["name"],
                length=float(d["length"]),
                stroke=float(d.get("stroke", 1.0)),
                color=d.get("color", "#000000"),
                font=float(d.get("font", 1.0)),
                rank=int(d.get("rank", 0)),
                w_width=float(d.get("w_width", d.get("font", 1.0))),
                edges=tuple(int(i) for i in d["edges"]),
            )
            roads[r.id] = r
        g = cls(
            vertices,
            edges,
            roads,
            float(data.get("alpha_max", DEFAULT_ALPHA_MAX)),
            float(data.get("lmax_factor", DEFAULT_LMAX_FACTOR)),
        )
        if any(not e.pieces for e in edges.values()):
            g = g.with_pieces()
        return g

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> RoadGraph:
        return cls.from_dict(json.loads(Path(path).read_text()))


def validate(g: RoadGraph, check_planarity: bool = True) -> list[str]:
    """Diagnostics for every violated structural invariant; empty when valid."""
    out: list[str] = []
    adj = g.adjacency
    for eid, e in sorted(g.edges.items()):
        if e.kind not in (SECTION, JUNCTION):
            out.append(f"edge {eid}: unknown kind {e.kind!r}")
        if e.u not in g.vertices or e.v not in g.vertices:
            out.append(f"edge {eid}: missing endpoint vertex")
            continue
        if e.u == e.v:
            out.append(f"edge {eid}: self loop at vertex {e.u}")
        for w, c in ((e.u, e.geometry.coords[0]), (e.v, e.geometry.coords[-1])):
            if math.dist(g.vertices[w], c) > 1e-6:
                out.append(f"edge {eid}: geometry does not end at vertex {w}")
        if e.road not in g.roads:
            out.append(f"edge {eid}: unknown road {e.road}")
        elif eid not in g.roads[e.road].edges:
            out.append(f"edge {eid}: not listed as member of road {e.road}")
        n = e.length
        for name, items in (("blocked", e.blocked), ("piece", e.pieces)):
            for a, b in items:
                if a < -EPS or b > n + EPS or a > b + EPS:
                    out.append(f"edge {eid}: {name} interval [{a}, {b}] outside [0, {n}]")
    for v, ids in sorted(adj.items()):
        secs = [i for i in ids if g.edges[i].is_section]
        if len(secs) > 1:
            out.append(f"vertex {v}: road sections {secs} share the vertex")
        if secs and len(ids) > 2:
            out.append(f"vertex {v}: section vertex has degree {len(ids)}")
    for rid, r in sorted(g.roads.items()):
        if not r.length > 0:
            out.append(f"road {rid}: non-positive name length")
        members = [i for i in r.edges if i in g.edges]
        if len(members) != len(r.edges):
            out.append(f"road {rid}: lists unknown edges")
        for i in members:
            if g.edges[i].road != rid:
                out.append(f"road {rid}: edge {i} belongs to road {g.edges[i].road}")
        if members and not _connected(g, members):
            out.append(f"road {rid}: member edges {sorted(members)} are not connected")
    if check_planarity:
        out.extend(_planarity_diagnostics(g))
    return out


def _connected(g: RoadGraph, members: list[int]) -> bool:
    mset = set(members)
    seen = {members[0]}
    stack = [members[0]]
    while stack:
        e = g.edges[stack.pop()]
        for w in (e.u, e.v):
            for f in g.adjacency[w]:
                if f in mset and f not in seen:
                    seen.add(f)
                    stack.append(f)
    return len(seen) == len(mset)


def _planarity_diagnostics(g: RoadGraph) -> list[str]:
    from shapely import STRtree
    from shapely.geometry import Point as SPoint

    ids = sorted(g.edges)
    if not ids:
        return []
    lines = [g.edges[i].geometry.to_shapely() for i in ids]
    tree = STRtree(lines)
    out = []
    left, right = tree.query(lines, predicate="intersects")
    for a, b in zip(left.tolist(), right.tolist()):
        if a >= b:
            continue
        ea, eb = g.edges[ids[a]], g.edges[ids[b]]
        shared = {ea.u, ea.v} & {eb.u, eb.v}
        inter = lines[a].intersection(lines[b])
        allowed = [SPoint(g.vertices[w]) for w in shared]
        rest = inter
        for p in allowed:
            rest = rest.difference(p.buffer(1e-7))
        if not rest.is_empty:
            out.append(f"edges {ea.id} and {eb.id} intersect away from shared endpoints")
    return out


def junctions(g: RoadGraph) -> list[Junction]:
    """Maximal connected groups of junction edges, ordered by smallest edge id."""
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    jids = sorted(i for i, e in g.edges.items() if not e.is_section)
    for i in jids:
        parent[i] = i
    for v, ids in g.adjacency.items():
        js = [i for i in ids if not g.edges[i].is_section]
        for a, b in zip(js, js[1:]):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for i in jids:
        groups.setdefault(find(i), []).append(i)
    return [Junction(tuple(sorted(m))) for _, m in sorted(groups.items())]


def geodesic_distance(g: RoadGraph, a: ArcPos, b: ArcPos) -> float:
    """Length of the shortest path along the graph between two arc positions."""
    ea, eb = g.edges[a.edge], g.edges[b.edge]
    best = abs(a.s - b.s) if a.edge == b.edge else math.inf
    dist: dict[int, float] = {}
    heap = [(a.s, ea.u), (ea.length - a.s, ea.v)]
    heapq.heapify(heap)
    while heap:
        d, w = heapq.heappop(heap)
        if w in dist:
            continue
        dist[w] = d
        for f in g.adjacency[w]:
            e = g.edges[f]
            x = e.other(w)
            if x not in dist:
                heapq.heappush(heap, (d + e.length, x))
    for w, off in ((eb.u, b.s), (eb.v, eb.length - b.s)):
        if w in dist:
            best = min(best, dist[w] + off)
    return best


@dataclass
class GraphBuilder:
    """Incremental construction helper for tests, generators and preprocessing."""

    alpha_max: float = DEFAULT_ALPHA_MAX
    lmax_factor: float = DEFAULT_LMAX_FACTOR
    vertices: dict[int, Point] = field(default_factory=dict)
    edges: dict[int, Edge] = field(default_factory=dict)
    roads: dict[int, Road] = field(default_factory=dict)
    _members: dict[int, list[int]] = field(default_factory=dict)
    _vindex: dict[Point, int] = field(default_factory=dict)

    def road(self, name: str, length: float, **style) -> int:
        rid = len(self.roads)
        self.roads[rid] = Road(id=rid, name=name, length=length, **style)
        self._members[rid] = []
        return rid

    def vertex(self, p: Point) -> int:
        p = (float(p[0]), float(p[1]))
        if p not in self._vindex:
            vid = len(self.vertices)
            self.vertices[vid] = p
            self._vindex[p] = vid
        return self._vindex[p]

    def edge(self, coords, kind: str, road: int, blocked=()) -> int:
        line = Polyline(coords)
        u, v = self.vertex(line.coords[0]), self.vertex(line.coords[-1])
        eid = len(self.edges)
        self.edges[eid] = Edge(eid, u, v, line, kind, road, tuple(map(tuple, blocked)))
        self._members[road].append(eid)
        return eid

    def section(self, coords, road: int, blocked=()) -> int:
        return self.edge(coords, SECTION, road, blocked)

    def junction(self, coords, road: int, blocked=()) -> int:
        return self.edge(coords, JUNCTION, road, blocked)

    def build(self) -> RoadGraph:
        roads = {rid: replace(r, edges=tuple(self._members[rid])) for rid, r in self.roads.items()}
        g = RoadGraph(dict(self.vertices), dict(self.edges), roads, self.alpha_max, self.lmax_factor)
        return g.with_pieces()
