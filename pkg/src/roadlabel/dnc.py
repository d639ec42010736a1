"""Divide and conquer: cut the road graph into parts that can be labeled alone.

One pass over the edges in id order applies at most one rule per edge, with
priority 1 > 2 > 3 > 4:

1. A junction edge that no label can cover completely is removed.
2. If no other section is reachable from an end ``u`` of section ``e``
   through junction edges, the junction edges at ``u`` are removed.
3. A section at least twice as long as its name that can hold a label on
   its own is cut at its midpoint. Both halves become stubs and the section
   becomes a long-edge.
4. A section that can hold a label on its own, and whose other reachable
   sections at an end ``u`` are all stubs, loses the junction edges at ``u``
   and becomes a stub and a long-edge.

Components of what remains are labeled independently. Composition maps
halves back to their section and places a label on every long-edge that
ended up unlabeled.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .geometry import EPS
from .labelcore import Label, Labeling, count_labeled_sections
from .roadgraph import Edge, Road, RoadGraph

log = logging.getLogger(__name__)

Solver = Callable[[RoadGraph], Labeling]


@dataclass
class Decomposition:
    graph: RoadGraph
    components: list[RoadGraph]
    long_edges: list[int]
    stubs: set[int]
    removed: list[tuple[int, int]] = field(default_factory=list)  # (edge, rule)
    halves: dict[int, tuple[int, float]] = field(default_factory=dict)

    def stats(self) -> dict:
        kinds = {"path": 0, "tree": 0, "other": 0}
        sections = {"path": 0, "tree": 0, "other": 0}
        for c in self.components:
            k = component_kind(c)
            kinds[k] += 1
            sections[k] += sum(1 for e in c.edges.values() if e.is_section and e.origin is None)
        rules = {f"rule{r}": 0 for r in (1, 2, 3, 4)}
        for _, r in self.removed:
            rules[f"rule{r}"] += 1
        return {
            "components": len(self.components),
            "long_edges": len(self.long_edges),
            "components_path": kinds["path"],
            "components_tree": kinds["tree"],
            "components_other": kinds["other"],
            "sections_path": sections["path"],
            "sections_tree": sections["tree"],
            "sections_other": sections["other"],
            **rules,
        }


def component_kind(g: RoadGraph) -> str:
    """"path", "tree" or "other" for a connected graph."""
    n_v = len(g.vertices)
    n_e = len(g.edges)
    if n_e != n_v - 1:
        return "other"
    if all(len(a) <= 2 for a in g.adjacency.values()):
        return "path"
    return "tree"


def _clip(intervals, a: float, b: float) -> tuple[tuple[float, float], ...]:
    """Parts of ``intervals`` inside ``[a, b]``, shifted to start at 0."""
    out = []
    for x, y in intervals:
        lo, hi = max(x, a), min(y, b)
        if hi - lo > EPS:
            out.append((lo - a, hi - a))
    return tuple(out)


class _Work:
    """Mutable copy of the graph used during the rule pass."""

    def __init__(self, g: RoadGraph):
        self.g = g
        self.edges: dict[int, Edge] = dict(g.edges)
        self.vertices = dict(g.vertices)
        self.adj: dict[int, set[int]] = {v: set(ids) for v, ids in g.adjacency.items()}
        self.next_edge = max(g.edges, default=-1) + 1
        self.next_vertex = max(g.vertices, default=-1) + 1
        # vertex -> (vertices joined to it by junction edges, sections touching them)
        self._reach: dict[int, tuple[frozenset[int], frozenset[int]]] = {}
        self.jcount: dict[int, int] = dict.fromkeys(self.adj, 0)
        for e in self.edges.values():
            if not e.is_section:
                self.jcount[e.u] += 1
                self.jcount[e.v] += 1
        self._all_groups()

    def _all_groups(self) -> None:
        """Fill the reach cache for every junction at once."""
        jedges = [e for e in self.edges.values() if not e.is_section]
        if not jedges:
            return
        verts = sorted({x for e in jedges for x in (e.u, e.v)})
        index = {v: k for k, v in enumerate(verts)}
        rows = np.fromiter((index[e.u] for e in jedges), dtype=np.int64, count=len(jedges))
        cols = np.fromiter((index[e.v] for e in jedges), dtype=np.int64, count=len(jedges))
        n = len(verts)
        _, label = connected_components(coo_matrix((np.ones(len(jedges)), (rows, cols)), shape=(n, n)), directed=False)
        members: dict[int, list[int]] = {}
        for v, lab in zip(verts, label.tolist()):
            members.setdefault(lab, []).append(v)
        found: dict[int, set[int]] = {}
        for e in self.edges.values():
            if e.is_section:
                for x in (e.u, e.v):
                    k = index.get(x)
                    if k is not None:
                        found.setdefault(int(label[k]), set()).add(e.id)
        for lab, vs in members.items():
            group = (frozenset(vs), frozenset(found.get(lab, ())))
            for v in vs:
                self._reach[v] = group

    def _forget(self, w: int) -> None:
        group = self._reach.get(w)
        if group is not None:
            for x in group[0]:
                self._reach.pop(x, None)

    def remove(self, eid: int) -> None:
        e = self.edges.pop(eid)
        self._forget(e.u)
        self._forget(e.v)
        if not e.is_section:
            self.jcount[e.u] -= 1
            self.jcount[e.v] -= 1
        self.adj[e.u].discard(eid)
        self.adj[e.v].discard(eid)

    def reachable_sections(self, e: Edge, w: int) -> set[int]:
        """Sections other than ``e`` reachable from ``w`` over junction edges."""
        return set(self._group(w) - {e.id})

    def reaches_other(self, e: Edge, w: int) -> bool:
        return any(f != e.id for f in self._group(w))

    def reaches_only(self, e: Edge, w: int, allowed: set[int]) -> bool:
        return all(f == e.id or f in allowed for f in self._group(w))

    def _group(self, w: int) -> frozenset[int]:
        group = self._reach.get(w)
        if group is None:
            seen = {w}
            stack = [w]
            found: set[int] = set()
            while stack:
                x = stack.pop()
                for fid in self.adj[x]:
                    f = self.edges[fid]
                    if f.is_section:
                        found.add(fid)
                        continue
                    y = f.other(x)
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            group = (frozenset(seen), frozenset(found))
            for x in seen:
                self._reach[x] = group
        return group[1]

    def junction_edges_at(self, w: int) -> list[int]:
        return sorted(f for f in self.adj[w] if not self.edges[f].is_section)

    def has_junction_edges(self, w: int) -> bool:
        return self.jcount[w] > 0

    def split(self, e: Edge) -> tuple[int, int]:
        n = e.length
        mid = n / 2
        ids = []
        self._forget(e.u)
        self._forget(e.v)
        for a, b, u, v in ((0.0, mid, e.u, None), (mid, n, None, e.v)):
            if u is None:
                u = self.next_vertex
                self.next_vertex += 1
                self.vertices[u] = e.geometry.point_at(a)
                self.adj[u] = set()
                self.jcount[u] = 0
            if v is None:
                v = self.next_vertex
                self.next_vertex += 1
                self.vertices[v] = e.geometry.point_at(b)
                self.adj[v] = set()
                self.jcount[v] = 0
            h = Edge(
                self.next_edge, u, v, e.geometry.sub(a, b), e.kind, e.road,
                blocked=_clip(e.blocked, a, b), pieces=_clip(e.pieces, a, b), origin=(e.id, a),
            )
            self.next_edge += 1
            self.edges[h.id] = h
            self.adj[u].add(h.id)
            self.adj[v].add(h.id)
            ids.append(h.id)
        self.remove(e.id)
        return ids[0], ids[1]


def _has_middle(g: RoadGraph, e: Edge) -> bool:
    return bool(e.middle_intervals(g.roads[e.road].length))


def decompose(g: RoadGraph, rules: tuple[int, ...] = (1, 2, 3, 4)) -> Decomposition:
    """Apply the rules in one pass and split the rest into components.

    ``rules`` restricts the pass to a subset, which is useful for checking
    each rule on its own.
    """
    w = _Work(g)
    stubs: set[int] = set()
    long_edges: list[int] = []
    removed: list[tuple[int, int]] = []
    halves: dict[int, tuple[int, float]] = {}

    def drop(eid: int, rule: int) -> None:
        if eid in w.edges:
            w.remove(eid)
            removed.append((eid, rule))

    for eid in sorted(g.edges):
        if eid not in w.edges:
            continue
        e = w.edges[eid]
        lam = g.roads[e.road].length
        if not e.is_section:
            if 1 in rules and (not e.pass_ok or e.length > lam + EPS):
                drop(eid, 1)
            continue
        dead = [x for x in (e.u, e.v) if w.has_junction_edges(x) and not w.reaches_other(e, x)]
        if dead and 2 in rules:
            for x in dead:
                for f in w.junction_edges_at(x):
                    drop(f, 2)
            continue
        if not _has_middle(g, e):
            continue
        if 3 in rules and e.length >= 2 * lam - EPS:
            h1, h2 = w.split(e)
            stubs.update((h1, h2))
            halves[h1] = (eid, 0.0)
            halves[h2] = (eid, e.length / 2)
            long_edges.append(eid)
            continue
        ends = [
            x for x in (e.u, e.v)
            if w.has_junction_edges(x) and w.reaches_only(e, x, stubs)
        ]
        if ends and 4 in rules:
            for x in ends:
                for f in w.junction_edges_at(x):
                    drop(f, 4)
            stubs.add(eid)
            long_edges.append(eid)

    work = RoadGraph(w.vertices, w.edges, dict(g.roads), g.alpha_max, g.lmax_factor)
    comps = _components(work, g if not removed and not halves else None)
    log.debug("decomposed %d edges into %d components", len(g.edges), len(comps))
    return Decomposition(g, comps, long_edges, stubs, removed, halves)


def _components(work: RoadGraph, unchanged: RoadGraph | None = None) -> list[RoadGraph]:
    """Connected parts of ``work`` holding at least one section.

    ``unchanged`` is the input graph when the rule pass left it intact; a
    connected input is then returned as it is.
    """
    ids = sorted(work.edges)
    if not ids:
        return []
    vindex = {v: k for k, v in enumerate(sorted(work.vertices))}
    rows = np.fromiter((vindex[work.edges[i].u] for i in ids), dtype=np.int64, count=len(ids))
    cols = np.fromiter((vindex[work.edges[i].v] for i in ids), dtype=np.int64, count=len(ids))
    n = len(vindex)
    adj = coo_matrix((np.ones(len(ids)), (rows, cols)), shape=(n, n))
    _, label = connected_components(adj, directed=False)
    groups: dict[int, list[int]] = {}
    for i, comp in zip(ids, label[rows].tolist()):
        groups.setdefault(comp, []).append(i)
    if unchanged is not None and len(groups) == 1:
        return [unchanged]
    out = []
    # order components by their smallest edge id
    for members in sorted(groups.values()):
        if not any(work.edges[i].is_section for i in members):
            continue
        out.append(_subgraph(work, members))
    return out


def _subgraph(work: RoadGraph, ids: list[int]) -> RoadGraph:
    if len(ids) == len(work.edges):
        by_road_all: dict[int, list[int]] = {}
        for i in ids:
            by_road_all.setdefault(work.edges[i].road, []).append(i)
        roads = {r: replace(work.roads[r], edges=tuple(m)) for r, m in sorted(by_road_all.items())}
        used = {x for e in work.edges.values() for x in (e.u, e.v)}
        verts = {v: p for v, p in sorted(work.vertices.items()) if v in used}
        return RoadGraph(verts, dict(sorted(work.edges.items())), roads, work.alpha_max, work.lmax_factor)
    edges = {i: work.edges[i] for i in ids}
    verts = {}
    by_road: dict[int, list[int]] = {}
    for i in ids:
        e = edges[i]
        verts[e.u] = work.vertices[e.u]
        verts[e.v] = work.vertices[e.v]
        by_road.setdefault(e.road, []).append(i)
    roads: dict[int, Road] = {r: replace(work.roads[r], edges=tuple(m)) for r, m in sorted(by_road.items())}
    return RoadGraph(dict(sorted(verts.items())), edges, roads, work.alpha_max, work.lmax_factor)


def label_components(d: Decomposition, inner: Solver, threads: int = 1) -> list[Labeling]:
    """Label every component with ``inner``; results follow component order."""
    if threads <= 1 or len(d.components) <= 1:
        return [inner(c) for c in d.components]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(inner, d.components))


def _map_back(d: Decomposition, label: Label) -> Label:
    if not any(e in d.halves for e in label.path):
        return label
    path = list(label.path)
    head, tail = label.head, label.tail
    if path[0] in d.halves:
        orig, off = d.halves[path[0]]
        path[0] = orig
        head += off
        if len(path) == 1:
            tail += off
    if len(path) > 1 and path[-1] in d.halves:
        orig, off = d.halves[path[-1]]
        path[-1] = orig
        tail += off
    if len(path) > 1 and path[0] > path[-1]:
        path.reverse()
        head, tail = tail, head
    return Label(label.road, tuple(path), head, tail)


def compose(d: Decomposition, parts: list[Labeling]) -> Labeling:
    """Union of the part labelings on the original graph plus long-edge labels."""
    g = d.graph
    labels = [_map_back(d, l) for part in parts for l in part.labels]
    touched = {e for l in labels for e in l.path}
    added = 0
    for eid in sorted(d.long_edges):
        if eid in touched:
            continue
        e = g.edges[eid]
        lam = g.roads[e.road].length
        h = e.middle_intervals(lam)[0][0]
        labels.append(Label(e.road, (eid,), h, h + lam))
        added += 1
    meta = {"long_edge_labels": added, **d.stats()}
    return Labeling(labels, meta)


def divide_and_conquer(g: RoadGraph, inner: Solver, threads: int = 1) -> Labeling:
    """Decompose, label every component with ``inner`` and compose."""
    start = time.perf_counter()
    d = decompose(g)
    parts = label_components(d, inner, threads)
    result = compose(d, parts)
    result.meta["objective"] = count_labeled_sections(g, result)
    result.meta["runtime_s"] = time.perf_counter() - start
    return result
