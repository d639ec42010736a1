"""Optimal labeling of trees and the spanning-tree heuristic for general graphs.

The tree is rooted at a junction. Every section hangs below a parent
junction and may carry a child junction at its far end. A label that enters
a section from its parent junction with ``x`` length still to place either
ends on that section or runs through it into the child junction. The best
count of a subtree as a function of ``x`` is piecewise constant and is kept
as a list of closed pieces ``(lo, hi, value, how)``.

Inside a junction, labels cross between two attached sections along the
unique junction path. Crossings that share a vertex exclude each other, so
each junction solves a small maximum-weight packing of paths.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from ..kernels import pair_sup, prune_pieces
from ..labelcore import Label, Labeling, junction_bend
from ..roadgraph import RoadGraph, junctions

log = logging.getLogger(__name__)

TOL = 1e-9


# ---------------------------------------------------------------- spanning tree


def spanning_tree(g: RoadGraph) -> RoadGraph:
    """Spanning forest keeping every section and the most useful junction edges.

    Junction edges are added by decreasing usefulness, then by length and
    id, so of two otherwise equal parallel edges the lower id survives.
    """
    parent = {v: v for v in g.vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    weight = junction_edge_weights(g)
    keep = []
    sections = sorted(e.id for e in g.sections())
    others = sorted(
        (e for e in g.edges.values() if not e.is_section),
        key=lambda e: (-weight.get(e.id, 0.0), e.length, e.id),
    )
    for e in [g.edges[i] for i in sections] + others:
        a, b = find(e.u), find(e.v)
        if a == b:
            if e.is_section:
                raise ValueError(f"sections alone form a cycle at edge {e.id}")
            continue
        parent[max(a, b)] = min(a, b)
        keep.append(e.id)
    if len(keep) == len(g.edges):
        return g
    return g.subgraph(keep)


def crossing_length(g: RoadGraph, a: int, b: int, edges: list[int], verts: list[int]) -> float | None:
    """Length of the junction path from section ``a`` to section ``b`` if a label may follow it.

    ``verts`` lists the path's vertices from the attachment of ``a`` to that
    of ``b``.
    """
    ea = g.edges[a]
    if ea.road != g.edges[b].road:
        return None
    length = 0.0
    for eid in edges:
        e = g.edges[eid]
        if e.road != ea.road or not e.pass_ok:
            return None
        length += e.length
    if length > g.roads[ea.road].length + TOL:
        return None
    alpha = g.alpha_max + 1e-9
    seq = [a] + list(edges) + [b]
    for k in range(len(seq) - 1):
        if junction_bend(g, seq[k], verts[k], seq[k + 1]) > alpha:
            return None
    return length


def junction_edge_weights(g: RoadGraph) -> dict[int, float]:
    """Usefulness of each junction edge for labels crossing its junction.

    A crossing between two sections is worth one for every countable
    section it joins that cannot hold a label on its own, plus a small
    amount for being possible at all. An edge scores its best crossing.
    Paths inside a junction are taken with the fewest edges.
    """
    weight: dict[int, float] = {}
    alone: dict[int, float] = {}

    def worth(s: int) -> float:
        if s not in alone:
            e = g.edges[s]
            alone[s] = 0.0 if not g.is_countable(s) or e.middle_intervals(g.roads[e.road].length) else 1.0
        return alone[s]

    for jn in junctions(g):
        verts: dict[int, list[tuple[int, int]]] = {}
        for eid in jn.edges:
            e = g.edges[eid]
            verts.setdefault(e.u, []).append((eid, e.v))
            verts.setdefault(e.v, []).append((eid, e.u))
        attach = sorted(
            (f, v) for v in verts for f in g.adjacency[v] if g.edges[f].is_section
        )
        for k, (a, va) in enumerate(attach):
            up = {va: None}
            queue = [va]
            for x in queue:
                for eid, y in verts[x]:
                    if y not in up:
                        up[y] = (eid, x)
                        queue.append(y)
            for b, vb in attach[k + 1 :]:
                if vb not in up or g.edges[b].road != g.edges[a].road:
                    continue
                edges, path_v = [], [vb]
                x = vb
                while up[x] is not None:
                    eid, x = up[x]
                    edges.append(eid)
                    path_v.append(x)
                edges.reverse()
                path_v.reverse()
                if crossing_length(g, a, b, edges, path_v) is None:
                    continue
                w = worth(a) + worth(b) + 0.1
                for eid in edges:
                    weight[eid] = max(weight.get(eid, 0.0), w)
    return weight


# ---------------------------------------------------------------- structure


@dataclass
class _Junction:
    id: int
    adj: dict[int, list[tuple[int, int]]] = field(default_factory=dict)  # vertex -> [(edge, other)]
    attach: dict[int, int] = field(default_factory=dict)  # section -> vertex
    parent_section: int | None = None
    children: list[int] = field(default_factory=list)
    _up: dict[int, tuple[int, int] | None] = field(default_factory=dict)
    _depth: dict[int, int] = field(default_factory=dict)

    def index_paths(self) -> None:
        root = min(self.adj)
        self._up = {root: None}
        self._depth = {root: 0}
        stack = [root]
        while stack:
            v = stack.pop()
            for eid, w in self.adj[v]:
                if w not in self._up:
                    self._up[w] = (eid, v)
                    self._depth[w] = self._depth[v] + 1
                    stack.append(w)

    def path(self, a: int, b: int) -> tuple[list[int], list[int]]:
        """Edges and vertices from ``a`` to ``b`` inside the junction."""
        left_e, left_v, right_e, right_v = [], [a], [], [b]
        x, y = a, b
        while x != y:
            if self._depth[x] >= self._depth[y]:
                eid, x = self._up[x]
                left_e.append(eid)
                left_v.append(x)
            else:
                eid, y = self._up[y]
                right_e.append(eid)
                right_v.append(y)
        return left_e + right_e[::-1], left_v + right_v[-2::-1]


@dataclass
class _Crossing:
    a: int  # section
    b: int
    edges: list[int]
    verts: frozenset
    length: float


class _TreeSolver:
    def __init__(self, t: RoadGraph):
        self.t = t
        self.junction_of: dict[int, int] = {}
        self.junctions: dict[int, _Junction] = {}
        self._build_junctions()
        # per section: (parent junction, parent vertex, child vertex, child junction)
        self.orient: dict[int, tuple[int | None, int, int, int | None]] = {}
        self.U: dict[int, list] = {}
        self.N: dict[int, tuple[int, tuple]] = {}
        self.W: dict[int, list] = {}
        self.Wnone: dict[int, tuple[int, list]] = {}
        self.avoid_sel: dict[tuple[int, int], tuple[int, list]] = {}
        self.cross: dict[int, dict[tuple[int, int], _Crossing]] = {}
        self.pair_value: dict[tuple[int, int], int] = {}
        self.labels: list[Label] = []
        self.total = 0
        # selections still to be realized; an explicit stack keeps deep trees off the call stack
        self.pending: list[tuple[int | None, list]] = []

    # structure ---------------------------------------------------------

    def _build_junctions(self) -> None:
        t = self.t
        parent: dict[int, int] = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in t.edges.values():
            if e.is_section:
                continue
            for w in (e.u, e.v):
                parent.setdefault(w, w)
            a, b = find(e.u), find(e.v)
            if a != b:
                parent[max(a, b)] = min(a, b)
        for w in sorted(parent):
            r = find(w)
            self.junction_of[w] = r
            self.junctions.setdefault(r, _Junction(r))
        for eid in sorted(t.edges):
            e = t.edges[eid]
            if e.is_section:
                for w in (e.u, e.v):
                    if w in self.junction_of:
                        self.junctions[self.junction_of[w]].attach[eid] = w
            else:
                j = self.junctions[self.junction_of[e.u]]
                j.adj.setdefault(e.u, []).append((eid, e.v))
                j.adj.setdefault(e.v, []).append((eid, e.u))
        for j in self.junctions.values():
            j.index_paths()

    def _root_component(self, start_section: int | None, root_junction: int | None):
        """Orient sections and junctions below a root; returns bottom-up order."""
        order = []
        if root_junction is None:
            e = self.t.edges[start_section]
            self.orient[e.id] = (None, e.u, e.v, None)
            order.append(("s", e.id))
            return order
        stack = [("j", root_junction, None)]
        while stack:
            kind, x, via = stack.pop()
            order.append((kind, x))
            if kind == "j":
                jn = self.junctions[x]
                jn.parent_section = via
                jn.children = sorted(s for s in jn.attach if s != via)
                for s in jn.children:
                    stack.append(("s", s, x))
            else:
                e = self.t.edges[x]
                p = self.junctions[via].attach[x]
                c = e.other(p)
                cj = self.junction_of.get(c)
                self.orient[x] = (via, p, c, cj)
                if cj is not None:
                    stack.append(("j", cj, x))
        order.reverse()
        return order

    def _crossing(self, jn: _Junction, a: int, b: int) -> _Crossing | None:
        if self.t.edges[a].road != self.t.edges[b].road:
            return None
        edges, verts = jn.path(jn.attach[a], jn.attach[b])
        length = crossing_length(self.t, a, b, edges, verts)
        if length is None:
            return None
        return _Crossing(a, b, edges, frozenset(verts), length)

    # bottom-up ---------------------------------------------------------

    def solve(self) -> Labeling:
        t = self.t
        done_sections: set[int] = set()
        roots = []
        seen_j: set[int] = set()
        for r in sorted(self.junctions):
            if r in seen_j:
                continue
            order = self._root_component(None, r)
            for kind, x in order:
                if kind == "j":
                    seen_j.add(x)
                else:
                    done_sections.add(x)
            roots.append(("j", r, order))
        for e in sorted(t.sections(), key=lambda e: e.id):
            if e.id not in done_sections:
                order = self._root_component(e.id, None)
                roots.append(("s", e.id, order))
        for kind, r, order in roots:
            for k, x in order:
                if k == "s":
                    self._section(x)
                else:
                    self._junction(x)
            if kind == "j":
                val, sel = self.Wnone[r]
                self.pending.append((r, sel))
            else:
                val = self.N[r][0]
                self.pending.append((None, [("N", r)]))
            self.total += val
            while self.pending:
                self._realize_selection(*self.pending.pop())
        return Labeling(self.labels, {"algorithm": "tree", "objective": self.total})

    def _cnt(self, s: int) -> int:
        return 1 if self.t.is_countable(s) else 0

    def _side_range(self, s: int, wp) -> tuple[float, float] | None:
        """Coverage ``y`` on ``s`` for a label entering the child junction with ``lam - y`` left."""
        e = self.t.edges[s]
        lam = self.t.roads[e.road].length
        _, _, c, _ = self.orient[s]
        ylo = max(0.0, lam - wp[1])
        yhi = min(e.reach(c), lam - wp[0], e.length)
        if ylo <= yhi + TOL:
            return ylo, max(ylo, yhi)
        return None

    def _section(self, s: int) -> None:
        e = self.t.edges[s]
        lam = self.t.roads[e.road].length
        pj, p, c, cj = self.orient[s]
        n = e.length
        cnt = self._cnt(s)
        wnone = self.Wnone[cj][0] if cj is not None else 0
        wpieces = self.W.get(cj, []) if cj is not None else []
        m = min(e.reach(p), n)
        pieces = [(0.0, m, cnt + wnone, ("none",))]
        best_side = None
        for wp in wpieces:
            yr = self._side_range(s, wp)
            if yr is None:
                continue
            xmax = min(m, n - yr[0])
            if xmax >= -TOL:
                pieces.append((0.0, max(0.0, xmax), cnt + wp[2], ("side", wp)))
            if best_side is None or wp[2] > best_side[2]:
                best_side = wp
        if e.pass_ok:
            for wp in wpieces:
                lo, hi = wp[0] + n, min(wp[1] + n, lam)
                if lo <= hi + TOL:
                    pieces.append((lo, max(lo, hi), cnt + wp[2], ("pass", wp)))
        if pj is not None:
            self.U[s] = prune_pieces(pieces, TOL)
        mid = e.middle_intervals(lam)
        opt_mid = wnone + (cnt if mid else 0)
        if best_side is not None and cnt + best_side[2] > opt_mid:
            self.N[s] = (cnt + best_side[2], ("side", best_side))
        else:
            self.N[s] = (opt_mid, ("mid", mid[0][0]) if mid else ("none",))

    def _junction(self, j: int) -> None:
        jn = self.junctions[j]
        kids = jn.children
        cross: dict[tuple[int, int], _Crossing] = {}
        for i, a in enumerate(kids):
            for b in kids[i + 1 :]:
                c = self._crossing(jn, a, b)
                if c is None:
                    continue
                lam = self.t.roads[self.t.edges[a].road].length
                val, _ = pair_sup(self.U[a], self.U[b], lam - c.length, TOL)
                if val is None:
                    continue
                cross[(a, b)] = c
                self.pair_value[(a, b)] = val
        self.cross[j] = cross
        self.Wnone[j] = self._packing(j, frozenset(), None)
        ps = jn.parent_section
        if ps is None:
            return
        lam = self.t.roads[self.t.edges[ps].road].length
        pieces = []
        for b in kids:
            c = self._crossing(jn, ps, b)
            if c is None:
                continue
            val, sel = self._packing(j, c.verts, b)
            self.avoid_sel[(j, b)] = (val, sel)
            for up in self.U[b]:
                lo, hi = up[0] + c.length, min(up[1] + c.length, lam)
                if lo <= hi + TOL:
                    pieces.append((lo, max(lo, hi), up[2] + val, (b, up, c)))
        self.W[j] = prune_pieces(pieces, TOL)

    def _packing(self, j: int, avoid: frozenset, exclude: int | None) -> tuple[int, list]:
        """Best vertex-disjoint crossing set among child sections of ``j``."""
        jn = self.junctions[j]
        kids = [s for s in jn.children if s != exclude]
        base = sum(self.N[s][0] for s in kids)
        cands = []
        for (a, b), c in self.cross[j].items():
            if a == exclude or b == exclude or c.verts & avoid:
                continue
            gain = self.pair_value[(a, b)] - self.N[a][0] - self.N[b][0]
            if gain > 0:
                cands.append((gain, a, b, c))
        cands.sort(key=lambda x: (-x[0], x[1], x[2]))
        best = [0, []]
        suffix = [0] * (len(cands) + 1)
        for k in range(len(cands) - 1, -1, -1):
            suffix[k] = suffix[k + 1] + cands[k][0]

        def rec(k, used, total, chosen):
            if total > best[0]:
                best[0], best[1] = total, list(chosen)
            if k == len(cands) or total + suffix[k] <= best[0]:
                return
            gain, a, b, c = cands[k]
            if not (c.verts & used):
                chosen.append((a, b))
                rec(k + 1, used | c.verts, total + gain, chosen)
                chosen.pop()
            rec(k + 1, used, total, chosen)

        rec(0, frozenset(), 0, [])
        crossed = {x for pair in best[1] for x in pair}
        sel = [("cross", a, b) for a, b in best[1]] + [("N", s) for s in kids if s not in crossed]
        return base + best[0], sel

    # reconstruction ----------------------------------------------------

    def _emit(self, edges: list[int], start_cov: float, end_cov: float) -> None:
        t = self.t
        verts = [None] * (len(edges) + 1)
        e0, e1 = t.edges[edges[0]], t.edges[edges[1]]
        verts[1] = e0.u if e0.u in (e1.u, e1.v) else e0.v
        verts[0] = e0.other(verts[1])
        for k in range(1, len(edges)):
            verts[k + 1] = t.edges[edges[k]].other(verts[k])
        if edges[0] > edges[-1]:
            edges = edges[::-1]
            verts = verts[::-1]
            start_cov, end_cov = end_cov, start_cov
        h, tl = t.edges[edges[0]], t.edges[edges[-1]]
        head = start_cov if verts[1] == h.u else h.length - start_cov
        tail = end_cov if verts[-2] == tl.u else tl.length - end_cov
        self.labels.append(Label(h.road, tuple(edges), head, tail))

    def _down(self, s: int, x: float, piece) -> tuple[list[int], float]:
        """Realize ``U[s]`` at ``x``; returns the label's edges from ``s`` down and its end coverage."""
        x = min(max(x, piece[0]), piece[1])
        how = piece[3]
        _, p, c, cj = self.orient[s]
        if how[0] == "none":
            if cj is not None:
                self.pending.append((cj, self.Wnone[cj][1]))
            return [s], x
        if how[0] == "side":
            wp = how[1]
            y = self._side_range(s, wp)[0]
            edges, cov = self._down_junction(cj, self.t.roads[self.t.edges[s].road].length - y, wp)
            self._emit([s] + edges, y, cov)
            return [s], x
        edges, cov = self._down_junction(cj, x - self.t.edges[s].length, how[1])
        return [s] + edges, cov

    def _down_junction(self, j: int, a: float, wp) -> tuple[list[int], float]:
        b, up, c = wp[3]
        self.pending.append((j, self.avoid_sel[(j, b)][1]))
        edges, cov = self._down(b, a - c.length, up)
        return c.edges + edges, cov

    def _realize_selection(self, j: int | None, sel: list) -> None:
        for item in sel:
            if item[0] == "N":
                self._realize_N(item[1])
                continue
            _, a, b = item
            c = self.cross[j][(a, b)]
            lam = self.t.roads[self.t.edges[a].road].length
            total = lam - c.length
            target = self.pair_value[(a, b)]
            pa, pb, x = _find_split(self.U[a], self.U[b], total, target)
            ea, cova = self._down(a, x, pa)
            eb, covb = self._down(b, total - x, pb)
            self._emit(ea[::-1] + c.edges + eb, cova, covb)

    def _realize_N(self, s: int) -> None:
        val, how = self.N[s]
        e = self.t.edges[s]
        _, _, c, cj = self.orient[s]
        lam = self.t.roads[e.road].length
        if how[0] == "side":
            wp = how[1]
            y = self._side_range(s, wp)[0]
            edges, cov = self._down_junction(cj, lam - y, wp)
            self._emit([s] + edges, y, cov)
            return
        if how[0] == "mid":
            self.labels.append(Label(e.road, (s,), how[1], how[1] + lam))
        if cj is not None:
            self.pending.append((cj, self.Wnone[cj][1]))


def _find_split(p1, p2, total: float, target: int):
    best = None
    for q1 in p1:
        for q2 in p2:
            lo = max(q1[0], total - q2[1])
            hi = min(q1[1], total - q2[0])
            if lo <= hi + TOL and q1[2] + q2[2] == target:
                x = min(lo, q1[1])
                if best is None or x < best[2]:
                    best = (q1, q2, x)
    if best is None:
        raise RuntimeError("tree reconstruction lost its optimal split")
    return best


def tree_label(t: RoadGraph) -> Labeling:
    """Labeling of the forest ``t`` covering the most countable sections."""
    start = time.perf_counter()
    solver = _TreeSolver(t)
    result = solver.solve()
    result.meta["runtime_s"] = time.perf_counter() - start
    return result


def tree_heuristic(g: RoadGraph) -> Labeling:
    """Optimal labeling of a spanning tree of ``g``; valid on ``g`` as well."""
    start = time.perf_counter()
    result = tree_label(spanning_tree(g))
    result.meta["runtime_s"] = time.perf_counter() - start
    return result
