"""Labels on the road graph, label classes, validation, counting and BaseLine.

A label of road R is a path ``e_1 .. e_k`` of edges of R whose first and last
edges are road sections. A *label class* fixes the path and leaves one degree
of freedom ``theta``:

* ``k == 1``: ``theta`` is the start offset ``h`` on the single section, and
  the label covers ``[h, h + lambda]``.
* ``k >= 2``: ``theta`` is the length covered on the head section ``e_1``;
  the tail section receives ``r - theta`` where ``r`` is ``lambda`` minus the
  total length of the internal edges.

The head is always the terminal with the lower edge id. Offsets are measured
from the source vertex of each edge, so every footprint on an edge is an
interval ``[a, b]`` whose ends are affine in ``theta`` with slopes in
{-1, 0, 1}.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .geometry import EPS, Polyline, turn_angle
from .roadgraph import Edge, RoadGraph
from .wellshape import within_piece

log = logging.getLogger(__name__)

TOL = 1e-7
# meta entries that depend on wall-clock time; left out of serialized labelings
VOLATILE_META = frozenset({"runtime_s"})


class Footprint(NamedTuple):
    """Covered part ``[a0 + a1*theta, b0 + b1*theta]`` of one edge.

    ``lo_end``/``hi_end`` say whether the label terminates at that side of the
    interval rather than continuing into the neighbouring edge.
    """

    edge: int
    a0: float
    a1: float
    b0: float
    b1: float
    lo_end: bool
    hi_end: bool

    def at(self, theta: float) -> tuple[float, float]:
        return (self.a0 + self.a1 * theta, self.b0 + self.b1 * theta)


def _leaving(e: Edge, w: int) -> tuple[float, float]:
    if w == e.u:
        return e.geometry.start_direction()
    dx, dy = e.geometry.end_direction()
    return (-dx, -dy)


def _arriving(e: Edge, w: int) -> tuple[float, float]:
    if w == e.v:
        return e.geometry.end_direction()
    dx, dy = e.geometry.start_direction()
    return (-dx, -dy)


def junction_bend(g: RoadGraph, e_in: int, w: int, e_out: int) -> float:
    """Turn angle when passing from ``e_in`` through vertex ``w`` onto ``e_out``."""
    return turn_angle(_arriving(g.edges[e_in], w), _leaving(g.edges[e_out], w))


def walk_vertices(g: RoadGraph, path: Sequence[int]) -> tuple[int, ...] | None:
    """Vertex sequence ``v_0 .. v_k`` traversed by ``path``; None if not a walk."""
    if len(path) == 1:
        e = g.edges[path[0]]
        return (e.u, e.v)
    first = g.edges[path[0]]
    for start in (first.u, first.v):
        seq = [start]
        cur = start
        ok = True
        for eid in path:
            e = g.edges[eid]
            if cur == e.u:
                cur = e.v
            elif cur == e.v:
                cur = e.u
            else:
                ok = False
                break
            seq.append(cur)
        if ok:
            return tuple(seq)
    return None


@dataclass(frozen=True)
class LabelClass:
    road: int
    path: tuple[int, ...]
    verts: tuple[int, ...]
    lo: float
    hi: float
    rest: float
    footprints: tuple[Footprint, ...]

    @property
    def is_middle(self) -> bool:
        return len(self.path) == 1

    @property
    def inner_vertices(self) -> tuple[int, ...]:
        return self.verts[1:-1]

    @property
    def terminals(self) -> tuple[int, ...]:
        return (self.path[0],) if self.is_middle else (self.path[0], self.path[-1])

    def head_interval(self, g: RoadGraph) -> tuple[float, float]:
        """Feasible head offsets measured from the source of the head edge."""
        if self.is_middle:
            return (self.lo, self.hi)
        e = g.edges[self.path[0]]
        if self.verts[1] == e.u:
            return (self.lo, self.hi)
        return (e.length - self.hi, e.length - self.lo)

    def tail_interval(self, g: RoadGraph) -> tuple[float, float]:
        if self.is_middle:
            lam = g.roads[self.road].length
            return (self.lo + lam, self.hi + lam)
        e = g.edges[self.path[-1]]
        c_lo, c_hi = self.rest - self.hi, self.rest - self.lo
        if self.verts[-2] == e.u:
            return (c_lo, c_hi)
        return (e.length - c_hi, e.length - c_lo)

    def label(self, theta: float) -> Label:
        theta = min(self.hi, max(self.lo, theta))
        head_fp, tail_fp = self.footprints[0], self.footprints[-1]
        a, b = head_fp.at(theta)
        if self.is_middle:
            return Label(self.road, self.path, a, b)
        head = b if head_fp.hi_end else a
        ta, tb = tail_fp.at(theta)
        tail = tb if tail_fp.hi_end else ta
        return Label(self.road, self.path, head, tail)


class ClassList(list):
    """List of label classes that remembers whether enumeration was cut short."""

    truncated: bool = False


def enumerate_label_classes(g: RoadGraph, limit: int | None = None) -> ClassList:
    """All non-empty label classes of ``g``, sorted by (path, lo).

    Paths are simple, follow a single road, end on two distinct road sections
    and pass only through edges that may be covered completely. Single-section
    classes are split into one class per connected range of start offsets.
    """
    out = ClassList()
    for e in sorted(g.edges.values(), key=lambda e: e.id):
        if not e.is_section:
            continue
        lam = g.roads[e.road].length
        for lo, hi in e.middle_intervals(lam):
            fp = Footprint(e.id, 0.0, 1.0, lam, 1.0, True, True)
            out.append(LabelClass(e.road, (e.id,), (e.u, e.v), lo, hi, lam, (fp,)))
        for w in (e.u, e.v):
            _extend(g, e, w, lam, out)
            if limit is not None and len(out) > limit:
                log.warning("label class enumeration truncated at %d classes", limit)
                out.truncated = True
                del out[limit:]
                out.sort(key=lambda c: (c.path, c.lo))
                return out
    out.sort(key=lambda c: (c.path, c.lo))
    return out


def _extend(g: RoadGraph, head: Edge, w: int, lam: float, out: list[LabelClass]) -> None:
    reach_h = head.reach(w)
    road = head.road
    alpha = g.alpha_max + 1e-9
    start = head.other(w)
    # stack of (path, verts, internal length)
    stack = [((head.id,), (start, w), 0.0)]
    while stack:
        path, verts, internal = stack.pop()
        cur = verts[-1]
        last = path[-1]
        for fid in g.adjacency[cur]:
            f = g.edges[fid]
            if fid in path or f.road != road:
                continue
            nxt = f.other(cur)
            if nxt in verts:
                continue
            if junction_bend(g, last, cur, fid) > alpha:
                continue
            if f.is_section and fid > head.id:
                r = lam - internal
                lo = max(0.0, r - f.reach(cur))
                hi = min(reach_h, r)
                if r >= -EPS and lo <= hi + EPS:
                    lo, hi = min(lo, hi), hi
                    out.append(_make_class(g, road, path + (fid,), verts + (nxt,), lo, hi, max(r, 0.0)))
            if f.pass_ok and internal + f.length <= lam + EPS:
                stack.append((path + (fid,), verts + (nxt,), internal + f.length))


def _make_class(g, road, path, verts, lo, hi, r) -> LabelClass:
    fps = []
    k = len(path)
    for i, eid in enumerate(path):
        e = g.edges[eid]
        n = e.length
        if i == 0:
            if verts[1] == e.u:
                fps.append(Footprint(eid, 0.0, 0.0, 0.0, 1.0, False, True))
            else:
                fps.append(Footprint(eid, n, -1.0, n, 0.0, True, False))
        elif i == k - 1:
            if verts[-2] == e.u:
                fps.append(Footprint(eid, 0.0, 0.0, r, -1.0, False, True))
            else:
                fps.append(Footprint(eid, n - r, 1.0, n, 0.0, True, False))
        else:
            fps.append(Footprint(eid, 0.0, 0.0, n, 0.0, False, False))
    return LabelClass(road, tuple(path), tuple(verts), lo, hi, r, tuple(fps))


# ---------------------------------------------------------------- labels


@dataclass(frozen=True)
class Label:
    """A placed label: edge path plus head/tail offsets from edge sources.

    For a single-section label ``head < tail`` are the start and end offsets.
    """

    road: int
    path: tuple[int, ...]
    head: float
    tail: float

    def footprints(self, g: RoadGraph) -> list[tuple[int, tuple[float, float]]]:
        if len(self.path) == 1:
            return [(self.path[0], (self.head, self.tail))]
        verts = walk_vertices(g, self.path)
        if verts is None:
            raise ValueError(f"path {self.path} is not a walk")
        out = []
        for i, eid in enumerate(self.path):
            e = g.edges[eid]
            if i == 0:
                span = (0.0, self.head) if verts[1] == e.u else (self.head, e.length)
            elif i == len(self.path) - 1:
                span = (0.0, self.tail) if verts[-2] == e.u else (self.tail, e.length)
            else:
                span = (0.0, e.length)
            out.append((eid, span))
        return out

    def junction_bends(self, g: RoadGraph) -> list[float]:
        if len(self.path) == 1:
            return []
        verts = walk_vertices(g, self.path)
        return [junction_bend(g, a, w, b) for a, w, b in zip(self.path, verts[1:], self.path[1:])]

    def polyline(self, g: RoadGraph) -> Polyline:
        """Label geometry in traversal order, from the head end."""
        pts: list = []
        verts = walk_vertices(g, self.path) if len(self.path) > 1 else None
        for i, (eid, (a, b)) in enumerate(self.footprints(g)):
            e = g.edges[eid]
            forward = verts is None or verts[i] == e.u
            if b - a > EPS:
                part = list(e.geometry.sub(a, b).coords)
            else:
                part = [e.geometry.point_at(a)]
            pts.extend(part if forward else part[::-1])
        return Polyline(pts)

    def to_dict(self) -> dict:
        return {"road": self.road, "path": list(self.path), "head": self.head, "tail": self.tail}

    @classmethod
    def from_dict(cls, d: dict) -> Label:
        return cls(int(d["road"]), tuple(int(i) for i in d["path"]), float(d["head"]), float(d["tail"]))


@dataclass
class Labeling:
    labels: list[Label] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def sorted(self) -> Labeling:
        return Labeling(sorted(self.labels, key=lambda l: (l.path, l.head, l.tail)), dict(self.meta))

    def labeled_sections(self, g: RoadGraph) -> set[int]:
        return {eid for l in self.labels for eid in l.path if g.edges[eid].is_section}

    def to_dict(self, g: RoadGraph | None = None) -> dict:
        meta = {k: v for k, v in self.meta.items() if k not in VOLATILE_META}
        d = {"labels": [l.to_dict() for l in self.sorted().labels], "meta": meta}
        if g is not None:
            d["stats"] = {
                "labels_placed": len(self.labels),
                "sections_labeled": count_labeled_sections(g, self),
                "sections_countable": sum(1 for i in g.edges if g.is_countable(i)),
                "sections_total": len(g.sections()),
            }
        return d

    def dumps(self, g: RoadGraph | None = None) -> str:
        return json.dumps(self.to_dict(g), sort_keys=True, separators=(",", ":"))

    def save(self, path: str | Path, g: RoadGraph | None = None) -> None:
        Path(path).write_text(self.dumps(g) + "\n")

    @classmethod
    def from_dict(cls, d: dict) -> Labeling:
        return cls([Label.from_dict(x) for x in d["labels"]], dict(d.get("meta", {})))

    @classmethod
    def load(cls, path: str | Path) -> Labeling:
        return cls.from_dict(json.loads(Path(path).read_text()))


def count_labeled_sections(g: RoadGraph, labeling: Labeling) -> int:
    """Countable sections touched by at least one label.

    Halves produced by cutting a section never count on their own; the
    decomposition maps them back to the original section before counting.
    """
    return len(labeled_countable(g, labeling))


def labeled_countable(g: RoadGraph, labeling: Labeling) -> set[int]:
    return {eid for eid in labeling.labeled_sections(g) if g.is_countable(eid)}


# ---------------------------------------------------------------- validation


def _label_geometry(g: RoadGraph, label: Label):
    """Footprints with end flags, pass-through vertices and endpoint locations.

    A label that merely ends at a vertex does not occupy it: two labels may
    meet at a point as long as that point is an end of at least one of them
    or lies on a shared edge where both end.
    """
    verts = walk_vertices(g, label.path)
    fps = label.footprints(g)
    k = len(fps)
    spans = []
    passed: set[int] = set(verts[1:-1]) if k > 1 else set()
    for i, (eid, (a, b)) in enumerate(fps):
        e = g.edges[eid]
        if k == 1:
            lo_end = hi_end = True
        elif i == 0:
            lo_end, hi_end = (False, True) if verts[1] == e.u else (True, False)
        elif i == k - 1:
            lo_end, hi_end = (False, True) if verts[-2] == e.u else (True, False)
        else:
            lo_end = hi_end = False
        spans.append((eid, a, b, lo_end, hi_end))
    ends = {(label.path[0], label.head), (label.path[-1], label.tail)}
    return spans, passed, ends


def _is_endpoint(info, eid: int, s: float) -> bool:
    _, _, ends = info
    return any(e == eid and abs(x - s) <= TOL for e, x in ends)


def label_diagnostics(g: RoadGraph, label: Label) -> list[str]:
    """Problems with a single label, ignoring interaction with other labels."""
    out = []
    tag = f"label {label.path}"
    if label.road not in g.roads:
        return [f"{tag}: unknown road {label.road}"]
    for eid in label.path:
        if eid not in g.edges:
            return [f"{tag}: unknown edge {eid}"]
        if g.edges[eid].road != label.road:
            out.append(f"{tag}: edge {eid} is not on road {label.road}")
    if len(set(label.path)) != len(label.path):
        out.append(f"{tag}: repeats an edge")
    verts = walk_vertices(g, label.path)
    if verts is None:
        return out + [f"{tag}: edges do not form a path"]
    if len(label.path) > 1 and len(set(verts)) != len(verts):
        out.append(f"{tag}: path is not simple")
    for eid in (label.path[0], label.path[-1]):
        if not g.edges[eid].is_section:
            out.append(f"{tag}: terminal edge {eid} is not a road section")
    lam = g.roads[label.road].length
    total = 0.0
    for eid, (a, b) in label.footprints(g):
        e = g.edges[eid]
        if a < -TOL or b > e.length + TOL or a > b + TOL:
            out.append(f"{tag}: span [{a}, {b}] outside edge {eid}")
            continue
        total += b - a
        for x, y in e.blocked:
            if min(b, y) - max(a, x) > TOL:
                out.append(f"{tag}: covers blocked range [{x}, {y}] of edge {eid}")
        if not within_piece(e.pieces, a, b, TOL):
            out.append(f"{tag}: span [{a}, {b}] of edge {eid} is not within one well-shaped piece")
    if abs(total - lam) > 1e-9 * max(1.0, lam) + 1e-9 * len(label.path):
        out.append(f"{tag}: length {total} differs from name length {lam}")
    for angle in label.junction_bends(g):
        if angle > g.alpha_max + 1e-9:
            out.append(f"{tag}: bend of {angle:.3f} degrees between edges")
    return out


def validate_labeling(g: RoadGraph, labeling: Labeling) -> list[str]:
    """Empty iff every label is valid and no two labels overlap."""
    out = []
    infos = []
    for label in labeling.labels:
        diag = label_diagnostics(g, label)
        out.extend(diag)
        infos.append(None if diag else _label_geometry(g, label))
    by_edge: dict[int, list[int]] = {}
    by_vertex: dict[int, list[int]] = {}
    for i, info in enumerate(infos):
        if info is None:
            continue
        for eid, *_ in info[0]:
            by_edge.setdefault(eid, []).append(i)
        for w in info[1]:
            by_vertex.setdefault(w, []).append(i)
    reported = set()
    for eid, users in sorted(by_edge.items()):
        for i, j in itertools.combinations(users, 2):
            if (i, j) in reported:
                continue
            if _edge_overlap(infos[i], infos[j], eid):
                reported.add((i, j))
                out.append(f"labels {labeling.labels[i].path} and {labeling.labels[j].path} overlap on edge {eid}")
    for w, users in sorted(by_vertex.items()):
        for i, j in itertools.combinations(users, 2):
            if (i, j) in reported:
                continue
            reported.add((i, j))
            out.append(f"labels {labeling.labels[i].path} and {labeling.labels[j].path} both pass vertex {w}")
    return out


def _edge_overlap(ia, ib, eid: int) -> bool:
    sa = next(s for s in ia[0] if s[0] == eid)
    sb = next(s for s in ib[0] if s[0] == eid)
    _, a0, a1, _, _ = sa
    _, b0, b1, _, _ = sb
    common = min(a1, b1) - max(a0, b0)
    if common > TOL:
        return True
    if common < -TOL:
        return False
    p = max(a0, b0)
    return not (_is_endpoint(ia, eid, p) and _is_endpoint(ib, eid, p))


# ---------------------------------------------------------------- class pairs


class Order(NamedTuple):
    """Linear requirement ``hi(first) <= lo(second)`` on a shared edge."""

    first: int
    second: int
    c: float
    k_first: float
    k_second: float
    edge: int


def pair_relation(a: LabelClass, b: LabelClass, ia: int = 0, ib: int = 1):
    """How two classes may coexist.

    Returns None when they can never be placed together, otherwise a list with
    one entry per shared edge; each entry lists the admissible orders as linear
    constraints ``c + k_first*theta_first - k_second*theta_second <= 0``.
    """
    if set(a.inner_vertices) & set(b.inner_vertices):
        return None
    fa = {f.edge: f for f in a.footprints}
    shared = []
    for fb in b.footprints:
        f = fa.get(fb.edge)
        if f is None:
            continue
        options = []
        if f.hi_end and fb.lo_end:
            options.append(Order(ia, ib, f.b0 - fb.a0, f.b1, fb.a1, fb.edge))
        if fb.hi_end and f.lo_end:
            options.append(Order(ib, ia, fb.b0 - f.a0, fb.b1, f.a1, fb.edge))
        if not options:
            return None
        shared.append(options)
    return shared


# ---------------------------------------------------------------- solvers


def baseline(g: RoadGraph) -> Labeling:
    """One label per section that can hold it alone, at its leftmost offset."""
    labels = []
    for e in sorted(g.sections(), key=lambda e: e.id):
        lam = g.roads[e.road].length
        iv = e.middle_intervals(lam)
        if iv:
            h = iv[0][0]
            labels.append(Label(e.road, (e.id,), h, h + lam))
    return Labeling(labels, {"algorithm": "baseline"})


class InstanceTooLarge(ValueError):
    pass


def brute_force_optimum(g: RoadGraph, max_sections: int = 12, max_classes: int = 20) -> Labeling:
    """Optimal labeling by exhaustive search over class subsets.

    Positions are decided exactly by a linear feasibility program for every
    combination of placement orders on shared edges.
    """
    countable = [i for i in g.edges if g.is_countable(i)]
    if len(countable) > max_sections:
        raise InstanceTooLarge(f"{len(countable)} countable sections exceed the limit of {max_sections}")
    classes = enumerate_label_classes(g)
    if len(classes) > max_classes:
        raise InstanceTooLarge(f"{len(classes)} label classes exceed the limit of {max_classes}")
    return _BruteForce(g, list(classes)).run()


class _BruteForce:
    def __init__(self, g: RoadGraph, classes: list[LabelClass]):
        self.g = g
        self.classes = classes
        self.gain = [frozenset(e for e in c.path if g.is_countable(e)) for c in classes]
        n = len(classes)
        self.rel = {}
        for i in range(n):
            for j in range(i + 1, n):
                self.rel[(i, j)] = pair_relation(classes[i], classes[j], i, j)
        self.best_count = -1
        self.best: tuple[list[int], dict[int, float]] = ([], {})
        # suffix unions bound what the remaining classes can still add
        self.suffix = [frozenset()] * (n + 1)
        for i in range(n - 1, -1, -1):
            self.suffix[i] = self.suffix[i + 1] | self.gain[i]

    def run(self) -> Labeling:
        self._dfs(0, [], frozenset(), {})
        chosen, theta = self.best
        labels = [self.classes[i].label(theta[i]) for i in chosen]
        return Labeling(labels, {"algorithm": "oracle"})

    def _dfs(self, i: int, chosen: list[int], covered: frozenset, theta: dict[int, float]) -> None:
        if len(covered) > self.best_count:
            self.best_count = len(covered)
            self.best = (list(chosen), dict(theta))
        if i == len(self.classes):
            return
        if len(covered | self.suffix[i]) <= self.best_count:
            return
        if not self.gain[i] <= covered and self.gain[i]:
            rels = [self.rel[(j, i)] for j in chosen]
            if all(r is not None for r in rels):
                sol = self._positions(chosen + [i])
                if sol is not None:
                    self._dfs(i + 1, chosen + [i], covered | self.gain[i], sol)
        self._dfs(i + 1, chosen, covered, theta)

    def _positions(self, members: list[int]) -> dict[int, float] | None:
        from scipy.optimize import linprog

        idx = {c: k for k, c in enumerate(members)}
        groups = []
        for x, y in itertools.combinations(members, 2):
            groups.extend(self.rel[(min(x, y), max(x, y))])
        bounds = [(self.classes[c].lo, self.classes[c].hi) for c in members]
        if not groups:
            return {c: self.classes[c].lo for c in members}
        for choice in itertools.product(*groups):
            rows, rhs = [], []
            for o in choice:
                row = [0.0] * len(members)
                row[idx[o.first]] += o.k_first
                row[idx[o.second]] -= o.k_second
                rows.append(row)
                rhs.append(-o.c + 1e-12)
            res = linprog([0.0] * len(members), A_ub=rows, b_ub=rhs, bounds=bounds, method="highs")
            if res.status == 0:
                return {c: float(res.x[idx[c]]) for c in members}
        return None


def labeling_from_classes(classes: Iterable[LabelClass], theta: Iterable[float], meta: dict | None = None) -> Labeling:
    return Labeling([c.label(t) for c, t in zip(classes, theta)], dict(meta or {}))
