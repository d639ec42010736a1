"""Exact solver: branch-and-bound over class selection bits.

The LP relaxation maximizes the number of covered countable sections subject
to clique inequalities. Cliques come from the two ends of every section and
from every vertex a class passes through. Once a relaxation is integral,
the chosen classes are placed by :func:`solve_positions`. An infeasible
placement yields a no-good cut on the classes of the offending cycle.

Two dominance rules shrink the search without changing the optimum. A
single-section class never shares its section with another chosen class,
since that other class already labels the section. For the same reason two
single-section classes never share a section.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

from ..labelcore import LabelClass, Labeling, enumerate_label_classes
from ..roadgraph import RoadGraph
from .positions import TwoVarConstraint, solve_positions

log = logging.getLogger(__name__)

INT_TOL = 1e-6


@dataclass
class ExactModel:
    classes: list[LabelClass]
    gains: list[tuple[int, ...]]
    cliques: list[tuple[int, ...]]
    # class pair -> constraint "hi(first) <= lo(second)" in theta terms
    orders: dict[tuple[int, int], list[TwoVarConstraint]] = field(default_factory=dict)

    def order_constraints(self, chosen: list[int]) -> list[TwoVarConstraint]:
        s = set(chosen)
        out = []
        for (a, b), cons in self.orders.items():
            if a in s and b in s:
                out.extend(cons)
        return out


def build_model(g: RoadGraph, classes: list[LabelClass]) -> ExactModel:
    """Cliques and ordering constraints among ``classes`` on ``g``."""
    internal: dict[int, list[int]] = {}
    middle: dict[int, list[int]] = {}
    term: dict[tuple[int, int], list[tuple[int, int]]] = {}  # (edge, vertex) -> (class, footprint idx)
    through: dict[int, list[int]] = {}
    for i, c in enumerate(classes):
        if c.is_middle:
            middle.setdefault(c.path[0], []).append(i)
            continue
        for v in c.inner_vertices:
            through.setdefault(v, []).append(i)
        for pos, fp in enumerate(c.footprints):
            e = g.edges[fp.edge]
            if 0 < pos < len(c.path) - 1:
                internal.setdefault(fp.edge, []).append(i)
            else:
                w = c.verts[1] if pos == 0 else c.verts[-2]
                term.setdefault((fp.edge, w), []).append((i, pos))
    cliques: set[tuple[int, ...]] = set()
    for v, members in through.items():
        if len(members) > 1:
            cliques.add(tuple(sorted(set(members))))
    orders: dict[tuple[int, int], list[TwoVarConstraint]] = {}
    for e in g.sections():
        at_u = [i for i, _ in term.get((e.id, e.u), [])]
        at_v = [i for i, _ in term.get((e.id, e.v), [])]
        base = internal.get(e.id, []) + middle.get(e.id, [])
        for side in (at_u, at_v):
            members = tuple(sorted(set(base + side)))
            if len(members) > 1:
                cliques.add(members)
        for a, pa in term.get((e.id, e.u), []):
            fa = classes[a].footprints[pa]
            for b, pb in term.get((e.id, e.v), []):
                fb = classes[b].footprints[pb]
                # footprint of a is [0, hi_a], of b is [lo_b, n]: hi_a <= lo_b
                con = TwoVarConstraint(a, fa.b1, b, -fb.a1, fb.a0 - fa.b0)
                key = (min(a, b), max(a, b))
                orders.setdefault(key, []).append(con)
    for e in g.edges.values():
        if not e.is_section and e.id in internal and len(internal[e.id]) > 1:
            cliques.add(tuple(sorted(set(internal[e.id]))))
    gains = [tuple(e for e in c.path if g.is_countable(e)) for c in classes]
    # drop cliques contained in others
    ordered = sorted(cliques, key=len, reverse=True)
    kept: list[tuple[int, ...]] = []
    kept_sets: list[set[int]] = []
    for c in ordered:
        sc = set(c)
        if any(sc <= k for k in kept_sets if len(k) >= len(sc)):
            continue
        kept.append(c)
        kept_sets.append(sc)
    kept.sort()
    return ExactModel(list(classes), gains, kept, orders)


def components(model: ExactModel) -> list[list[int]]:
    """Classes grouped so that groups never interact."""
    n = len(model.classes)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for c in model.cliques:
        for x in c[1:]:
            union(c[0], x)
    for a, b in model.orders:
        union(a, b)
    by_section: dict[int, int] = {}
    for i, gain in enumerate(model.gains):
        for e in gain:
            if e in by_section:
                union(by_section[e], i)
            else:
                by_section[e] = i
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [groups[k] for k in sorted(groups)]


@dataclass
class SearchStats:
    nodes: int = 0
    lps: int = 0
    cuts: int = 0
    proven: bool = True


class _ComponentSearch:
    def __init__(self, model: ExactModel, members: list[int], stats: SearchStats, deadline: float, node_limit: int | None):
        self.model = model
        self.members = members
        self.local = {c: k for k, c in enumerate(members)}
        self.stats = stats
        self.deadline = deadline
        self.node_limit = node_limit
        sections = sorted({e for c in members for e in model.gains[c]})
        self.sections = sections
        self.sec_index = {e: k for k, e in enumerate(sections)}
        n, m = len(members), len(sections)
        self.n, self.m = n, m
        rows, cols, vals = [], [], []
        r = 0
        for clique in model.cliques:
            if clique[0] not in self.local:
                continue
            for c in clique:
                rows.append(r)
                cols.append(self.local[c])
                vals.append(1.0)
            r += 1
        self.n_cliques = r
        for k, e in enumerate(sections):
            rows.append(r)
            cols.append(n + k)
            vals.append(1.0)
            r += 1
        cover_start = self.n_cliques
        for c in members:
            for e in model.gains[c]:
                rows.append(cover_start + self.sec_index[e])
                cols.append(self.local[c])
                vals.append(-1.0)
        self.rows, self.cols, self.vals = rows, cols, vals
        self.n_rows = r
        self.b = [1.0] * self.n_cliques + [0.0] * m
        self.cost = np.concatenate([np.zeros(n), -np.ones(m)])
        self.best_value = -1
        self.best_set: list[int] = []
        self.best_theta: dict[int, float] = {}

    def add_cut(self, chosen_local: list[int]) -> None:
        r = self.n_rows
        for c in chosen_local:
            self.rows.append(r)
            self.cols.append(c)
            self.vals.append(1.0)
        self.b.append(len(chosen_local) - 1.0)
        self.n_rows += 1
        self.stats.cuts += 1

    def lp(self, fixed: dict[int, int]):
        A = csr_matrix((self.vals, (self.rows, self.cols)), shape=(self.n_rows, self.n + self.m))
        bounds = [(fixed.get(k, 0), fixed.get(k, 1)) for k in range(self.n)] + [(0, 1)] * self.m
        self.stats.lps += 1
        res = linprog(self.cost, A_ub=A, b_ub=self.b, bounds=bounds, method="highs")
        if res.status != 0:
            return None, None
        return -res.fun, res.x

    def value(self, chosen_global: list[int]) -> int:
        return len({e for c in chosen_global for e in self.model.gains[c]})

    def place(self, chosen_global: list[int]):
        bounds = [(self.model.classes[c].lo, self.model.classes[c].hi) for c in chosen_global]
        pos = {c: k for k, c in enumerate(chosen_global)}
        cons = [
            TwoVarConstraint(pos[k.a], k.sa, pos[k.b], k.sb, k.d)
            for k in self.model.order_constraints(chosen_global)
        ]
        vals, culprits = solve_positions(bounds, cons)
        if vals is None:
            return None, [chosen_global[i] for i in culprits]
        return {c: vals[pos[c]] for c in chosen_global}, []

    def seed(self, chosen_global: list[int]) -> None:
        theta, bad = self.place(chosen_global)
        if theta is not None:
            v = self.value(chosen_global)
            if v > self.best_value:
                self.best_value, self.best_set, self.best_theta = v, list(chosen_global), theta

    def run(self) -> None:
        stack: list[dict[int, int]] = [{}]
        while stack:
            if time.monotonic() > self.deadline or (
                self.node_limit is not None and self.stats.nodes >= self.node_limit
            ):
                self.stats.proven = False
                return
            fixed = stack.pop()
            self.stats.nodes += 1
            while True:
                bound, x = self.lp(fixed)
                if bound is None or math.floor(bound + INT_TOL) <= self.best_value:
                    break
                xs = x[: self.n]
                frac = [k for k in range(self.n) if INT_TOL < xs[k] < 1 - INT_TOL]
                if frac:
                    k = min(frac, key=lambda k: (abs(xs[k] - 0.5), k))
                    stack.append({**fixed, k: 0})
                    stack.append({**fixed, k: 1})
                    break
                chosen = [self.members[k] for k in range(self.n) if xs[k] > 0.5]
                theta, culprits = self.place(chosen)
                if theta is None:
                    self.add_cut([self.local[c] for c in culprits])
                    continue
                v = self.value(chosen)
                if v > self.best_value:
                    self.best_value, self.best_set, self.best_theta = v, chosen, theta
                break


def greedy_selection(model: ExactModel, members: list[int]) -> list[int]:
    """Classes picked in order of new countable sections, skipping clashes."""
    clique_of: dict[int, list[int]] = {}
    for k, c in enumerate(model.cliques):
        for x in c:
            clique_of.setdefault(x, []).append(k)
    used_cliques: set[int] = set()
    chosen: list[int] = []
    covered: set[int] = set()
    order = sorted(members, key=lambda c: (-len(model.gains[c]), c))
    for c in order:
        new = set(model.gains[c]) - covered
        if not new:
            continue
        if any(k in used_cliques for k in clique_of.get(c, [])):
            continue
        trial = chosen + [c]
        bounds = [(model.classes[x].lo, model.classes[x].hi) for x in trial]
        pos = {x: k for k, x in enumerate(trial)}
        cons = [TwoVarConstraint(pos[k.a], k.sa, pos[k.b], k.sb, k.d) for k in model.order_constraints(trial)]
        vals, _ = solve_positions(bounds, cons)
        if vals is None:
            continue
        chosen = trial
        covered |= new
        used_cliques.update(clique_of.get(c, []))
    return chosen


def solve_exact_classes(
    g: RoadGraph,
    classes: list[LabelClass],
    node_limit: int | None = None,
    time_limit: float | None = None,
) -> Labeling:
    start = time.monotonic()
    deadline = start + time_limit if time_limit is not None else math.inf
    model = build_model(g, classes)
    stats = SearchStats()
    labels = []
    for members in components(model):
        search = _ComponentSearch(model, members, stats, deadline, node_limit)
        search.seed(greedy_selection(model, members))
        search.run()
        for c in sorted(search.best_set):
            labels.append(classes[c].label(search.best_theta[c]))
    meta = {
        "algorithm": "milp",
        "proven_optimal": stats.proven,
        "nodes": stats.nodes,
        "lp_solves": stats.lps,
        "cuts": stats.cuts,
        "classes": len(classes),
    }
    if not stats.proven:
        log.warning("exact search stopped by budget after %d nodes; result not proven optimal", stats.nodes)
    return Labeling(labels, meta)


def solve_exact(f, g: RoadGraph, node_limit: int | None = None, time_limit: float | None = None) -> Labeling:
    """Optimal labeling for the classes of formulation ``f`` (or all classes of ``g`` if ``f`` is None)."""
    classes = list(f.classes) if f is not None else list(enumerate_label_classes(g))
    return solve_exact_classes(g, classes, node_limit, time_limit)
