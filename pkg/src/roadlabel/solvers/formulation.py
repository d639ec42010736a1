"""Mixed-integer formulation of the maximum section covering problem.

Variables per label class ``i``: a selection bit ``x{i}``, head offset
``h{i}`` and tail offset ``t{i}`` (both measured from the source of their
edge). Per countable section ``e`` a coverage bit ``y{e}``. Pairs of classes
that admit both placement orders on a shared edge get an order bit
``z{i}_{j}``.

Constraint kinds:

* ``length``: the covered parts of a class add up to the name length;
* ``conflict``: two classes that can never coexist;
* ``order``: big-M separation on a shared terminal section, one row per
  admissible order;
* ``count``: a section counts only if some selected class labels it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..labelcore import LabelClass, enumerate_label_classes, pair_relation
from ..roadgraph import RoadGraph


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float
    ub: float
    integer: bool


@dataclass(frozen=True)
class Constraint:
    kind: str
    coeffs: tuple[tuple[str, float], ...]
    lb: float
    ub: float


@dataclass
class Formulation:
    classes: list[LabelClass]
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)
    big_m: float = 0.0

    def count(self, kind: str) -> int:
        return sum(1 for c in self.constraints if c.kind == kind)

    def index(self) -> dict[str, int]:
        return {v.name: k for k, v in enumerate(self.variables)}

    def to_arrays(self):
        """Dense arrays ``(c, A, lb, ub, integrality, bounds)`` for a MILP backend (maximization negated)."""
        idx = self.index()
        n = len(self.variables)
        c = np.zeros(n)
        for name, w in self.objective.items():
            c[idx[name]] = -w
        A = np.zeros((len(self.constraints), n))
        lb = np.empty(len(self.constraints))
        ub = np.empty(len(self.constraints))
        for r, con in enumerate(self.constraints):
            for name, w in con.coeffs:
                A[r, idx[name]] += w
            lb[r], ub[r] = con.lb, con.ub
        integrality = np.array([1 if v.integer else 0 for v in self.variables])
        bounds = (np.array([v.lb for v in self.variables]), np.array([v.ub for v in self.variables]))
        return c, A, lb, ub, integrality, bounds


def _side_var(cls: LabelClass, i: int, pos: int, side: str) -> tuple[str, float, float]:
    """Variable expression ``const + coef*var`` for one side of a footprint.

    ``pos`` is the footprint index along the path; ``side`` is "lo" or "hi".
    Returns (variable name, coefficient, constant).
    """
    fp = cls.footprints[pos]
    if cls.is_middle:
        return (f"h{i}", 1.0, 0.0) if side == "lo" else (f"t{i}", 1.0, 0.0)
    var = f"h{i}" if pos == 0 else f"t{i}"
    is_end = fp.lo_end if side == "lo" else fp.hi_end
    if is_end:
        return (var, 1.0, 0.0)
    # the side at the continuation vertex is fixed at 0 or at the edge length
    const = fp.a0 if side == "lo" else fp.b0
    return (var, 0.0, const)


def build_formulation(g: RoadGraph, classes: list[LabelClass] | None = None) -> Formulation:
    if classes is None:
        classes = list(enumerate_label_classes(g))
    big_m = sum(e.length for e in g.edges.values()) + 1.0
    f = Formulation(classes=list(classes), big_m=big_m)
    for i, c in enumerate(classes):
        hl, hh = c.head_interval(g)
        tl, th = c.tail_interval(g)
        f.variables.append(Variable(f"x{i}", 0.0, 1.0, True))
        f.variables.append(Variable(f"h{i}", hl, hh, False))
        f.variables.append(Variable(f"t{i}", tl, th, False))
    labeled: dict[int, list[int]] = {}
    for i, c in enumerate(classes):
        for e in c.path:
            if g.is_countable(e):
                labeled.setdefault(e, []).append(i)
    for e in sorted(labeled):
        f.variables.append(Variable(f"y{e}", 0.0, 1.0, True))
        f.objective[f"y{e}"] = 1.0

    for i, c in enumerate(classes):
        f.constraints.append(_length_row(g, c, i))

    for i in range(len(classes)):
        for j in range(i + 1, len(classes)):
            a, b = classes[i], classes[j]
            if not (set(a.path) & set(b.path) or set(a.inner_vertices) & set(b.inner_vertices)):
                continue
            rel = pair_relation(a, b, i, j)
            if rel is None:
                f.constraints.append(Constraint("conflict", ((f"x{i}", 1.0), (f"x{j}", 1.0)), -np.inf, 1.0))
                continue
            for options in rel:
                z = None
                if len(options) == 2:
                    z = f"z{i}_{j}_{len(f.variables)}"
                    f.variables.append(Variable(z, 0.0, 1.0, True))
                for k, o in enumerate(options):
                    f.constraints.append(_order_row(classes, o, big_m, z, k))

    for e in sorted(labeled):
        coeffs = [(f"y{e}", 1.0)] + [(f"x{i}", -1.0) for i in labeled[e]]
        f.constraints.append(Constraint("count", tuple(coeffs), -np.inf, 0.0))
    return f


def _length_row(g: RoadGraph, c: LabelClass, i: int) -> Constraint:
    lam = g.roads[c.road].length
    if c.is_middle:
        return Constraint("length", ((f"t{i}", 1.0), (f"h{i}", -1.0)), lam, lam)
    coeffs = []
    const = 0.0
    for pos, var in ((0, f"h{i}"), (len(c.path) - 1, f"t{i}")):
        fp = c.footprints[pos]
        n = g.edges[fp.edge].length
        if fp.hi_end:  # footprint [0, offset]
            coeffs.append((var, 1.0))
        else:  # footprint [offset, n]
            coeffs.append((var, -1.0))
            const += n
    internal = sum(g.edges[e].length for e in c.path[1:-1])
    rhs = lam - internal - const
    return Constraint("length", tuple(coeffs), rhs, rhs)


def _order_row(classes, o, big_m: float, z: str | None, k: int) -> Constraint:
    """hi(first) - lo(second) <= M (2 - x_first - x_second) [+ M relaxation by z]."""
    first, second = classes[o.first], classes[o.second]
    edge = o.edge
    pa = next(p for p, fp in enumerate(first.footprints) if fp.edge == edge)
    pb = next(p for p, fp in enumerate(second.footprints) if fp.edge == edge)
    va, ca, ka = _side_var(first, o.first, pa, "hi")
    vb, cb, kb = _side_var(second, o.second, pb, "lo")
    coeffs = [(va, ca), (vb, -cb), (f"x{o.first}", big_m), (f"x{o.second}", big_m)]
    ub = 2 * big_m - ka + kb
    if z is not None:
        if k == 0:
            coeffs.append((z, big_m))
            ub += big_m
        else:
            coeffs.append((z, -big_m))
    return Constraint("order", tuple(c for c in coeffs if c[1] != 0.0), -np.inf, ub)
