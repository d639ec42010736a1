"""Placement feasibility for a fixed choice of label classes.

Every interaction between two chosen classes is a constraint
``s_a*x_a + s_b*x_b <= d`` with ``s`` in {-1, 0, 1}, plus box bounds per
variable. Such systems are decided by shortest paths on a doubled graph
with one node for ``+x`` and one for ``-x``; a negative cycle names the
classes that cannot be placed together.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..kernels import bellman_ford


@dataclass(frozen=True)
class TwoVarConstraint:
    a: int
    sa: float
    b: int
    sb: float
    d: float


def solve_positions(
    bounds: Sequence[tuple[float, float]], constraints: Sequence[TwoVarConstraint]
) -> tuple[list[float] | None, list[int]]:
    """Values within ``bounds`` satisfying every constraint.

    Returns ``(values, [])`` when feasible, otherwise ``(None, culprits)``
    where ``culprits`` are the variable indices on an infeasible cycle.
    """
    n = len(bounds)
    src, dst, w = [], [], []

    def edge(u, v, weight):
        src.append(u)
        dst.append(v)
        w.append(weight)

    # node 2i is +x_i, 2i+1 is -x_i; an edge u -> v with weight c encodes v - u <= c
    for i, (lo, hi) in enumerate(bounds):
        edge(2 * i + 1, 2 * i, 2.0 * hi)
        edge(2 * i, 2 * i + 1, -2.0 * lo)
    for c in constraints:
        if c.sa == 0 and c.sb != 0:
            c = TwoVarConstraint(c.b, c.sb, c.a, 0.0, c.d)
        pa = 2 * c.a if c.sa > 0 else 2 * c.a + 1
        na = 2 * c.a + 1 if c.sa > 0 else 2 * c.a
        if c.sb == 0:
            if c.sa == 0:
                if c.d < -1e-9:
                    return None, [c.a]
                continue
            # s_a x_a <= d  as  (s_a x_a) - (-s_a x_a) <= 2d
            edge(na, pa, 2.0 * c.d)
            continue
        pb = 2 * c.b if c.sb > 0 else 2 * c.b + 1
        nb = 2 * c.b + 1 if c.sb > 0 else 2 * c.b
        # (s_a x_a) - (-s_b x_b) <= d, and symmetrically
        edge(nb, pa, c.d)
        edge(na, pb, c.d)
    dist, cycle = bellman_ford(2 * n, src, dst, w)
    if cycle is not None:
        return None, sorted({v // 2 for v in cycle})
    return [(dist[2 * i] - dist[2 * i + 1]) / 2.0 for i in range(n)], []
