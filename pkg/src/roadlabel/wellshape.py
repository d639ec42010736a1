"""Curviness and the sliding-window classification of well-shaped pieces.

A bend counts toward a window only when its vertex lies strictly inside the
window. Under that convention a run of consecutive bends ``i..j`` is *bad*
when ``s_j - s_i < l_max`` and its angles sum to more than ``alpha_max``; a
piece is well-shaped iff it does not strictly contain any bad run, and the
maximal pieces fall out of the minimal bad runs directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .geometry import EPS, Polyline, turn_angle

if TYPE_CHECKING:
    from .labelcore import Label
    from .roadgraph import RoadGraph

DEFAULT_ALPHA_MAX = 22.5
DEFAULT_LMAX_FACTOR = 2.0


@dataclass(frozen=True)
class ShapeParams:
    l_max: float
    alpha_max: float = DEFAULT_ALPHA_MAX

    def __post_init__(self):
        if not self.l_max > 0:
            raise ValueError("l_max must be positive")
        if not 0 < self.alpha_max <= 180:
            raise ValueError("alpha_max must lie in (0, 180]")


def curviness(p: Polyline) -> float:
    """Sum of absolute bend angles (degrees) over the interior vertices."""
    return sum(a for _, a in p.bends())


def minimal_bad_runs(
    positions: Sequence[float], angles: Sequence[float], l_max: float, alpha_max: float
) -> list[tuple[int, int]]:
    """Minimal index runs (i, j) of bends that together exceed the budget.

    Runs are returned with strictly increasing start and end indices.
    """
    runs: list[tuple[int, int]] = []
    i = 0
    total = 0.0
    last_start = -1
    for j, a in enumerate(angles):
        total += a
        # advance i to the largest start whose run i..j still exceeds the budget
        while i < j and total - angles[i] > alpha_max:
            total -= angles[i]
            i += 1
        if total > alpha_max and positions[j] - positions[i] < l_max and i != last_start:
            runs.append((i, j))
            last_start = i
    return runs


def pieces_from_bends(
    length: float,
    positions: Sequence[float],
    angles: Sequence[float],
    l_max: float,
    alpha_max: float,
) -> list[tuple[float, float]]:
    runs = minimal_bad_runs(positions, angles, l_max, alpha_max)
    starts = [0.0] + [positions[i] for i, _ in runs]
    ends = [positions[j] for _, j in runs] + [length]
    return [(a, b) for a, b in zip(starts, ends) if b - a > EPS]


def well_shaped_pieces(p: Polyline, params: ShapeParams) -> list[tuple[float, float]]:
    """Maximal well-shaped arc intervals of ``p`` in increasing order.

    Consecutive pieces touch at a single sharp bend or overlap across a
    cluster of moderate bends; no piece strictly contains a bad run.
    """
    bends = p.bends()
    return pieces_from_bends(
        p.length, [s for s, _ in bends], [a for _, a in bends], params.l_max, params.alpha_max
    )


def within_piece(pieces: Sequence[tuple[float, float]], a: float, b: float, tol: float = EPS) -> bool:
    return any(p - tol <= a and b <= q + tol for p, q in pieces)


def is_well_shaped_label(label: Label, g: RoadGraph, params: ShapeParams | None = None) -> bool:
    """Whether every covered part sits in one piece and every edge-to-edge bend is mild."""
    alpha = params.alpha_max if params is not None else g.alpha_max
    for eid, (a, b) in label.footprints(g):
        e = g.edges[eid]
        pieces = e.pieces if params is None else well_shaped_pieces(
            e.geometry, ShapeParams(params.l_max, params.alpha_max)
        )
        if not within_piece(pieces, a, b):
            return False
    for angle in label.junction_bends(g):
        if angle > alpha + 1e-9:
            return False
    return True


def bend_between(d_in: Sequence[float], d_out: Sequence[float]) -> float:
    return turn_angle(d_in, d_out)
