"""Pure-Python versions of the hot numeric kernels."""

from __future__ import annotations

from typing import Sequence

NEG_TOL = 1e-9


def bellman_ford(n: int, src: Sequence[int], dst: Sequence[int], w: Sequence[float]):
    """Shortest distances from a virtual source joined to every node by weight 0.

    Returns ``(dist, None)`` or ``(None, cycle_nodes)`` on a negative cycle.
    """
    dist = [0.0] * n
    pred = [-1] * n
    m = len(src)
    last = -1
    for _ in range(n + 1):
        last = -1
        for k in range(m):
            u = src[k]
            nd = dist[u] + w[k]
            v = dst[k]
            if nd < dist[v] - NEG_TOL:
                dist[v] = nd
                pred[v] = u
                last = v
        if last < 0:
            return dist, None
    # walk back n steps to land on the cycle, then collect it
    v = last
    for _ in range(n):
        if pred[v] < 0:
            return None, list(range(n))
        v = pred[v]
    cycle = [v]
    u = pred[v]
    while u != v and u >= 0:
        cycle.append(u)
        u = pred[u]
    return None, cycle


def pair_sup(p1, p2, total: float, tol: float = 1e-9):
    """Best ``v1 + v2`` with ``x`` in piece one and ``total - x`` in piece two.

    Pieces are tuples starting with ``(lo, hi, value)``; extra fields are
    ignored. Returns ``(value, x)`` or ``(None, None)`` when no split is
    admissible.
    """
    best = None
    best_x = None
    for q1 in p1:
        lo1, hi1, v1 = q1[0], q1[1], q1[2]
        for q2 in p2:
            lo2, hi2, v2 = q2[0], q2[1], q2[2]
            lo = max(lo1, total - hi2)
            hi = min(hi1, total - lo2)
            if lo <= hi + tol:
                v = v1 + v2
                x = min(lo, hi1)
                if best is None or v > best or (v == best and x < best_x):
                    best, best_x = v, x
    return best, best_x


def prune_pieces(pieces, tol: float = 1e-9):
    """Drop pieces contained in a piece of no smaller value.

    Pieces are tuples starting with ``(lo, hi, value)`` and are kept whole.
    The result is sorted by ``(lo, hi, -value)``; ties keep input order.
    """
    order = sorted(range(len(pieces)), key=lambda k: (-pieces[k][2], pieces[k][0], -pieces[k][1], k))
    kept = []
    spans = []
    for k in order:
        p = pieces[k]
        lo, hi = p[0], p[1]
        if any(a <= lo + tol and hi <= b + tol for a, b in spans):
            continue
        kept.append(p)
        spans.append((lo, hi))
    kept.sort(key=lambda p: (p[0], p[1], -p[2]))
    return kept
