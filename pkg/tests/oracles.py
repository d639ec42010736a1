"""Independent reference computations used by the test suites."""

from __future__ import annotations

import numpy as np


def grid_well_shaped_pieces(length, positions, angles, l_max, alpha_max, step=None):
    """Maximal well-shaped intervals by brute force over a grid of window starts.

    For every grid start ``a`` find the first bend position ``b`` such that the
    open window ``(a, b]`` already collects more than ``alpha_max`` degrees
    within ``l_max``. The farthest point reachable from ``p`` is the minimum of
    that over all starts ``a >= p``. Each distinct reach value, taken at its
    smallest start, is one maximal interval.
    """
    step = step if step is not None else 1e-3 * l_max
    pos = np.asarray(positions, dtype=float)
    ang = np.asarray(angles, dtype=float)
    grid = np.arange(0.0, length + step / 2, step)
    grid[-1] = min(grid[-1], length)
    prefix = np.concatenate([[0.0], np.cumsum(ang)])
    first = np.searchsorted(pos, grid, side="right")
    # first k >= first with prefix[k+1] - prefix[first] > alpha
    target = prefix[first] + alpha_max
    k = np.searchsorted(prefix, target, side="right") - 1
    blocked = np.full(grid.shape, np.inf)
    ok = k < len(pos)
    kk = np.where(ok, k, 0)
    bpos = np.where(ok, pos[kk] if len(pos) else 0.0, np.inf)
    close = ok & (bpos - grid < l_max)
    blocked[close] = bpos[close]
    reach = np.minimum.accumulate(blocked[::-1])[::-1]
    reach = np.minimum(reach, length)
    out = []
    last = None
    for p, r in zip(grid, reach):
        if last is None or r > last + 1e-12:
            if r - p > 1e-9:
                out.append((float(p), float(r)))
            last = r
    return out


def point_in_polygon(p, ring, tol=1e-7):
    """Even-odd ray casting; points within ``tol`` of the boundary count as inside."""
    x, y = p
    pts = list(ring)
    if pts[0] == pts[-1]:
        pts = pts[:-1]
    inside = False
    n = len(pts)
    for i in range(n):
        (x1, y1), (x2, y2) = pts[i], pts[(i + 1) % n]
        if _dist_to_segment(p, (x1, y1), (x2, y2)) <= tol:
            return True
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if xc > x:
                inside = not inside
    return inside


def point_in_shape(p, exterior, holes=(), tol=1e-7):
    if not point_in_polygon(p, exterior, tol):
        return False
    for h in holes:
        if point_in_polygon(p, h, -1.0) and _min_boundary_dist(p, h) > tol:
            return False
    return True


def _min_boundary_dist(p, ring):
    pts = list(ring)
    return min(_dist_to_segment(p, a, b) for a, b in zip(pts, pts[1:] + pts[:1]))


def _dist_to_segment(p, a, b):
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    n2 = dx * dx + dy * dy
    t = 0.0 if n2 == 0 else max(0.0, min(1.0, ((p[0] - ax) * dx + (p[1] - ay) * dy) / n2))
    return float(np.hypot(p[0] - ax - t * dx, p[1] - ay - t * dy))


def interior_crossings(polylines, tol=1e-9):
    """Pairs of segments from different polylines meeting anywhere but at shared polyline ends.

    Exhaustive O(n^2) orientation test, written without any geometry library.
    """
    segs = []
    for k, line in enumerate(polylines):
        ends = {tuple(line[0]), tuple(line[-1])}
        for a, b in zip(line, line[1:]):
            segs.append((k, tuple(a), tuple(b), ends))
    bad = []
    for i in range(len(segs)):
        ki, a, b, ei = segs[i]
        for j in range(i + 1, len(segs)):
            kj, c, d, ej = segs[j]
            if ki == kj:
                continue
            hit = _segment_contact(a, b, c, d, tol)
            if hit is None:
                continue
            if all(min(np.hypot(h[0] - q[0], h[1] - q[1]) for q in ei & ej or [(np.inf, np.inf)]) <= 1e-6 for h in hit):
                continue
            bad.append((ki, kj))
    return bad


def _orient(p, q, r):
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _segment_contact(a, b, c, d, tol):
    """Contact points of two segments (endpoints of the shared stretch), or None."""
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    scale = max(1.0, *(abs(v) for v in (*a, *b, *c, *d)))
    eps = tol * scale * scale
    if abs(o1) <= eps and abs(o2) <= eps:
        # collinear: contact points are the ends lying on the other segment
        pts = [p for p in (a, b) if _dist_to_segment(p, c, d) <= 1e-7] + [
            p for p in (c, d) if _dist_to_segment(p, a, b) <= 1e-7
        ]
        return pts or None
    if (o1 > eps and o2 > eps) or (o1 < -eps and o2 < -eps):
        return None
    if (o3 > eps and o4 > eps) or (o3 < -eps and o4 < -eps):
        return None
    den = o1 - o2
    t = o1 / den
    return [(c[0] + t * (d[0] - c[0]), c[1] + t * (d[1] - c[1]))]
