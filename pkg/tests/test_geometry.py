import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import Point as SPoint
from shapely.geometry import Polygon, box

from roadlabel.geometry import (
    Polyline,
    SegmentOverlap,
    hull,
    point_at_arclength,
    polygon_union,
    segment_intersection,
    simplify_with_clearance,
    triangulate_interior,
)


class TestPointAtArclength:
    p = Polyline([(0, 0), (3, 0), (3, 4)])

    def test_start(self):
        assert point_at_arclength(self.p, 0) == (0, 0)

    def test_across_vertex(self):
        assert point_at_arclength(self.p, 5) == pytest.approx((3, 2))

    def test_endpoint_exact(self):
        assert point_at_arclength(Polyline([(0, 0), (10, 0)]), 10) == (10, 0)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            point_at_arclength(self.p, 7.5)
        with pytest.raises(ValueError):
            point_at_arclength(self.p, -1)

    @given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=2, max_size=8))
    def test_last_vertex_exact(self, pts):
        try:
            p = Polyline(pts)
        except ValueError:
            return
        assert point_at_arclength(p, p.length) == p.coords[-1]


def test_polyline_rejects_degenerate():
    with pytest.raises(ValueError):
        Polyline([(1, 1), (1, 1)])


def test_sub_polyline_length():
    p = Polyline([(0, 0), (3, 0), (3, 4)])
    s = p.sub(1, 6)
    assert s.length == pytest.approx(5)
    assert s.coords[0] == (1, 0)
    assert s.coords[-1] == pytest.approx((3, 3))


class TestHull:
    # inscribed 8-chord caps: worst radial shortfall at chord midpoints
    f = math.cos(math.pi / 16)

    def test_capsule_along_x(self):
        h = hull(((0, 0), (10, 0)), 2)
        assert h.contains(SPoint(5, 0))
        assert h.contains(SPoint(5, 1.99 * self.f))
        assert not h.contains(SPoint(5, 2.5))

    def test_capsule_vertical(self):
        h = hull(((0, 0), (0, 1)), 0.5)
        assert h.contains(SPoint(0.49 * self.f, 0.5))

    def test_inscribed_in_true_capsule(self):
        h = hull(((0, 0), (4, 3)), 1.5)
        for x, y in h.exterior.coords:
            d = _dist_point_segment((x, y), (0, 0), (4, 3))
            assert d <= 1.5 + 1e-9

    def test_zero_width(self):
        with pytest.raises(ValueError):
            hull(((0, 0), (1, 0)), 0)

    def test_degenerate_segment(self):
        with pytest.raises(ValueError):
            hull(((1, 1), (1, 1)), 1)


def _dist_point_segment(p, a, b):
    ax, ay = a
    bx, by = b
    t = max(0, min(1, ((p[0] - ax) * (bx - ax) + (p[1] - ay) * (by - ay)) / ((bx - ax) ** 2 + (by - ay) ** 2)))
    return math.hypot(p[0] - ax - t * (bx - ax), p[1] - ay - t * (by - ay))


class TestUnion:
    def test_disjoint(self):
        out = polygon_union([box(0, 0, 1, 1), box(3, 0, 4, 1)])
        assert len(out) == 2
        assert sum(p.area for p in out) == pytest.approx(2)

    def test_overlapping(self):
        out = polygon_union([box(0, 0, 1, 1), box(0.5, 0, 1.5, 1)])
        assert len(out) == 1
        assert out[0].area == pytest.approx(1.5)

    def test_overlap_both_axes(self):
        out = polygon_union([box(0, 0, 1, 1), box(0.5, 0.5, 1.5, 1.5)])
        assert out[0].area == pytest.approx(1.75)

    def test_contained(self):
        out = polygon_union([box(0, 0, 3, 3), box(1, 1, 2, 2)])
        assert len(out) == 1
        assert out[0].equals(box(0, 0, 3, 3))

    def test_orientation(self):
        ring = box(0, 0, 3, 3).difference(box(1, 1, 2, 2))
        (p,) = polygon_union([ring])
        assert p.exterior.is_ccw
        assert not p.interiors[0].is_ccw

    def test_invalid(self):
        bowtie = Polygon([(0, 0), (1, 1), (1, 0), (0, 1)])
        with pytest.raises(ValueError):
            polygon_union([bowtie])

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 10), st.floats(0.5, 3)), min_size=1, max_size=6))
    def test_idempotent(self, specs):
        polys = [box(x, y, x + w, y + w) for x, y, w in specs]
        once = polygon_union(polys)
        twice = polygon_union(once)
        a1 = sum(p.area for p in once)
        a2 = sum(p.area for p in twice)
        assert a2 == pytest.approx(a1, rel=1e-9)


class TestTriangulate:
    def test_quad(self):
        tris = triangulate_interior(Polygon([(0, 0), (2, 0), (2.5, 1), (0, 1)]))
        assert len(tris) == 2
        internal = sum(sum(t.internal) for t in tris) // 2
        assert internal == 1

    def test_square_with_hole(self):
        p = box(0, 0, 3, 3).difference(box(1, 1, 2, 2))
        tris = triangulate_interior(p)
        assert len(tris) == 8
        assert sum(t.area for t in tris) == pytest.approx(p.area, rel=1e-6)

    def test_triangle_identity(self):
        tris = triangulate_interior(Polygon([(0, 0), (1, 0), (0, 1)]))
        assert len(tris) == 1
        assert tris[0].internal == (False, False, False)

    def test_boundary_points_inserted(self):
        tris = triangulate_interior(box(0, 0, 4, 1), [(2, 0), (2, 1)])
        verts = {v for t in tris for v in t.vertices}
        assert (2.0, 0.0) in verts and (2.0, 1.0) in verts

    def test_self_intersecting(self):
        with pytest.raises(ValueError):
            triangulate_interior(Polygon([(0, 0), (1, 1), (1, 0), (0, 1)]))

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 20), st.floats(0, 20)), min_size=2, max_size=5))
    def test_area_preserved(self, pts):
        from roadlabel.geometry import polyline_hull

        try:
            poly = polyline_hull(Polyline(pts), 1.0)
        except ValueError:
            return
        tris = triangulate_interior(poly)
        assert sum(t.area for t in tris) == pytest.approx(poly.area, rel=1e-6)


class TestSimplify:
    def test_collinear(self):
        p = Polyline([(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)])
        for tol in (1e-6, 0.5, 10):
            assert len(simplify_with_clearance(p, tol)) == 2

    def test_zero_tolerance_identity(self):
        p = Polyline([(0, 0), (1, 0.1), (2, 0), (3, 0.1)])
        assert simplify_with_clearance(p, 0) == p

    def test_clearance_rejects_shortcut(self):
        # zigzag inside a thin container; the chord would hug the lower wall
        zig = Polyline([(0, 1.0), (5, 1.4), (10, 1.0)])
        container = box(-1, 0.7, 11, 2.2)
        chord_clearance = 1.0 - 0.7
        assert simplify_with_clearance(zig, 1.0) == Polyline([(0, 1.0), (10, 1.0)])
        out = simplify_with_clearance(zig, 1.0, container, chord_clearance + 0.05)
        assert out == zig

    def test_subset_and_endpoints(self):
        p = Polyline([(0, 0), (1, 0.3), (2, -0.2), (3, 0.5), (4, 0)])
        out = simplify_with_clearance(p, 0.35)
        assert set(out.coords) <= set(p.coords)
        assert out.coords[0] == p.coords[0] and out.coords[-1] == p.coords[-1]


class TestSegmentIntersection:
    def test_cross(self):
        assert segment_intersection(((0, 0), (2, 0)), ((1, -1), (1, 1))) == pytest.approx((1, 0))

    def test_snap(self):
        r = segment_intersection(((0, 0), (2, 0)), ((1, 0.001), (1, 1)), tol=0.01)
        assert r == pytest.approx((1, 0))

    def test_parallel(self):
        assert segment_intersection(((0, 0), (2, 0)), ((0, 1), (2, 1)), tol=0.1) is None

    def test_disjoint_without_tol(self):
        assert segment_intersection(((0, 0), (2, 0)), ((1, 0.001), (1, 1))) is None

    def test_collinear_overlap(self):
        r = segment_intersection(((0, 0), (4, 0)), ((2, 0), (6, 0)))
        assert isinstance(r, SegmentOverlap)
        assert r.start == pytest.approx((2, 0)) and r.end == pytest.approx((4, 0))

    def test_collinear_touch(self):
        r = segment_intersection(((0, 0), (2, 0)), ((2, 0), (5, 0)))
        assert r == pytest.approx((2, 0))
