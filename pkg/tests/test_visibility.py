import pytest

from polyguard.errors import InvalidInputError
from polyguard.geom import (
    EXTERIOR,
    RAT,
    PolygonWithHoles,
    clip_convex,
    locate_in_ring,
    ring_area,
)
from polyguard.visibility import sees, star_fan_triangles, visibility_polygon

P = lambda x, y: (RAT(x), RAT(y))

SQUARE = PolygonWithHoles([P(0, 0), P(4, 0), P(4, 4), P(0, 4)])
LSHAPE = PolygonWithHoles([P(0, 0), P(2, 0), P(2, 1), P(1, 1), P(1, 2), P(0, 2)])
DONUT = PolygonWithHoles(
    [P(0, 0), P(6, 0), P(6, 6), P(0, 6)],
    [[P(2, 2), P(2, 4), P(4, 4), P(4, 2)]],
)


def rational_grid(poly, step_num=1, step_den=4):
    """Rational sample grid over the bounding box, restricted to the polygon."""
    x0, y0, x1, y1 = poly.bbox
    step = RAT(step_num, step_den)
    pts = []
    x = x0
    while x <= x1:
        y = y0
        while y <= y1:
            if poly.locate((x, y)) != EXTERIOR:
                pts.append((x, y))
            y += step
        x += step
    return pts


class TestSees:
    def test_convex_everything_visible(self):
        assert sees(SQUARE, P(1, 1), P(3, 3))

    def test_grazing_reflex_vertex_counts(self):
        # midpoint of the segment is exactly the reflex corner (1,1)
        assert sees(LSHAPE, (RAT(1, 2), RAT(3, 2)), (RAT(3, 2), RAT(1, 2)))

    def test_blocked_across_notch(self):
        # exits through x=1 at (1, 9/8)
        assert not sees(LSHAPE, (RAT(1, 4), RAT(7, 4)), (RAT(7, 4), RAT(1, 2)))

    def test_rejects_exterior_endpoint(self):
        with pytest.raises(InvalidInputError):
            sees(SQUARE, P(-1, 0), P(1, 1))

    def test_hole_blocks(self):
        assert not sees(DONUT, P(1, 3), P(5, 3))
        assert sees(DONUT, P(1, 1), P(5, 1))

    def test_hole_corner_grazing(self):
        # (1,1)->(5,5) passes exactly through hole corners (2,2) and (4,4)
        assert not sees(DONUT, P(1, 1), P(5, 5))
        # along the hole wall: (2,1)->(2,5) grazes the hole edge x=2
        assert sees(DONUT, P(2, 1), P(2, 5))

    def test_symmetry_on_grid(self):
        pts = rational_grid(LSHAPE, 1, 2)
        for i in range(0, len(pts), 3):
            for j in range(i + 1, len(pts), 4):
                assert sees(LSHAPE, pts[i], pts[j]) == sees(LSHAPE, pts[j], pts[i])

    def test_boundary_segment_visible(self):
        assert sees(SQUARE, P(0, 0), P(4, 0))
        assert sees(LSHAPE, P(2, 0), P(2, 1))


class TestVisibilityPolygon:
    def test_square_center_sees_all(self):
        ring = visibility_polygon(SQUARE, P(2, 2))
        assert ring_area(ring) == 16

    def test_lshape_kernel_point(self):
        ring = visibility_polygon(LSHAPE, (RAT(1, 2), RAT(1, 2)))
        assert ring_area(ring) == 3

    def test_lshape_blocked_viewpoint(self):
        # window through (1,1) lands at (2,0); cut triangle has area 1/2
        ring = visibility_polygon(LSHAPE, (RAT(1, 4), RAT(7, 4)))
        assert ring_area(ring) == RAT(5, 2)
        assert set(ring) == {P(0, 0), P(2, 0), P(1, 1), P(1, 2), P(0, 2)}

    def test_area_never_exceeds_polygon(self):
        for q in [(RAT(1, 4), RAT(7, 4)), (RAT(3, 2), RAT(1, 2)), P(1, 1)]:
            ring = visibility_polygon(LSHAPE, q)
            assert ring_area(ring) <= LSHAPE.area()

    def test_vertex_viewpoints(self):
        # convex corner of the square
        ring = visibility_polygon(SQUARE, P(0, 0))
        assert ring_area(ring) == 16
        # reflex corner of the L sees everything
        ring = visibility_polygon(LSHAPE, P(1, 1))
        assert ring_area(ring) == 3

    def test_boundary_edge_viewpoint(self):
        ring = visibility_polygon(SQUARE, P(2, 0))
        assert ring_area(ring) == 16
        # from (0,1) the reflex corner is edge-on: nothing is hidden
        ring = visibility_polygon(LSHAPE, P(0, 1))
        assert ring_area(ring) == 3
        # from (1/2,2) the window through (1,1) lands at (3/2,0) and hides
        # the quadrilateral (3/2,0),(2,0),(2,1),(1,1) of area 3/4
        ring = visibility_polygon(LSHAPE, (RAT(1, 2), RAT(2)))
        assert ring_area(ring) == 3 - RAT(3, 4)

    def test_donut_viewpoint(self):
        ring = visibility_polygon(DONUT, P(1, 3))
        area = ring_area(ring)
        assert RAT(0) < area < DONUT.area()
        # independent check via brute-force sees on a rational grid
        self._check_membership(DONUT, P(1, 3), ring)

    def _check_membership(self, poly, q, ring):
        mismatches = []
        for p in rational_grid(poly, 1, 2):
            inside = locate_in_ring(p, ring) != EXTERIOR
            visible = sees(poly, p, q)
            if inside != visible:
                mismatches.append(p)
        assert not mismatches, f"{len(mismatches)} mismatches, e.g. {mismatches[:3]}"

    def test_membership_equivalence_lshape(self):
        for q in [(RAT(1, 4), RAT(7, 4)), (RAT(7, 4), RAT(1, 4)), (RAT(1, 2), RAT(1, 2))]:
            ring = visibility_polygon(LSHAPE, q)
            self._check_membership(LSHAPE, q, ring)

    def test_membership_equivalence_on_vertices(self):
        for q in [(RAT(1, 4), RAT(7, 4)), P(1, 1)]:
            ring = visibility_polygon(LSHAPE, q)
            for v in LSHAPE.vertices:
                assert (locate_in_ring(v, ring) != EXTERIOR) == sees(LSHAPE, v, q)

    def test_star_shaped_about_viewpoint(self):
        q = (RAT(1, 4), RAT(7, 4))
        ring = visibility_polygon(LSHAPE, q)
        vis_poly = PolygonWithHoles(ring)
        for v in ring:
            assert sees(vis_poly, q, v)

    def test_fan_triangles_cover_area(self):
        q = (RAT(1, 4), RAT(7, 4))
        ring = visibility_polygon(LSHAPE, q)
        tris = star_fan_triangles(ring, q)
        total = sum((abs(ring_area(list(t))) for t in tris), RAT(0))
        assert total == ring_area(ring)

    def test_clip_with_cells(self):
        q = (RAT(1, 4), RAT(7, 4))
        ring = visibility_polygon(LSHAPE, q)
        lower_arm = [P(1, 0), P(2, 0), P(2, 1), P(1, 1)]
        tris = star_fan_triangles(ring, q)
        got = sum(
            (abs(ring_area(piece)) if len(piece) >= 3 else RAT(0)
             for t in tris if len(piece := clip_convex(list(t), lower_arm)) >= 0),
            RAT(0),
        )
        # visible part of the lower arm is the triangle (1,0),(2,0),(1,1)
        assert got == RAT(1, 2)

    def test_rejects_exterior_viewpoint(self):
        with pytest.raises(InvalidInputError):
            visibility_polygon(SQUARE, P(5, 5))
