import random

import pytest

from polyguard.arrangement import build_complex
from polyguard.errors import InvalidInputError
from polyguard.geom import RAT, PolygonWithHoles, centroid, ring_area
from polyguard.objective import (
    build_triangle_objective,
    cell_view,
    line_crosses_triangle,
    vertex_pair_lines,
    xi_direct,
)
from polyguard.rounding import RoundedComplex, GridSpec, grid_spec, round_complex

P = lambda x, y: (RAT(x), RAT(y))
HALF = RAT(1, 2)

SQUARE = PolygonWithHoles([P(0, 0), P(4, 0), P(4, 4), P(0, 4)])
LSHAPE = PolygonWithHoles([P(0, 0), P(2, 0), P(2, 1), P(1, 1), P(1, 2), P(0, 2)])


def rounded_for(poly, guards, T=10, eps=HALF, delta=RAT(1, 10), nu=HALF):
    c = build_complex(poly, guards)
    spec = grid_spec(poly, poly.n, poly.h, eps, delta, nu, T, max(len(c.cells), poly.n))
    return c, round_complex(c, T, spec, poly)


def find_frozen_triangle(poly, rounded, eps, center, scale_exp=8):
    """Shrink a triangle around `center` until no structure line crosses it."""
    for k in range(scale_exp, scale_exp + 14):
        s = RAT(1, 1 << k)
        tri = [
            (center[0] - s, center[1] - s),
            (center[0] + s, center[1] - s),
            (center[0] - s, center[1] + s),
        ]
        try:
            return build_triangle_objective(poly, rounded, eps, tri)
        except InvalidInputError:
            continue
    raise AssertionError("no frozen triangle found")


class TestXiDirect:
    def test_lshape_t0_corner_sees_all(self):
        c, rounded = rounded_for(LSHAPE, [])
        kept = [(r, j, i) for r, j, i in rounded.kept]
        v = xi_direct(LSHAPE, kept, HALF, (HALF, HALF))
        # the corner point sees every kept cell entirely
        total = sum((ring_area(r) for r, _, _ in rounded.kept), RAT(0))
        assert v == total

    def test_blocked_viewpoint_sees_less(self):
        c, rounded = rounded_for(LSHAPE, [])
        kept = [(r, j, i) for r, j, i in rounded.kept]
        v_corner = xi_direct(LSHAPE, kept, HALF, (HALF, HALF))
        v_arm = xi_direct(LSHAPE, kept, HALF, (RAT(1, 4), RAT(7, 4)))
        assert v_arm < v_corner


class TestCellViewMasterAgreement:
    """Sector evaluation must agree exactly with direct geometry."""

    def test_lshape_cross_arm_views(self):
        c, rounded = rounded_for(LSHAPE, [])
        eps = HALF
        obj = find_frozen_triangle(LSHAPE, rounded, eps, (RAT(1, 3), RAT(13, 8)))
        rng = random.Random(11)
        kept = rounded.kept
        for _ in range(20):
            l1 = RAT(rng.randint(0, 60), 180)
            l2 = RAT(rng.randint(0, 60), 180)
            q = obj.lambdas_to_point(l1, l2)
            via_views = obj.evaluate_point(q)
            via_terms = obj.evaluate(l1, l2)
            via_geometry = xi_direct(LSHAPE, kept, eps, q)
            assert via_views == via_geometry
            assert via_terms == via_geometry

    def test_with_one_guard_weights(self):
        g = (RAT(1, 4), RAT(7, 4))
        c, rounded = rounded_for(LSHAPE, [g])
        eps = HALF
        obj = find_frozen_triangle(LSHAPE, rounded, eps, (RAT(3, 2), RAT(1, 3)))
        rng = random.Random(23)
        for _ in range(20):
            l1 = RAT(rng.randint(0, 50), 200)
            l2 = RAT(rng.randint(0, 50), 200)
            q = obj.lambdas_to_point(l1, l2)
            assert obj.evaluate(l1, l2) == xi_direct(LSHAPE, rounded.kept, eps, q)
            assert obj.evaluate_point(q) == xi_direct(LSHAPE, rounded.kept, eps, q)

    def test_term_shape_invariants(self):
        c, rounded = rounded_for(LSHAPE, [])
        obj = find_frozen_triangle(LSHAPE, rounded, HALF, (RAT(1, 3), RAT(13, 8)))
        for t in obj.terms:
            assert all(i + j <= 2 for i, j in t.numerator)
            assert len(t.den_factors) <= 2

    def test_constant_term_for_fully_visible_cell(self):
        c, rounded = rounded_for(SQUARE, [])
        obj = find_frozen_triangle(SQUARE, rounded, HALF, (RAT(23, 16), RAT(13, 7)))
        assert all(v.kind == "full" for v in obj.views)
        total = sum((v.area for v in obj.views), RAT(0))
        assert obj.evaluate(RAT(1, 3), RAT(1, 3)) == total

    def test_empty_rounded_zero_objective(self):
        grid = GridSpec(3, RAT(8), RAT(8))
        rounded = RoundedComplex([], RAT(16), RAT(16), grid)
        tri = [P(1, 1), P(2, 1), P(1, 2)]
        obj = build_triangle_objective(SQUARE, rounded, HALF, tri)
        assert obj.evaluate(RAT(1, 4), RAT(1, 4)) == 0


class TestBounds:
    def test_bound_dominates_samples(self):
        c, rounded = rounded_for(LSHAPE, [])
        eps = HALF
        obj = find_frozen_triangle(LSHAPE, rounded, eps, (RAT(1, 3), RAT(13, 8)))
        bound = obj.upper_bound()
        rng = random.Random(5)
        for _ in range(30):
            l1 = RAT(rng.randint(0, 100), 300)
            l2 = RAT(rng.randint(0, 100), 300)
            q = obj.lambdas_to_point(l1, l2)
            assert obj.evaluate_point(q) <= bound

    def test_bound_tightens_under_shrinking(self):
        c, rounded = rounded_for(LSHAPE, [])
        obj = find_frozen_triangle(LSHAPE, rounded, HALF, (RAT(1, 3), RAT(13, 8)))
        t = obj.triangle
        mid01 = ((t[0][0] + t[1][0]) / 2, (t[0][1] + t[1][1]) / 2)
        sub = [t[0], mid01, t[2]]
        assert obj.upper_bound(sub) <= obj.upper_bound()


class TestFreezeCheck:
    def test_crossing_line_rejected(self):
        c, rounded = rounded_for(LSHAPE, [])
        # a fat triangle spanning the reflex corner must violate same-side
        tri = [P(0, 0), P(2, 0), (RAT(1, 2), RAT(2))]
        with pytest.raises(InvalidInputError):
            build_triangle_objective(LSHAPE, rounded, HALF, tri)

    def test_line_crossing_predicate(self):
        tri = [P(0, 0), P(2, 0), P(0, 2)]
        assert line_crosses_triangle(P(1, -1), P(1, 3), tri)
        assert not line_crosses_triangle(P(5, 0), P(5, 1), tri)
        # touching a vertex without entering is not a crossing
        assert not line_crosses_triangle(P(0, 0), P(-1, 1), tri)

    def test_vertex_pair_lines_dedup(self):
        lines = vertex_pair_lines([P(0, 0), P(1, 1), P(2, 2), P(1, 0)])
        # collinear triple collapses: pairs = C(4,2)=6 minus 2 duplicates
        assert len(lines) == 4
