import random

import pytest

from polyguard.arrangement import (
    build_complex,
    internal_vertices,
    label_signature,
    refine_complex,
    same_side_holds,
    subsystem_ranges,
)
from polyguard.errors import InvalidInputError
from polyguard.geom import (
    EXTERIOR,
    RAT,
    PolygonWithHoles,
    centroid,
    is_convex_ring,
    locate_in_ring,
    ring_area,
)
from polyguard.visibility import sees

P = lambda x, y: (RAT(x), RAT(y))

SQUARE = PolygonWithHoles([P(0, 0), P(4, 0), P(4, 4), P(0, 4)])
LSHAPE = PolygonWithHoles([P(0, 0), P(2, 0), P(2, 1), P(1, 1), P(1, 2), P(0, 2)])
DONUT = PolygonWithHoles(
    [P(0, 0), P(6, 0), P(6, 6), P(0, 6)],
    [[P(2, 2), P(2, 4), P(4, 4), P(4, 2)]],
)


def sample_in_cell(cell, rng, count):
    """Random interior rational points of a convex cell via barycentric mixes."""
    pts = []
    k = len(cell)
    for _ in range(count):
        weights = [RAT(rng.randint(1, 50)) for _ in range(k)]
        total = sum(weights, RAT(0))
        x = sum((w * p[0] for w, p in zip(weights, cell)), RAT(0)) / total
        y = sum((w * p[1] for w, p in zip(weights, cell)), RAT(0)) / total
        pts.append((x, y))
    return pts


class TestBuildComplex:
    def test_convex_single_guard(self):
        c = build_complex(SQUARE, [P(2, 2)])
        assert len(c.cells) == 1
        assert c.labels == [(0,)]
        assert ring_area(c.cells[0]) == 16

    def test_lshape_blocked_guard(self):
        c = build_complex(LSHAPE, [(RAT(1, 4), RAT(7, 4))])
        c.area_check()
        seen_area = sum(
            (ring_area(cell) for cell, lab in zip(c.cells, c.labels) if lab),
            RAT(0),
        )
        blocked_area = sum(
            (ring_area(cell) for cell, lab in zip(c.cells, c.labels) if not lab),
            RAT(0),
        )
        assert seen_area == RAT(5, 2)
        assert blocked_area == RAT(1, 2)

    def test_empty_guard_set(self):
        for poly in (SQUARE, LSHAPE, DONUT):
            c = build_complex(poly, [])
            assert all(lab == () for lab in c.labels)
            assert sum((ring_area(x) for x in c.cells), RAT(0)) == poly.area()

    def test_cells_convex_and_positive(self):
        c = build_complex(LSHAPE, [(RAT(1, 4), RAT(7, 4)), (RAT(7, 4), RAT(1, 4))])
        for cell in c.cells:
            assert ring_area(cell) > 0
            assert is_convex_ring(cell)

    def test_multiplicity_labels(self):
        g = (RAT(1, 2), RAT(1, 2))
        c = build_complex(LSHAPE, [g, g, g])
        assert c.labels == [(0, 1, 2)] * len(c.cells)

    def test_guard_outside_rejected(self):
        with pytest.raises(InvalidInputError):
            build_complex(SQUARE, [P(9, 9)])

    def test_label_soundness_random_interior_points(self):
        rng = random.Random(7)
        guards = [(RAT(1, 4), RAT(7, 4)), (RAT(7, 4), RAT(1, 4))]
        c = build_complex(LSHAPE, guards)
        for cell, lab in zip(c.cells, c.labels):
            for p in sample_in_cell(cell, rng, 8):
                assert label_signature(LSHAPE, p, guards) == lab

    def test_donut_partition_and_labels(self):
        guards = [P(1, 1), P(5, 5)]
        c = build_complex(DONUT, guards)
        c.area_check()
        rng = random.Random(3)
        for cell, lab in zip(c.cells, c.labels):
            for p in sample_in_cell(cell, rng, 4):
                assert label_signature(DONUT, p, guards) == lab

    def test_determinism(self):
        a = build_complex(LSHAPE, [(RAT(1, 4), RAT(7, 4))])
        b = build_complex(LSHAPE, [(RAT(1, 4), RAT(7, 4))])
        assert a.cells == b.cells and a.labels == b.labels


class TestRefineComplex:
    def test_square_center_guard_diagonals(self):
        c = build_complex(SQUARE, [P(2, 2)])
        r = refine_complex(c, SQUARE)
        # all seed pairs are the 4 corners: two diagonals -> 4 triangles
        assert len(r.cells) == 4
        assert sorted(ring_area(x) for x in r.cells) == [4, 4, 4, 4]
        assert same_side_holds(r, c)

    def test_lshape_no_guards_cell_count_vs_bruteforce(self):
        c = build_complex(LSHAPE, [])
        r = refine_complex(c, LSHAPE)
        assert sum((ring_area(x) for x in r.cells), RAT(0)) == 3
        assert same_side_holds(r, c)
        # independent brute-force enumeration of the line arrangement inside
        # the L: count distinct sign vectors of a dense rational sample
        seeds = r.seeds
        lines = set()
        from polyguard.geom import line_through

        for i in range(len(seeds)):
            for j in range(i + 1, len(seeds)):
                lines.add(line_through(seeds[i], seeds[j]))
        lines = sorted(lines)
        step = RAT(1, 40)
        patterns = set()
        x = step / 3
        while x < 2:
            y = step / 7
            while y < 2:
                p = (x, y)
                if LSHAPE.locate(p) == "interior":
                    sig = tuple(
                        1 if (A * p[0] + B * p[1] - C) > 0 else -1
                        for (A, B, C) in lines
                        if (A * p[0] + B * p[1] - C) != 0
                    )
                    if len(sig) == len(lines):
                        patterns.add(sig)
                y += step
            x += step
        # every sampled open region must land inside exactly one refined cell;
        # the sampled pattern count can only undercount the true cell count
        assert len(patterns) <= len(r.cells)
        assert len(r.cells) - len(patterns) <= 2

    def test_parent_map_exact(self):
        c = build_complex(LSHAPE, [(RAT(1, 4), RAT(7, 4))])
        r = refine_complex(c, LSHAPE)
        for cell, k in zip(r.cells, r.parent):
            rep = centroid(cell)
            assert locate_in_ring(rep, c.cells[k]) != EXTERIOR

    def test_collinear_seed_dedup(self):
        # three collinear seeds produce one line, not three
        from polyguard.geom import line_through

        pts = [P(0, 0), P(1, 1), P(2, 2)]
        keys = {line_through(pts[0], pts[1]), line_through(pts[0], pts[2]),
                line_through(pts[1], pts[2])}
        assert len(keys) == 1


class TestSubsystemRanges:
    def test_convex_single_trace(self):
        traces = subsystem_ranges(SQUARE, [P(1, 1), P(3, 3)])
        assert [t.subset for t in traces] == [(0, 1)]

    def test_empty_qprime(self):
        traces = subsystem_ranges(SQUARE, [])
        assert [t.subset for t in traces] == [()]

    def test_lshape_arm_tips(self):
        traces = subsystem_ranges(LSHAPE, [(RAT(1, 4), RAT(7, 4)), (RAT(7, 4), RAT(1, 4))])
        assert {t.subset for t in traces} == {(0, 1), (0,), (1,)}

    def test_trace_count_bounded_by_cells(self):
        q = [(RAT(1, 4), RAT(7, 4)), (RAT(7, 4), RAT(1, 4)), (RAT(1, 2), RAT(1, 2))]
        traces = subsystem_ranges(LSHAPE, q)
        c = build_complex(LSHAPE, q)
        assert len(traces) <= len(c.cells)
        # sanity for the bounded-VC property: no small subset is shattered
        # unless the trace family genuinely contains its full power set
        assert len(traces) < 2 ** len(q)
