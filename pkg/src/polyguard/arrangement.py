"""Labeled convex-cell partitions induced by guard visibility polygons.

The overlay is built by exact pairwise segment splitting followed by planar
face extraction; non-convex faces are split by chords through their reflex
vertices.  Every build asserts the exact partition identity
sum(cell areas) == area(H).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InternalInvariantError, InvalidInputError
from .geom import (
    EXTERIOR,
    RAT,
    R0,
    PolygonWithHoles,
    centroid,
    cross,
    direction_key,
    line_through,
    locate_in_ring,
    on_segment,
    ring_area,
    ring_canonical,
    segment_intersect,
)
from .visibility import sees, visibility_polygon


@dataclass
class CellComplex:
    """Convex cells partitioning H; cell i sees exactly guards[j] for j in labels[i]."""

    poly: PolygonWithHoles
    guards: list
    cells: list
    labels: list
    generation: int = 0

    @property
    def reps(self):
        return [centroid(c) for c in self.cells]

    def area_check(self):
        total = sum((ring_area(c) for c in self.cells), R0)
        if total != self.poly.area():
            raise InternalInvariantError(
                f"partition identity broken: {total} != {self.poly.area()}"
            )

    def active_cells(self, T: int):
        """Indices of cells seen by fewer than T guards (with multiplicity)."""
        return [i for i, lab in enumerate(self.labels) if len(lab) < T]


@dataclass
class RefinedComplex:
    cells: list
    parent: list
    seeds: list


@dataclass(frozen=True)
class Trace:
    subset: tuple


# ---------------------------------------------------------------------------
# planar overlay
# ---------------------------------------------------------------------------


def _split_segments(segments):
    """Split every segment at all intersections; return deduped elementary edges."""
    segs = []
    seen = set()
    for a, b in segments:
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if key not in seen:
            seen.add(key)
            segs.append(key)
    cuts = [{a, b} for a, b in segs]
    n = len(segs)
    for i in range(n):
        a, b = segs[i]
        for j in range(i + 1, n):
            c, d = segs[j]
            # bbox reject
            if min(a[0], b[0]) > max(c[0], d[0]) or max(a[0], b[0]) < min(c[0], d[0]):
                continue
            if min(a[1], b[1]) > max(c[1], d[1]) or max(a[1], b[1]) < min(c[1], d[1]):
                continue
            kind, val = segment_intersect(a, b, c, d)
            if kind == "point":
                cuts[i].add(val)
                cuts[j].add(val)
            elif kind == "overlap":
                p, q = val
                cuts[i].update((p, q))
                cuts[j].update((p, q))
    edges = set()
    for (a, b), pts in zip(segs, cuts):
        axis = 0 if abs(b[0] - a[0]) >= abs(b[1] - a[1]) else 1
        ordered = sorted(pts, key=lambda p: (p[axis], p))
        if a[axis] > b[axis]:
            ordered.reverse()
        for u, v in zip(ordered, ordered[1:]):
            if u != v:
                edges.add((min(u, v), max(u, v)))
    return sorted(edges)


def _face_cycles(edges):
    """Extract face cycles of the planar subdivision (interior on the left)."""
    adj = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    for node, nbrs in adj.items():
        nbrs.sort(key=lambda w: direction_key((w[0] - node[0], w[1] - node[1])))
    index_of = {
        node: {w: k for k, w in enumerate(nbrs)} for node, nbrs in adj.items()
    }
    visited = set()
    faces = []
    for u0, v0 in sorted(edges):
        for start in ((u0, v0), (v0, u0)):
            if start in visited:
                continue
            cycle = []
            u, v = start
            while (u, v) not in visited:
                visited.add((u, v))
                cycle.append(u)
                nbrs = adj[v]
                k = index_of[v][u]
                w = nbrs[(k - 1) % len(nbrs)]
                u, v = v, w
            faces.append(cycle)
    return faces


def _interior_point(ring):
    """An exact interior point of a simple CCW ring (O'Rourke's diagonal trick)."""
    n = len(ring)
    k = min(range(n), key=lambda i: (ring[i][1], ring[i][0]))
    v = ring[k]
    a, b = ring[(k - 1) % n], ring[(k + 1) % n]
    if cross(a, v, b) == 0:
        # collinear bottom corner: walk to a strictly convex one
        for off in range(1, n):
            k2 = (k + off) % n
            a2, v2, b2 = ring[(k2 - 1) % n], ring[k2], ring[(k2 + 1) % n]
            if cross(a2, v2, b2) > 0:
                a, v, b = a2, v2, b2
                break
    inside = [
        p
        for p in ring
        if p not in (a, v, b)
        and cross(a, v, p) >= 0
        and cross(v, b, p) >= 0
        and cross(b, a, p) >= 0
    ]
    if not inside:
        return ((a[0] + v[0] + b[0]) / 3, (a[1] + v[1] + b[1]) / 3)
    far = max(inside, key=lambda p: (abs(cross(a, b, p)), p))
    return ((v[0] + far[0]) / 2, (v[1] + far[1]) / 2)


def _convexify(ring):
    """Split a simple CCW ring into convex CCW cells by repeated diagonals.

    The diagonal always exists: at the bottom-left-most corner v (strictly
    convex in any simple ring), either the neighbor chord is free of other
    vertices, or the chord from v to the intruder farthest from the neighbor
    line is a diagonal.  Exact arithmetic keeps this sound under collinear
    degeneracies.
    """
    n = len(ring)
    if len(set(ring)) != n:
        raise InternalInvariantError("weakly-simple face encountered")
    if all(cross(ring[(i - 1) % n], ring[i], ring[(i + 1) % n]) >= 0 for i in range(n)):
        return [ring]
    k = min(range(n), key=lambda i: (ring[i][1], ring[i][0]))
    a, v, b = ring[(k - 1) % n], ring[k], ring[(k + 1) % n]
    if cross(a, v, b) <= 0:
        raise InternalInvariantError("bottom-left corner of a simple ring not convex")
    intruders = [
        p
        for p in ring
        if p not in (a, v, b)
        and cross(a, v, p) >= 0
        and cross(v, b, p) >= 0
        and cross(b, a, p) >= 0
    ]
    if not intruders:
        i, j = (k - 1) % n, (k + 1) % n  # chord a--b, splitting off triangle avb
    else:
        q = max(intruders, key=lambda p: (abs(cross(a, b, p)), [-c for c in p]))
        i, j = k, ring.index(q)
    if i > j:
        i, j = j, i
    ring1 = ring[i : j + 1]
    ring2 = ring[j:] + ring[: i + 1]
    out = []
    for piece in (ring1, ring2):
        if len(piece) >= 3 and ring_area(piece) > 0:
            out.extend(_convexify(piece))
        elif len(piece) >= 3 and ring_area(piece) < 0:
            raise InternalInvariantError("diagonal split produced a reversed piece")
    return out


def _hole_bridges(poly: PolygonWithHoles, extra_segments):
    """Two horizontal bridge segments per hole, connecting it to the rest.

    Keeps every face of the overlay simply connected; bridges are chords of
    the interior so areas and labels are unaffected.
    """
    bridges = []
    base = [(a, b) for a, b in poly.edges] + list(extra_segments)
    for hole in poly.holes:
        for pick, sign in ((min(hole), -1), (max(hole), 1)):
            px, py = pick
            best = None
            for a, b in base + bridges:
                if a == pick or b == pick:
                    continue
                if (a[1] > py) == (b[1] > py) and a[1] != py and b[1] != py:
                    continue
                # intersection of the horizontal line y=py with segment ab
                if a[1] == b[1]:
                    continue
                t = (py - a[1]) / (b[1] - a[1])
                if t < 0 or t > 1:
                    continue
                x = a[0] + t * (b[0] - a[0])
                if sign * (x - px) <= 0:
                    continue
                if best is None or sign * (x - best) < 0:
                    best = x
            if best is None:
                raise InternalInvariantError("hole bridge found no wall to attach to")
            bridges.append((pick, (best, py)))
    return bridges


def _overlay_cells(poly: PolygonWithHoles, extra_segments):
    """Full overlay pipeline: returns convex CCW cells partitioning H."""
    segments = list(poly.edges) + list(extra_segments)
    if poly.holes:
        segments += _hole_bridges(poly, extra_segments)
    edges = _split_segments(segments)
    faces = _face_cycles(edges)
    cells = []
    for ring in faces:
        if len(ring) < 3:
            continue
        area = ring_area(ring)
        if area <= 0:
            continue
        rep = _interior_point(ring)
        if poly.locate(rep) == EXTERIOR:
            continue
        cells.extend(_convexify(ring))
    cells = [list(ring_canonical(c)) for c in cells]
    cells.sort(key=lambda c: (c[0], c[1 % len(c)], len(c), tuple(map(tuple, c))))
    return cells


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def build_complex(
    poly: PolygonWithHoles,
    guards,
    generation: int = 0,
    vis_cache: dict | None = None,
) -> CellComplex:
    """Overlay of H with all guard visibility polygons, cells labeled exactly.

    ``guards`` may contain repeated points (a multiset); geometry is computed
    once per distinct point, labels carry all indices.
    """
    guards = [(RAT(p[0]), RAT(p[1])) for p in guards]
    for g in guards:
        if poly.locate(g) == EXTERIOR:
            raise InvalidInputError(f"guard {g} lies outside the polygon")
    distinct = sorted(set(guards))
    rings = {}
    for g in distinct:
        if vis_cache is not None and g in vis_cache:
            rings[g] = vis_cache[g]
        else:
            rings[g] = visibility_polygon(poly, g)
            if vis_cache is not None:
                vis_cache[g] = rings[g]
    extra = []
    for g in distinct:
        ring = rings[g]
        m = len(ring)
        extra.extend((ring[i], ring[(i + 1) % m]) for i in range(m))
    cells = _overlay_cells(poly, extra)
    labels = []
    for cell in cells:
        rep = centroid(cell)
        lab = []
        for idx, g in enumerate(guards):
            if locate_in_ring(rep, rings[g]) != EXTERIOR:
                lab.append(idx)
        labels.append(tuple(lab))
    complex_ = CellComplex(poly, guards, cells, labels, generation)
    complex_.area_check()
    return complex_


def internal_vertices(complex_: CellComplex):
    """Vertices of the cell complex that are not polygon vertices."""
    vset = set(complex_.poly.vertices)
    out = set()
    for cell in complex_.cells:
        for p in cell:
            if p not in vset:
                out.add(p)
    return sorted(out)


def _line_chords(poly: PolygonWithHoles, line_pts):
    """Clip the infinite line through two points to the closed region: chords."""
    a, b = line_pts
    hits = set()
    for u, v in poly.edges:
        d1 = cross(a, b, u)
        d2 = cross(a, b, v)
        if d1 == 0:
            hits.add(u)
        if d2 == 0:
            hits.add(v)
        if (d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0):
            t = d1 / (d1 - d2)
            hits.add((u[0] + t * (v[0] - u[0]), u[1] + t * (v[1] - u[1])))
    if len(hits) < 2:
        return []
    axis = 0 if abs(b[0] - a[0]) >= abs(b[1] - a[1]) else 1
    ordered = sorted(hits, key=lambda p: (p[axis], p))
    chords = []
    for u, v in zip(ordered, ordered[1:]):
        mid = ((u[0] + v[0]) / 2, (u[1] + v[1]) / 2)
        if poly.locate(mid) != EXTERIOR:
            chords.append((u, v))
    return chords


def refine_complex(
    complex_: CellComplex, poly: PolygonWithHoles, extra_points=()
) -> RefinedComplex:
    """Refinement by all lines through pairs of seed points, clipped to H.

    Seeds are the polygon vertices plus the complex's internal vertices plus
    any extra points.  Within every refined cell, the full seed set presents a
    fixed combinatorial picture (same-side invariant).
    """
    seeds = sorted(
        set(poly.vertices)
        | set(internal_vertices(complex_))
        | {(RAT(p[0]), RAT(p[1])) for p in extra_points}
    )
    lines = {}
    for i in range(len(seeds)):
        for j in range(i + 1, len(seeds)):
            key = line_through(seeds[i], seeds[j])
            lines.setdefault(key, (seeds[i], seeds[j]))
    segments = []
    for cell in complex_.cells:
        m = len(cell)
        segments.extend((cell[i], cell[(i + 1) % m]) for i in range(m))
    for pts in lines.values():
        segments.extend(_line_chords(poly, pts))
    cells = _overlay_cells(poly, segments)
    parent = []
    for cell in cells:
        rep = centroid(cell)
        for k, pc in enumerate(complex_.cells):
            if locate_in_ring(rep, pc) != EXTERIOR:
                parent.append(k)
                break
        else:
            raise InternalInvariantError("refined cell has no parent")
    refined = RefinedComplex(cells, parent, seeds)
    total = sum((ring_area(c) for c in cells), R0)
    if total != poly.area():
        raise InternalInvariantError("refinement broke the partition identity")
    return refined


def same_side_holds(refined: RefinedComplex, complex_: CellComplex) -> bool:
    """Check the refinement invariant: each refined cell stays on one closed
    side of every line through two distinct vertices of its parent cell."""
    for cell, k in zip(refined.cells, refined.parent):
        parent = complex_.cells[k]
        pts = parent
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                a, b = pts[i], pts[j]
                if a == b:
                    continue
                signs = {1 if cross(a, b, p) > 0 else (-1 if cross(a, b, p) < 0 else 0) for p in cell}
                if 1 in signs and -1 in signs:
                    return False
    return True


def subsystem_ranges(poly: PolygonWithHoles, qprime) -> list:
    """Distinct visibility traces of the finite set qprime over all of H."""
    pts = [(RAT(p[0]), RAT(p[1])) for p in qprime]
    complex_ = build_complex(poly, pts)
    traces = sorted({tuple(lab) for lab in complex_.labels})
    return [Trace(t) for t in traces]


def label_signature(poly: PolygonWithHoles, point, guards) -> tuple:
    """Independent label recomputation straight from sees()."""
    return tuple(i for i, g in enumerate(guards) if sees(poly, point, g))
