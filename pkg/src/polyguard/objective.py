"""Weighted visible-area objective over the rounded active region.

For a viewpoint q the objective is the decayed weight of what q sees of the
kept rounded cells.  Within a region whose combinatorics are frozen (no line
through two structure points crosses it), each kept cell contributes through a
fixed list of angular sectors delimited by fixed points; every sector piece is
the cell clipped by two half-planes whose boundary lines rotate about those
fixed points as q moves.  That structure gives exact evaluation, exact
convergent upper bounds, and the quadratic-over-affine-products term view.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InternalInvariantError, InvalidInputError
from .geom import (
    EXTERIOR,
    RAT,
    R0,
    R1,
    PolygonWithHoles,
    centroid,
    convex_hull,
    cross,
    direction_key,
    locate_in_ring,
    ring_area,
)
from .rounding import RoundedComplex
from .visibility import (
    _in_ccw_cone,
    _rotate_by_conjugate,
    sees,
    star_fan_triangles,
    visibility_polygon,
)


def _sign(v):
    return 1 if v > 0 else (-1 if v < 0 else 0)


def clip_cross(ring, o, a, keep: int):
    """Clip a convex CCW ring by {z : keep * cross(o, a, z) >= 0}."""
    n = len(ring)
    if n == 0:
        return []
    ox, oy = o
    dx = a[0] - ox
    dy = a[1] - oy
    if keep < 0:
        dx, dy = -dx, -dy
    sides = [dx * (p[1] - oy) - dy * (p[0] - ox) for p in ring]
    if min(sides) >= 0:
        return ring
    out = []
    for i in range(n):
        p, sp = ring[i], sides[i]
        j = i + 1 if i + 1 < n else 0
        q, sq = ring[j], sides[j]
        if sp >= 0:
            out.append(p)
            if sq < 0 and sp > 0:
                t = sp / (sp - sq)
                out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
        elif sq > 0:
            t = sp / (sp - sq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return [p for i, p in enumerate(out) if p != out[i - 1]]


def _cross_point(o, a, p, q, sp, sq):
    t = sp / (sp - sq)
    return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))


def clip_area(ring, constraints):
    """Exact area of ring ∩ all half-planes (o, a, keep)."""
    piece = ring
    for o, a, keep in constraints:
        if o == a:
            # degenerate pivot: constraint dropped (caller excludes this case)
            continue
        piece = clip_cross(piece, o, a, keep)
        if len(piece) < 3:
            return R0
    return abs(ring_area(piece))


# ---------------------------------------------------------------------------
# frozen per-cell sector structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sector:
    """Visible angular sector between rays through two fixed delimiter points."""

    d_cw: tuple
    d_ccw: tuple


@dataclass
class CellView:
    """How one kept cell looks from a frozen region: fully seen or by sectors."""

    ring: list
    exponent: int
    coef: object  # (1-eps)^exponent
    area: object
    kind: str  # "full" | "sectors"
    sectors: list = field(default_factory=list)

    def value_at(self, q):
        """Exact contribution area(V(q) ∩ ring) for q in the frozen region."""
        if self.kind == "full":
            return self.area
        total = R0
        for s in self.sectors:
            total += clip_area(self.ring, ((q, s.d_cw, 1), (q, s.d_ccw, -1)))
        return total

    def bound_over(self, tri):
        """Upper bound of the contribution over a triangle of viewpoints.

        Each sector is relaxed independently: the union over q in tri of a
        half-plane pivoting about a fixed point d is the complement of the
        intersection of the per-vertex half-planes (the side test is affine
        in q), so inclusion-exclusion gives the exact area of the relaxed
        wedge.  Vertices equal to the pivot contribute nothing and are
        skipped; the sup over the punctured triangle is still covered.
        """
        if self.kind == "full":
            return self.area
        total = R0
        for s in self.sectors:
            c1 = [(t, s.d_cw, -1) for t in tri if t != s.d_cw]
            c2 = [(t, s.d_ccw, 1) for t in tri if t != s.d_ccw]
            if not c1 or not c2:
                total += self.area
                continue
            a1 = clip_area(self.ring, c1)
            a2 = clip_area(self.ring, c2)
            a12 = clip_area(self.ring, c1 + c2)
            total += self.area - a1 - a2 + a12
        return total


def _tangent_vertices(q, ring):
    """Clockwise-most and counterclockwise-most vertices of a convex ring seen
    from an outside point q; requires q off all vertex-pair lines (strict)."""
    t_cw = t_ccw = None
    for v in ring:
        signs = [_sign(cross(q, v, w)) for w in ring if w != v]
        if 0 in signs:
            raise InternalInvariantError("tangent tie: viewpoint on a vertex-pair line")
        if all(s > 0 for s in signs):
            t_cw = v
        elif all(s < 0 for s in signs):
            t_ccw = v
    if t_cw is None or t_ccw is None:
        raise InternalInvariantError("tangent search failed (viewpoint inside cell?)")
    return t_cw, t_ccw


def _ray_entry(q, u, ring):
    """First crossing of ray q + t*u (t > 0) with the convex ring boundary."""
    best = None
    n = len(ring)
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        eb = (b[0] - a[0], b[1] - a[1])
        den = u[0] * eb[1] - u[1] * eb[0]
        if den == 0:
            continue
        aq = (a[0] - q[0], a[1] - q[1])
        t = (aq[0] * eb[1] - aq[1] * eb[0]) / den
        if t <= 0:
            continue
        s = (aq[0] * u[1] - aq[1] * u[0]) / den
        if s < 0 or s > 1:
            continue
        if best is None or t < best[0]:
            best = (t, (q[0] + t * u[0], q[1] + t * u[1]))
    if best is None:
        raise InternalInvariantError("in-cone ray missed the cell")
    return best[1]


def _between(d1, d2):
    n1 = abs(d1[0]) + abs(d1[1])
    n2 = abs(d2[0]) + abs(d2[1])
    return (d1[0] * n2 + d2[0] * n1, d1[1] * n2 + d2[1] * n1)


def cell_view(poly: PolygonWithHoles, ring, exponent, coef, q0) -> CellView:
    """Sector structure of one kept cell from representative viewpoint q0.

    Valid over the whole frozen region containing q0.  q0 must lie outside
    the cell (inside viewpoints see it fully; handled by the caller).
    """
    area = ring_area(ring)
    t_cw, t_ccw = _tangent_vertices(q0, ring)
    u_cw = (t_cw[0] - q0[0], t_cw[1] - q0[1])
    u_ccw = (t_ccw[0] - q0[0], t_ccw[1] - q0[1])
    events = []
    for w in poly.vertices:
        d = (w[0] - q0[0], w[1] - q0[1])
        if w in (t_cw, t_ccw):
            continue
        c1 = u_cw[0] * d[1] - u_cw[1] * d[0]
        c2 = d[0] * u_ccw[1] - d[1] * u_ccw[0]
        if c1 <= 0 or c2 <= 0:
            continue
        if sees(poly, q0, w):
            events.append(w)
    events.sort(
        key=lambda w: direction_key(
            _rotate_by_conjugate((w[0] - q0[0], w[1] - q0[1]), u_cw)
        )
    )
    delimiters = [t_cw] + events + [t_ccw]
    sectors = []
    for d_a, d_b in zip(delimiters, delimiters[1:]):
        ua = (d_a[0] - q0[0], d_a[1] - q0[1])
        ub = (d_b[0] - q0[0], d_b[1] - q0[1])
        rep = _between(ua, ub)
        entry = _ray_entry(q0, rep, ring)
        if sees(poly, q0, entry):
            sectors.append(Sector(d_a, d_b))
    return CellView(ring, exponent, coef, area, "sectors", sectors)


# ---------------------------------------------------------------------------
# structure lines (combinatorics freezing)
# ---------------------------------------------------------------------------


def _line_key(a, b):
    A = b[1] - a[1]
    B = a[0] - b[0]
    C = A * a[0] + B * a[1]
    if A != 0:
        return (R1, B / A, C / A)
    return (R0, R1, C / B)


def vertex_pair_lines(points):
    """Deduplicated lines through all pairs of the given points."""
    lines = {}
    pts = sorted(set(points))
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            lines.setdefault(_line_key(pts[i], pts[j]), (pts[i], pts[j]))
    return [lines[k] for k in sorted(lines)]


def cell_structure_lines(poly: PolygonWithHoles, ring):
    """Lines tying the cell's combinatorics to q: cell-vertex pairs and
    (polygon vertex, cell vertex) pairs."""
    lines = {}
    pts = sorted(set(ring))
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            lines.setdefault(_line_key(pts[i], pts[j]), (pts[i], pts[j]))
    for w in poly.vertices:
        for r in pts:
            if w != r:
                lines.setdefault(_line_key(w, r), (w, r))
    return [lines[k] for k in sorted(lines)]


def line_crosses_triangle(a, b, tri) -> bool:
    """Does the infinite line through a, b cross the triangle's interior?"""
    signs = [_sign(cross(a, b, v)) for v in tri]
    return 1 in signs and -1 in signs


# ---------------------------------------------------------------------------
# direct geometric evaluation (the independent route)
# ---------------------------------------------------------------------------


def xi_direct(poly: PolygonWithHoles, kept, eps, q, vis_cache=None):
    """Exact weighted visible area of the kept cells from q, straight from the
    visibility polygon.  Independent of all sector/objective machinery."""
    q = (RAT(q[0]), RAT(q[1]))
    if vis_cache is not None and q in vis_cache:
        vis = vis_cache[q]
    else:
        vis = visibility_polygon(poly, q)
        if vis_cache is not None:
            vis_cache[q] = vis
    fans = star_fan_triangles(vis, q)
    total = R0
    from .geom import clip_convex

    for ring, j, _ in kept:
        coef = (1 - eps) ** j
        xlo = min(p[0] for p in ring)
        xhi = max(p[0] for p in ring)
        ylo = min(p[1] for p in ring)
        yhi = max(p[1] for p in ring)
        got = R0
        for tri in fans:
            if max(t[0] for t in tri) < xlo or min(t[0] for t in tri) > xhi:
                continue
            if max(t[1] for t in tri) < ylo or min(t[1] for t in tri) > yhi:
                continue
            piece = clip_convex(list(tri), ring)
            if len(piece) >= 3:
                got += abs(ring_area(piece))
        total += coef * got
    return total


# ---------------------------------------------------------------------------
# the spec-level triangle objective (symbolic term view included)
# ---------------------------------------------------------------------------


def _affine_const(c):
    return (R0, R0, RAT(c))


def _affine_eval(a, l1, l2):
    return a[0] * l1 + a[1] * l2 + a[2]


def _affine_mul(a, b):
    """Product of two affine forms as a quadratic coefficient dict."""
    keys = ((1, 0), (0, 1), (0, 0))
    out = {}
    for (i1, j1), c1 in zip(keys, a):
        if c1 == 0:
            continue
        for (i2, j2), c2 in zip(keys, b):
            if c2 == 0:
                continue
            k = (i1 + i2, j1 + j2)
            out[k] = out.get(k, R0) + c1 * c2
    return out


def _quad_eval(q, l1, l2):
    total = R0
    for (i, j), c in q.items():
        total += c * l1**i * l2**j
    return total


@dataclass
class Term:
    """One shoelace pair term: coef * M(l1,l2) / prod(affine factors)."""

    exponent: int
    coef: object
    numerator: dict
    den_factors: list

    def evaluate(self, l1, l2):
        den = R1
        for f in self.den_factors:
            den *= _affine_eval(f, l1, l2)
        if den == 0:
            raise ZeroDivisionError("term denominator vanished (corner point)")
        return self.coef * _quad_eval(self.numerator, l1, l2) / den


@dataclass
class TriangleObjective:
    """Objective restricted to one frozen triangle of viewpoints.

    ``views`` powers exact evaluation and bounds; ``terms`` is the symbolic
    quadratic-over-affine-products expansion of the same function.
    """

    poly: PolygonWithHoles
    triangle: list
    eps: object
    views: list
    _terms: list | None = None

    def evaluate_point(self, q):
        return sum((v.coef * v.value_at(q) for v in self.views), R0)

    def lambdas_to_point(self, l1, l2):
        v1, v2, v3 = self.triangle
        x = v3[0] + l1 * (v1[0] - v3[0]) + l2 * (v2[0] - v3[0])
        y = v3[1] + l1 * (v1[1] - v3[1]) + l2 * (v2[1] - v3[1])
        return (x, y)

    def evaluate(self, l1, l2):
        return sum((t.evaluate(l1, l2) for t in self.terms), R0)

    @property
    def terms(self):
        if self._terms is None:
            self._terms = _materialize_terms(self)
        return self._terms

    def upper_bound(self, tri=None):
        tri = tri or self.triangle
        return sum((v.coef * v.bound_over(tri) for v in self.views), R0)


def _q_affine(triangle):
    """(qx, qy) as affine forms in (l1, l2)."""
    v1, v2, v3 = triangle
    qx = (v1[0] - v3[0], v2[0] - v3[0], v3[0])
    qy = (v1[1] - v3[1], v2[1] - v3[1], v3[1])
    return qx, qy


def _symbolic_piece(view_ring, sector, q0, qx, qy):
    """Projective-symbolic vertices of one sector piece, CCW, valid over the
    frozen triangle.  Each vertex is (ax, ay, b): affine numerator pair over a
    shared affine denominator."""
    # (vertex_symbol, concrete point, carrier edge of the edge to the next)
    n = len(view_ring)
    poly_v = []
    for i in range(n):
        a, b = view_ring[i], view_ring[(i + 1) % n]
        poly_v.append((("const", a), a, (a, b)))
    for d, keep in ((sector.d_cw, 1), (sector.d_ccw, -1)):
        out = []
        m = len(poly_v)
        sides = [keep * cross(q0, d, pv[1]) for pv in poly_v]
        for i in range(m):
            (sym_p, pt_p, carrier), sp = poly_v[i], sides[i]
            (_, pt_q, _), sq = poly_v[(i + 1) % m], sides[(i + 1) % m]
            if sp >= 0:
                out.append(poly_v[i])
                if sq < 0 and sp > 0:
                    x = _cross_point(q0, d, pt_p, pt_q, sp, sq)
                    out.append((("cross", d, carrier), x, ("chord", d)))
            elif sq > 0:
                x = _cross_point(q0, d, pt_p, pt_q, sp, sq)
                out.append((("cross", d, carrier), x, carrier))
        poly_v = [pv for i, pv in enumerate(out) if pv[1] != out[i - 1][1]]
        if len(poly_v) < 3:
            return []
    verts = []
    for sym, pt, _ in poly_v:
        if sym[0] == "const":
            v = sym[1]
            verts.append((_affine_const(v[0]), _affine_const(v[1]), _affine_const(1)))
        else:
            _, d, carrier = sym
            if carrier[0] == "chord":
                raise InternalInvariantError("second clip crossed the first chord")
            ea, eb = carrier
            A = eb[1] - ea[1]
            B = ea[0] - eb[0]
            C = A * ea[0] + B * ea[1]
            off = C - A * d[0] - B * d[1]
            if off == 0:
                verts.append((_affine_const(d[0]), _affine_const(d[1]), _affine_const(1)))
                continue
            # b(l) = A*(dx - qx) + B*(dy - qy)
            bden = tuple(
                -A * qx[k] - B * qy[k] + (A * d[0] + B * d[1] if k == 2 else R0)
                for k in range(3)
            )
            ax = tuple(
                d[0] * bden[k] + off * ((d[0] if k == 2 else R0) - qx[k])
                for k in range(3)
            )
            ay = tuple(
                d[1] * bden[k] + off * ((d[1] if k == 2 else R0) - qy[k])
                for k in range(3)
            )
            verts.append((ax, ay, bden))
    return verts


def _materialize_terms(obj: TriangleObjective):
    qx, qy = _q_affine(obj.triangle)
    q0 = centroid(obj.triangle)
    terms = []
    half = RAT(1, 2)
    for view in obj.views:
        if view.kind == "full":
            terms.append(
                Term(view.exponent, view.coef, {(0, 0): view.area}, [])
            )
            continue
        for sector in view.sectors:
            verts = _symbolic_piece(view.ring, sector, q0, qx, qy)
            k = len(verts)
            for i in range(k):
                ax1, ay1, b1 = verts[i]
                ax2, ay2, b2 = verts[(i + 1) % k]
                num = _affine_mul(ax1, ay2)
                for key, c in _affine_mul(ax2, ay1).items():
                    num[key] = num.get(key, R0) - c
                factors = [f for f in (b1, b2) if f[:2] != (R0, R0)]
                scale = R1
                for f in (b1, b2):
                    if f[:2] == (R0, R0):
                        scale *= f[2]
                num = {key: c / scale for key, c in num.items() if c != 0}
                terms.append(Term(view.exponent, view.coef * half, num, factors))
    return terms


def build_triangle_objective(
    poly: PolygonWithHoles,
    rounded: RoundedComplex,
    eps,
    triangle,
    container=None,
) -> TriangleObjective:
    """Spec operation: the symbolic objective for one frozen triangle.

    ``container``, when given, is the refined cell that must satisfy the
    same-side invariant; otherwise the triangle itself is checked against
    every structure line (polygon-vertex pairs and kept-cell lines).
    """
    region = container if container is not None else triangle
    if rounded.kept:
        for a, b in vertex_pair_lines(poly.vertices):
            if line_crosses_triangle(a, b, region):
                raise InvalidInputError("same-side violation: polygon vertex pair line")
        for ring, _, _ in rounded.kept:
            for a, b in cell_structure_lines(poly, ring):
                if line_crosses_triangle(a, b, region):
                    raise InvalidInputError("same-side violation: kept-cell line")
    q0 = centroid(triangle)
    views = []
    for ring, j, _ in rounded.kept:
        coef = (1 - eps) ** j
        if locate_in_ring(q0, ring) != EXTERIOR:
            views.append(CellView(ring, j, coef, ring_area(ring), "full"))
        else:
            views.append(cell_view(poly, ring, j, coef, q0))
    return TriangleObjective(poly, list(triangle), eps, views)
