"""Exact rational 2-D geometry kernel.

Every predicate and measure in the package is computed over arbitrary-precision
rationals; no floating point enters any geometric decision.  Points are plain
``(x, y)`` tuples of rationals, rings are lists of points.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

try:
    from gmpy2 import mpq as RAT
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    from fractions import Fraction as RAT

from .errors import InvalidInputError

Point = tuple  # (x, y) with rational coordinates
Ring = list  # list of Point, implicitly closed

LEFT, COLLINEAR, RIGHT = 1, 0, -1
INTERIOR, BOUNDARY, EXTERIOR = "interior", "boundary", "exterior"

R0 = RAT(0)
R1 = RAT(1)


def rat(value, den=None):
    """Coerce to the package rational type.

    Accepts ints, rationals, and strings like ``"3"``, ``"-7/4"`` or ``"0.25"``
    (decimal strings are parsed exactly).  Floats are rejected: they would
    smuggle binary rounding into exact geometry.
    """
    if den is not None:
        return RAT(value) / RAT(den)
    if isinstance(value, float):
        raise InvalidInputError(f"refusing float {value!r}; pass a string or rational")
    if isinstance(value, str):
        s = value.strip()
        if "." in s:
            head, tail = s.split(".", 1)
            if not tail.isdigit():
                raise InvalidInputError(f"bad rational literal {value!r}")
            sign = -1 if head.strip().startswith("-") else 1
            whole = int(head) if head not in ("", "-", "+") else 0
            return RAT(whole) + sign * RAT(int(tail), 10 ** len(tail))
        try:
            return RAT(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInputError(f"bad rational literal {value!r}") from exc
    return RAT(value)


def rat_str(q) -> str:
    """Canonical ``"p/q"`` (or integer) string form."""
    return str(RAT(q))


def bit_length(q) -> int:
    """Max bit-length of numerator and denominator (the bit-model size)."""
    q = RAT(q)
    return max(int(abs(q.numerator)).bit_length(), int(q.denominator).bit_length())


def floor_log2(q) -> int:
    """Largest integer e with 2**e <= q, for positive rational q."""
    q = RAT(q)
    if q <= 0:
        raise InvalidInputError("floor_log2 needs a positive value")
    num, den = int(q.numerator), int(q.denominator)
    e = num.bit_length() - den.bit_length()
    # 2**e approximates num/den within a factor of 2; fix up exactly.
    if e >= 0:
        if (1 << e) * den > num:
            e -= 1
        if (1 << (e + 1)) * den <= num:
            e += 1
    else:
        if den > num * (1 << -e):
            e -= 1
        if den <= num * (1 << -(e + 1)):
            e += 1
    assert pow2(e) <= q < pow2(e + 1)
    return e


def pow2(e: int):
    """Exact rational 2**e for any integer e."""
    return RAT(1 << e) if e >= 0 else RAT(1, 1 << -e)


# ---------------------------------------------------------------------------
# predicates
# ---------------------------------------------------------------------------


def cross(o: Point, a: Point, b: Point):
    """Exact cross product (a-o) x (b-o)."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def orientation(p: Point, q: Point, r: Point) -> int:
    """Sign of the turn p->q->r: LEFT, COLLINEAR, or RIGHT."""
    c = cross(p, q, r)
    if c > 0:
        return LEFT
    if c < 0:
        return RIGHT
    return COLLINEAR


def dot(o: Point, a: Point, b: Point):
    return (a[0] - o[0]) * (b[0] - o[0]) + (a[1] - o[1]) * (b[1] - o[1])


def dist2(a: Point, b: Point):
    dx, dy = a[0] - b[0], a[1] - b[1]
    return dx * dx + dy * dy


def on_segment(p: Point, a: Point, b: Point) -> bool:
    """True iff p lies on the closed segment ab (collinearity included)."""
    if cross(a, b, p) != 0:
        return False
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def segment_intersect(a: Point, b: Point, c: Point, d: Point):
    """Exact intersection of closed segments ab and cd.

    Returns ``("empty", None)``, ``("point", p)``, or ``("overlap", (p, q))``
    with exact rational coordinates.
    """
    d1 = cross(a, b, c)
    d2 = cross(a, b, d)
    d3 = cross(c, d, a)
    d4 = cross(c, d, b)
    if d1 == 0 and d2 == 0:
        # collinear: intersect parameter intervals along the dominant axis
        if a == b:
            return ("point", a) if on_segment(a, c, d) else ("empty", None)
        axis = 0 if abs(b[0] - a[0]) >= abs(b[1] - a[1]) else 1
        lo1, hi1 = sorted((a, b), key=lambda p: p[axis])
        lo2, hi2 = sorted((c, d), key=lambda p: p[axis])
        lo = max(lo1, lo2, key=lambda p: p[axis])
        hi = min(hi1, hi2, key=lambda p: p[axis])
        if lo[axis] > hi[axis]:
            return ("empty", None)
        if lo[axis] == hi[axis]:
            return ("point", lo)
        return ("overlap", (lo, hi))
    if d1 == 0 and on_segment(c, a, b):
        return ("point", c)
    if d2 == 0 and on_segment(d, a, b):
        return ("point", d)
    if d3 == 0 and on_segment(a, c, d):
        return ("point", a)
    if d4 == 0 and on_segment(b, c, d):
        return ("point", b)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        t_num = cross(c, d, a)
        t_den = t_num - cross(c, d, b)
        t = RAT(t_num) / t_den
        return ("point", (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    return ("empty", None)


def line_through(a: Point, b: Point):
    """Normalized (A, B, C) with Ax + By = C through a, b; a != b required."""
    A = b[1] - a[1]
    B = a[0] - b[0]
    C = A * a[0] + B * a[1]
    return _normalize_line(A, B, C)


def _normalize_line(A, B, C):
    # scale so the first nonzero of (A, B) is +1; makes lines hashable/dedupable
    if A != 0:
        return (R1, B / A, C / A)
    if B == 0:
        raise InvalidInputError("degenerate line")
    return (R0, R1, C / B)


def line_side(line, p: Point):
    """Sign of A*px + B*py - C."""
    A, B, C = line
    v = A * p[0] + B * p[1] - C
    return 1 if v > 0 else (-1 if v < 0 else 0)


def line_segment_intersection(line, a: Point, b: Point):
    """Intersection point of a line with segment ab, or None (parallel or miss).

    Collinear containment returns None; callers treat collinear overlap
    separately.
    """
    A, B, C = line
    fa = A * a[0] + B * a[1] - C
    fb = A * b[0] + B * b[1] - C
    if fa == fb:
        return None
    if fa * fb > 0:
        return None
    t = fa / (fa - fb)
    return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))


# ---------------------------------------------------------------------------
# rings
# ---------------------------------------------------------------------------


def ring_area2(ring: Ring):
    """Twice the signed shoelace area (positive for counterclockwise)."""
    s = R0
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return s


def ring_area(ring: Ring):
    """Exact signed area, positive iff counterclockwise."""
    return ring_area2(ring) / 2


def ring_is_simple(ring: Ring) -> bool:
    """Quadratic exact simplicity test; fine at desk scale."""
    n = len(ring)
    if n < 3:
        return False
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        if a == b:
            return False
        for j in range(i + 1, n):
            c, d = ring[j], ring[(j + 1) % n]
            kind, val = segment_intersect(a, b, c, d)
            if kind == "empty":
                continue
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            if kind == "overlap":
                return False
            if adjacent:
                shared = {a, b} & {c, d}
                if val not in shared:
                    return False
            else:
                return False
    return True


def locate_in_ring(p: Point, ring: Ring) -> str:
    """Exact point location against a single closed ring (crossing number)."""
    n = len(ring)
    inside = False
    px, py = p
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        if on_segment(p, a, b):
            return BOUNDARY
        ay, by = a[1], b[1]
        if (ay > py) != (by > py):
            # x coordinate of edge at height py
            t = (py - ay) / (by - ay)
            xi = a[0] + t * (b[0] - a[0])
            if xi > px:
                inside = not inside
    return INTERIOR if inside else EXTERIOR


def centroid(ring: Ring) -> Point:
    """Vertex average; interior for convex rings with positive area."""
    n = len(ring)
    sx = sum((p[0] for p in ring), R0)
    sy = sum((p[1] for p in ring), R0)
    return (sx / n, sy / n)


def ring_perimeter_bound(ring: Ring):
    """Rational upper bound on perimeter: sum of per-edge L1 lengths."""
    n = len(ring)
    total = R0
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        total += abs(b[0] - a[0]) + abs(b[1] - a[1])
    return total


def dedup_ring(ring: Ring) -> Ring:
    """Drop repeated consecutive vertices and collinear backtracks (antennae)."""
    pts = [p for i, p in enumerate(ring) if p != ring[(i - 1) % len(ring)]]
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        out = []
        n = len(pts)
        i = 0
        while i < n:
            prev = out[-1] if out else pts[(i - 1) % n]
            cur = pts[i]
            nxt = pts[(i + 1) % n]
            if prev == nxt and cross(prev, cur, nxt) == 0:
                # zero-width spike: skip cur (and the duplicate snaps below)
                changed = True
                i += 1
                continue
            out.append(cur)
            i += 1
        pts = [p for i, p in enumerate(out) if p != out[(i - 1) % len(out)]]
    return pts


def ring_canonical(ring: Ring) -> tuple:
    """Rotation-normalized tuple form (lexicographically smallest start)."""
    k = min(range(len(ring)), key=lambda i: ring[i])
    return tuple(ring[k:] + ring[:k])


def remove_collinear(ring: Ring) -> Ring:
    """Drop vertices interior to straight edges (keeps corner set)."""
    n = len(ring)
    out = []
    for i in range(n):
        if cross(ring[(i - 1) % n], ring[i], ring[(i + 1) % n]) != 0:
            out.append(ring[i])
    return out if len(out) >= 3 else list(ring)


def is_convex_ring(ring: Ring) -> bool:
    """CCW ring convexity; collinear chain vertices allowed."""
    n = len(ring)
    for i in range(n):
        if cross(ring[i], ring[(i + 1) % n], ring[(i + 2) % n]) < 0:
            return False
    return True


def convex_hull(points) -> Ring:
    """Andrew monotone chain; returns CCW hull without interior points."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return list(pts)
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def clip_ring_halfplane(ring: Ring, line, keep_sign: int) -> Ring:
    """Sutherland-Hodgman clip of a convex CCW ring against one half-plane.

    Keeps points p with sign(line(p)) == keep_sign or 0.
    """
    out = []
    n = len(ring)
    if n == 0:
        return out
    sides = [line_side(line, p) for p in ring]
    for i in range(n):
        a, sa = ring[i], sides[i]
        b, sb = ring[(i + 1) % n], sides[(i + 1) % n]
        if sa == keep_sign or sa == 0:
            out.append(a)
            if sb == -keep_sign and sa == keep_sign:
                out.append(line_segment_intersection(line, a, b))
        elif sb == keep_sign:
            out.append(line_segment_intersection(line, a, b))
    return [p for i, p in enumerate(out) if p != out[(i - 1) % len(out)]]


def clip_convex(subject: Ring, clip: Ring) -> Ring:
    """Intersection of convex CCW subject with convex CCW clip polygon."""
    result = list(subject)
    n = len(clip)
    for i in range(n):
        if not result:
            break
        line = line_through(clip[i], clip[(i + 1) % n])
        keep = line_side(line, clip[(i + 2) % n])
        if keep == 0:
            # degenerate (collinear chain); derive side from any non-collinear vertex
            keep = next(
                (s for s in (line_side(line, p) for p in clip) if s != 0), 1
            )
        result = clip_ring_halfplane(result, line, keep)
    return result


def triangle_clip_area(tri, clip_ring) -> "RAT":
    """Exact area of triangle ∩ convex ring (signed-safe: uses |area|)."""
    piece = clip_convex([tri[0], tri[1], tri[2]], clip_ring)
    if len(piece) < 3:
        return R0
    return abs(ring_area(piece))


# ---------------------------------------------------------------------------
# angular order around a pivot
# ---------------------------------------------------------------------------


def _half(d: Point) -> int:
    # 0 for angles in [0, pi), 1 for [pi, 2pi)
    x, y = d
    if y > 0 or (y == 0 and x > 0):
        return 0
    return 1


def direction_cmp(d1: Point, d2: Point) -> int:
    """Exact CCW angular comparison of nonzero direction vectors from 0 angle."""
    h1, h2 = _half(d1), _half(d2)
    if h1 != h2:
        return -1 if h1 < h2 else 1
    c = d1[0] * d2[1] - d1[1] * d2[0]
    if c > 0:
        return -1
    if c < 0:
        return 1
    return 0


direction_key = functools.cmp_to_key(direction_cmp)


def direction_between(d1: Point, d2: Point) -> Point:
    """A rational direction strictly inside the CCW sector from d1 to d2.

    Requires the sector angle to be strictly less than pi.
    """
    n1 = abs(d1[0]) + abs(d1[1])
    n2 = abs(d2[0]) + abs(d2[1])
    return (d1[0] * n2 + d2[0] * n1, d1[1] * n2 + d2[1] * n1)


def primitive_direction(d: Point) -> Point:
    """Scale a rational direction to a canonical small representative."""
    x, y = RAT(d[0]), RAT(d[1])
    if x == 0 and y == 0:
        raise InvalidInputError("zero direction")
    if x == 0:
        return (R0, R1 if y > 0 else -R1)
    if y == 0:
        return (R1 if x > 0 else -R1, R0)
    s = abs(x)
    return (x / s, y / s)


# ---------------------------------------------------------------------------
# polygon with holes
# ---------------------------------------------------------------------------


@dataclass
class PolygonWithHoles:
    """The gallery: one CCW outer ring plus CW hole rings, all exact.

    Immutable after construction; derived structures are cached on first use.
    """

    outer: Ring
    holes: list = field(default_factory=list)

    def __post_init__(self):
        self.outer = [tuple(map(RAT, p)) for p in self.outer]
        self.holes = [[tuple(map(RAT, p)) for p in h] for h in self.holes]
        self._validate()
        self._edges = None
        self._vertices = None
        self._bbox = None
        self._area = None

    def _validate(self):
        if len(self.outer) < 3:
            raise InvalidInputError("outer ring needs at least 3 vertices")
        if not ring_is_simple(self.outer):
            raise InvalidInputError("outer ring is not simple")
        if ring_area(self.outer) <= 0:
            raise InvalidInputError("outer ring must be counterclockwise")
        for h in self.holes:
            if len(h) < 3 or not ring_is_simple(h):
                raise InvalidInputError("hole ring is not simple")
            if ring_area(h) >= 0:
                raise InvalidInputError("hole rings must be clockwise")
            for p in h:
                if locate_in_ring(p, self.outer) != INTERIOR:
                    raise InvalidInputError("holes must lie strictly inside the outer ring")
        for i, h1 in enumerate(self.holes):
            for h2 in self.holes[i + 1 :]:
                for p in h1:
                    if locate_in_ring(p, h2) != EXTERIOR:
                        raise InvalidInputError("holes must be pairwise disjoint")
                for a_idx in range(len(h1)):
                    a, b = h1[a_idx], h1[(a_idx + 1) % len(h1)]
                    for c_idx in range(len(h2)):
                        c, d = h2[c_idx], h2[(c_idx + 1) % len(h2)]
                        if segment_intersect(a, b, c, d)[0] != "empty":
                            raise InvalidInputError("holes must be pairwise disjoint")

    # -- derived, cached ---------------------------------------------------
    @property
    def rings(self):
        return [self.outer] + self.holes

    @property
    def vertices(self):
        if self._vertices is None:
            self._vertices = [p for ring in self.rings for p in ring]
        return self._vertices

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def h(self) -> int:
        return len(self.holes)

    @property
    def edges(self):
        """All boundary edges, interior on the left."""
        if self._edges is None:
            out = []
            for ring in self.rings:
                m = len(ring)
                for i in range(m):
                    out.append((ring[i], ring[(i + 1) % m]))
            self._edges = out
        return self._edges

    @property
    def bbox(self):
        if self._bbox is None:
            xs = [p[0] for p in self.outer]
            ys = [p[1] for p in self.outer]
            self._bbox = (min(xs), min(ys), max(xs), max(ys))
        return self._bbox

    def area(self):
        if self._area is None:
            a = ring_area(self.outer)
            for h in self.holes:
                a += ring_area(h)  # holes are CW: negative
            self._area = a
        return self._area

    def diameter_bound(self):
        """Bounding-box width+height: D <= bound <= sqrt(2)*D, always rational."""
        x0, y0, x1, y1 = self.bbox
        return (x1 - x0) + (y1 - y0)

    def locate(self, p: Point) -> str:
        """Classify p against the closed region (holes removed)."""
        p = (RAT(p[0]), RAT(p[1]))
        where = locate_in_ring(p, self.outer)
        if where != INTERIOR:
            return where
        for h in self.holes:
            inner = locate_in_ring(p, h)
            if inner == BOUNDARY:
                return BOUNDARY
            if inner == INTERIOR:
                return EXTERIOR
        return INTERIOR

    def max_bit_length(self) -> int:
        return max(max(bit_length(p[0]), bit_length(p[1])) for p in self.vertices)

    def __hash__(self):
        return hash((tuple(self.outer), tuple(tuple(h) for h in self.holes)))

    def __eq__(self, other):
        return (
            isinstance(other, PolygonWithHoles)
            and self.outer == other.outer
            and self.holes == other.holes
        )


def locate(p: Point, poly: PolygonWithHoles) -> str:
    return poly.locate(p)


def diameter_bound(poly: PolygonWithHoles):
    return poly.diameter_bound()


def fan_triangles(ring: Ring):
    """Fan triangulation of a convex ring from its lexicographically smallest
    vertex; degenerate (zero-area) triangles are dropped."""
    if len(ring) < 3:
        return []
    k = min(range(len(ring)), key=lambda i: ring[i])
    rot = ring[k:] + ring[:k]
    tris = []
    for i in range(1, len(rot) - 1):
        t = [rot[0], rot[i], rot[i + 1]]
        if cross(t[0], t[1], t[2]) != 0:
            tris.append(t)
    return tris


def triangulate(cell: Ring):
    """Spec operation: fan triangulation of a convex cell, exact area-preserving."""
    return fan_triangles(cell)
