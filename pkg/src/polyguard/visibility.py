"""Point-to-point visibility and exact visibility polygons.

Visibility is closed: a segment that grazes the boundary or passes exactly
through a reflex vertex still counts.  The visibility polygon is built by an
exact angular sweep; all comparisons are cross-product based, no angles are
ever evaluated numerically.
"""

from __future__ import annotations

from .errors import InvalidInputError, InternalInvariantError
from .geom import (
    EXTERIOR,
    RAT,
    R0,
    PolygonWithHoles,
    cross,
    dedup_ring,
    direction_key,
    locate_in_ring,
    on_segment,
    ring_area,
    segment_intersect,
)


def _cross2(u, v):
    return u[0] * v[1] - u[1] * v[0]


def _dot2(u, v):
    return u[0] * v[0] + u[1] * v[1]


def sees(poly: PolygonWithHoles, p, q) -> bool:
    """True iff the closed segment pq stays inside the closed region.

    Endpoints must not be exterior (InvalidInputError otherwise).
    """
    p = (RAT(p[0]), RAT(p[1]))
    q = (RAT(q[0]), RAT(q[1]))
    if poly.locate(p) == EXTERIOR or poly.locate(q) == EXTERIOR:
        raise InvalidInputError("sees() endpoints must lie in the closed polygon")
    if p == q:
        return True
    pxlo, pxhi = min(p[0], q[0]), max(p[0], q[0])
    pylo, pyhi = min(p[1], q[1]), max(p[1], q[1])
    touched = []
    for a, b in poly.edges:
        if max(a[0], b[0]) < pxlo or min(a[0], b[0]) > pxhi:
            continue
        if max(a[1], b[1]) < pylo or min(a[1], b[1]) > pyhi:
            continue
        d1 = cross(p, q, a)
        d2 = cross(p, q, b)
        if (d1 > 0 and d2 > 0) or (d1 < 0 and d2 < 0):
            continue
        d3 = cross(a, b, p)
        d4 = cross(a, b, q)
        if ((d1 > 0) != (d2 > 0)) and d1 != 0 and d2 != 0 and ((d3 > 0) != (d4 > 0)) and d3 != 0 and d4 != 0:
            return False  # proper transversal crossing of a wall
        kind, val = segment_intersect(p, q, a, b)
        if kind == "point":
            touched.append(val)
        elif kind == "overlap":
            touched.extend(val)
    if not touched:
        mid = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
        return poly.locate(mid) != EXTERIOR
    # split pq at all boundary contacts; every open piece must stay inside
    dx, dy = q[0] - p[0], q[1] - p[1]
    axis = 0 if abs(dx) >= abs(dy) else 1
    den = (q[axis] - p[axis])
    params = {R0, RAT(1)}
    for pt in touched:
        params.add((pt[axis] - p[axis]) / den)
    ts = sorted(params)
    for t0, t1 in zip(ts, ts[1:]):
        tm = (t0 + t1) / 2
        mid = (p[0] + tm * dx, p[1] + tm * dy)
        if poly.locate(mid) == EXTERIOR:
            return False
    return True


# ---------------------------------------------------------------------------
# visibility polygon
# ---------------------------------------------------------------------------


def _feasible_cone(poly: PolygonWithHoles, q):
    """Directions pointing into the closed region from q.

    Returns None for interior q (full circle), else a CCW pair (start, end).
    """
    if poly.locate(q) == INTERIOR_FLAG:
        return None
    # find the ring feature containing q
    for ring in poly.rings:
        m = len(ring)
        for i in range(m):
            if ring[i] == q:
                prev, nxt = ring[(i - 1) % m], ring[(i + 1) % m]
                return (
                    (nxt[0] - q[0], nxt[1] - q[1]),
                    (prev[0] - q[0], prev[1] - q[1]),
                )
        for i in range(m):
            a, b = ring[i], ring[(i + 1) % m]
            if q != a and q != b and on_segment(q, a, b):
                # interior of edge ab; interior of the polygon lies to the left
                return ((b[0] - q[0], b[1] - q[1]), (a[0] - q[0], a[1] - q[1]))
    raise InternalInvariantError("boundary point not found on any ring")


INTERIOR_FLAG = "interior"


def _rotate_by_conjugate(d, s):
    """Rotate direction d by -angle(s); scaling-free, exact."""
    return (_dot2(s, d), _cross2(s, d))


def _in_ccw_cone(start, end, d) -> bool:
    """Is direction d inside the CCW cone from start to end (closed)?"""
    c_se = _cross2(start, end)
    if c_se > 0:
        return _cross2(start, d) >= 0 and _cross2(d, end) >= 0
    if c_se == 0:
        if _dot2(start, end) > 0:
            # degenerate zero-angle cone
            return _cross2(start, d) == 0 and _dot2(start, d) > 0
        return _cross2(start, d) >= 0 or (_cross2(start, d) == 0 and _dot2(start, d) > 0)
    # reflex cone: complement is the open CCW cone from end to start
    return not (_cross2(end, d) > 0 and _cross2(d, start) > 0)


def _first_hit(poly: PolygonWithHoles, q, u):
    """First boundary contact strictly ahead along ray q + t*u.

    Returns (t, point, edge).  The ray is assumed non-collinear with every
    edge it meets (guaranteed for sector-representative directions).
    """
    best_t = None
    best = None
    for a, b in poly.edges:
        eb = (b[0] - a[0], b[1] - a[1])
        den = _cross2(u, eb)
        if den == 0:
            continue
        aq = (a[0] - q[0], a[1] - q[1])
        t = _cross2(aq, eb) / den
        if t <= 0:
            continue
        s = _cross2(aq, u) / den
        if s < 0 or s > 1:
            continue
        if best_t is None or t < best_t:
            best_t = t
            best = ((q[0] + t * u[0], q[1] + t * u[1]), (a, b))
    if best_t is None:
        raise InternalInvariantError("ray escaped the polygon without a hit")
    return best_t, best[0], best[1]


def _ray_line_point(q, u, a, b):
    """Intersection of ray q + t*u with the supporting line of ab."""
    eb = (b[0] - a[0], b[1] - a[1])
    den = _cross2(u, eb)
    if den == 0:
        raise InternalInvariantError("sector boundary ray parallel to its hit edge")
    aq = (a[0] - q[0], a[1] - q[1])
    t = _cross2(aq, eb) / den
    return (q[0] + t * u[0], q[1] + t * u[1])


def _split_wide_sectors(dirs):
    """Insert perpendicular directions until every CCW gap is < pi."""
    out = list(dirs)
    changed = True
    while changed:
        changed = False
        nxt = []
        n = len(out)
        for i in range(n):
            d1, d2 = out[i], out[(i + 1) % n]
            nxt.append(d1)
            if n == 1 or _cross2(d1, d2) < 0 or (_cross2(d1, d2) == 0 and _dot2(d1, d2) <= 0):
                nxt.append((-d1[1], d1[0]))
                changed = True
        out = nxt
    return out


def _between(d1, d2):
    """Rational direction strictly inside a CCW sector of angle < pi."""
    n1 = abs(d1[0]) + abs(d1[1])
    n2 = abs(d2[0]) + abs(d2[1])
    return (d1[0] * n2 + d2[0] * n1, d1[1] * n2 + d2[1] * n1)


def visibility_polygon(poly: PolygonWithHoles, q):
    """Exact visibility polygon V(q) as a CCW ring.

    Works for interior, boundary-edge, and vertex viewpoints (including reflex
    vertices).  Zero-width antenna degeneracies are dropped; they carry no
    area and no downstream meaning for coverage.
    """
    q = (RAT(q[0]), RAT(q[1]))
    if poly.locate(q) == EXTERIOR:
        raise InvalidInputError("viewpoint must lie in the closed polygon")
    cone = None if poly.locate(q) == INTERIOR_FLAG else _feasible_cone(poly, q)

    dirs = []
    seen = set()
    for v in poly.vertices:
        if v == q:
            continue
        d = (v[0] - q[0], v[1] - q[1])
        if cone is not None and not _in_ccw_cone(cone[0], cone[1], d):
            continue
        key = _canon_dir(d)
        if key not in seen:
            seen.add(key)
            dirs.append(d)

    if cone is None:
        dirs.sort(key=direction_key)
        dirs = _split_wide_sectors(dirs)
        sectors = [(dirs[i], dirs[(i + 1) % len(dirs)]) for i in range(len(dirs))]
    else:
        start, end = cone
        def ccw_from_start(d):
            return direction_key(_rotate_by_conjugate(d, start))
        dirs = [d for d in dirs if _canon_dir(d) not in (_canon_dir(start), _canon_dir(end))]
        dirs.sort(key=ccw_from_start)
        chain = [start] + dirs + [end]
        # split any >= pi gaps (reflex vertices / straight edges)
        full = []
        for i in range(len(chain) - 1):
            d1, d2 = chain[i], chain[i + 1]
            full.append(d1)
            while _cross2(d1, d2) < 0 or (_cross2(d1, d2) == 0 and _dot2(d1, d2) <= 0):
                d1 = (-d1[1], d1[0])
                full.append(d1)
        full.append(chain[-1])
        sectors = [(full[i], full[i + 1]) for i in range(len(full) - 1)]

    ring = [] if cone is None else [q]
    for d1, d2 in sectors:
        if _cross2(d1, d2) == 0 and _dot2(d1, d2) > 0:
            continue  # empty sector (coincident directions)
        rep = _between(d1, d2)
        _, _, edge = _first_hit(poly, q, rep)
        p_start = _ray_line_point(q, d1, *edge)
        p_end = _ray_line_point(q, d2, *edge)
        for pt in (p_start, p_end):
            if not ring or ring[-1] != pt:
                ring.append(pt)
    out = dedup_ring(ring)
    from .geom import remove_collinear

    out = remove_collinear(out) if len(out) >= 3 else out
    if len(out) < 3 or ring_area(out) <= 0:
        raise InternalInvariantError("degenerate visibility polygon")
    return out


def _canon_dir(d):
    x, y = d
    if x == 0:
        return (0, 1 if y > 0 else -1)
    if y == 0:
        return (1 if x > 0 else -1, 0)
    s = abs(x)
    return (x / s, y / s)


def star_fan_triangles(vis_ring, q):
    """Fan triangles of a star-shaped ring about its kernel point q."""
    n = len(vis_ring)
    tris = []
    for i in range(n):
        a, b = vis_ring[i], vis_ring[(i + 1) % n]
        if cross(q, a, b) != 0:
            tris.append((q, a, b))
    return tris
