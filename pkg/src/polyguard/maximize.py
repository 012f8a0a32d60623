"""Certified branch-and-bound maximization of the rounded objective.

Nodes are triangles of candidate viewpoints.  A node is first bounded
cheaply (full-visibility and single-wall-block tests), then split along
structure lines until its combinatorics freeze, then bounded by the exact
relaxed-wedge bounds of its sector structure and bisected until the global
gap closes below the requested accuracy.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

from .errors import InternalInvariantError
from .geom import (
    EXTERIOR,
    RAT,
    R0,
    PolygonWithHoles,
    centroid,
    clip_convex,
    convex_hull,
    cross,
    dist2,
    fan_triangles,
    locate_in_ring,
    on_segment,
    ring_area,
    segment_intersect,
)
from .objective import (
    CellView,
    cell_structure_lines,
    cell_view,
    clip_cross,
    line_crosses_triangle,
    vertex_pair_lines,
)

FULL, ZERO, CRUDE, VIEW = "full", "zero", "crude", "view"


@dataclass
class _Cell:
    ring: list
    exponent: int
    coef: object
    area: object
    lines: list | None = None  # structure lines, computed lazily
    key: int = -1  # interned ring id for cross-call caches


@dataclass
class _Node:
    nid: int
    tri: list
    statuses: list  # per cell: (kind, payload)
    contribs: list  # per cell: coef * cell bound, monotone under shrinking
    bound: object
    fresh: bool  # statuses/bound inherited from the parent, not yet recomputed
    frozen: bool = False
    freeze_tried: bool = False
    offend: object = None  # a structure line blocking a cell freeze


def _hull_clean(poly: PolygonWithHoles, hull) -> bool:
    """True iff the closed hull lies inside H with no boundary edge poking in.

    Then every pair of points in the hull sees each other.
    """
    if len(hull) < 3:
        return False
    if poly.locate(centroid(hull)) == EXTERIOR:
        return False
    hx0 = min(p[0] for p in hull)
    hx1 = max(p[0] for p in hull)
    hy0 = min(p[1] for p in hull)
    hy1 = max(p[1] for p in hull)
    m = len(hull)
    for a, b in poly.edges:
        if max(a[0], b[0]) < hx0 or min(a[0], b[0]) > hx1:
            continue
        if max(a[1], b[1]) < hy0 or min(a[1], b[1]) > hy1:
            continue
        # clip segment ab against the hull; reject if a positive piece or a
        # strictly interior touch survives
        t0, t1 = R0, RAT(1)
        inside = True
        for i in range(m):
            p, q = hull[i], hull[(i + 1) % m]
            fa = cross(p, q, a)
            fb = cross(p, q, b)
            # keep f >= 0 side (CCW hull interior)
            if fa < 0 and fb < 0:
                inside = False
                break
            if fa < 0 or fb < 0:
                t = fa / (fa - fb)
                if fa < 0:
                    t0 = max(t0, t)
                else:
                    t1 = min(t1, t)
                if t0 > t1:
                    inside = False
                    break
        if not inside:
            continue
        if t1 > t0:
            tm = (t0 + t1) / 2
            mid = (a[0] + tm * (b[0] - a[0]), a[1] + tm * (b[1] - a[1]))
            if _strictly_inside_hull(mid, hull):
                return False
        else:
            pt = (a[0] + t0 * (b[0] - a[0]), a[1] + t0 * (b[1] - a[1]))
            if _strictly_inside_hull(pt, hull):
                return False
    return True


def _strictly_inside_hull(p, hull) -> bool:
    m = len(hull)
    for i in range(m):
        if cross(hull[i], hull[(i + 1) % m], p) <= 0:
            return False
    return True


def _edge_blocks(poly: PolygonWithHoles, tri, ring, hull) -> bool:
    """True iff one wall pins the cell's visible-from-the-triangle area to 0.

    Viewpoints must be strictly off the wall line (a viewpoint at a wall
    endpoint could peek around it); crossings at wall endpoints only admit
    measure-zero grazing pencils, so the closed wall segment suffices.
    """
    for ea, eb in poly.edges:
        ex, ey = eb[0] - ea[0], eb[1] - ea[1]
        ax_, ay_ = ea
        sgn = None
        ok = True
        for v in tri:
            s = ex * (v[1] - ay_) - ey * (v[0] - ax_)
            if s > 0:
                if sgn == -1:
                    ok = False
                    break
                sgn = 1
            elif s < 0:
                if sgn == 1:
                    ok = False
                    break
                sgn = -1
            else:
                ok = False
                break
        if not ok or sgn is None:
            continue
        for v in ring:
            s = ex * (v[1] - ay_) - ey * (v[0] - ax_)
            if (s > 0 and sgn == 1) or (s < 0 and sgn == -1):
                ok = False
                break
        if not ok:
            continue
        line_pts = []
        m = len(hull)
        for i in range(m):
            p, q = hull[i], hull[(i + 1) % m]
            fp, fq = cross(ea, eb, p), cross(ea, eb, q)
            if fp == 0:
                line_pts.append(p)
            if (fp > 0) != (fq > 0) and fp != 0 and fq != 0:
                t = fp / (fp - fq)
                line_pts.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
        if line_pts and all(on_segment(p, ea, eb) for p in line_pts):
            return True
    return False


def _shadow_region_constraints(tri, ea, eb, far_keep):
    """Half-planes cutting out the part of the plane hidden from every vertex
    of the triangle behind the wall ea--eb (cross-sign constraint triples)."""
    cons = [(ea, eb, far_keep)]
    for t in tri:
        k1 = _sgn(cross(t, ea, eb))
        k2 = _sgn(cross(t, eb, ea))
        cons.append((t, ea, k1))
        cons.append((t, eb, k2))
    return cons


def _sgn(v):
    return 1 if v > 0 else (-1 if v < 0 else 0)


def _clip_many(ring, constraints):
    piece = ring
    for o, a, keep in constraints:
        piece = clip_cross(piece, o, a, keep)
        if len(piece) < 3:
            return []
    return piece


def shadow_bound(poly: PolygonWithHoles, tri, ring, ring_area_val):
    """Upper bound on area(V(q) ∩ ring) for every q in the triangle.

    Points of the cell hidden from all of the triangle behind one wall can
    never contribute; the two largest such shadows are removed exactly
    (their union via inclusion-exclusion).  Always >= the true supremum.
    """
    shadows = []
    for ea, eb in poly.edges:
        ex, ey = eb[0] - ea[0], eb[1] - ea[1]
        ax_, ay_ = ea
        far = None
        for v in tri:
            s = ex * (v[1] - ay_) - ey * (v[0] - ax_)
            if s > 0:
                if far == 1:
                    far = 0
                    break
                far = -1
            elif s < 0:
                if far == -1:
                    far = 0
                    break
                far = 1
            else:
                far = 0
                break
        if not far:
            continue
        # some cell vertex must lie on the far side or nothing is hidden
        if far == -1:
            if all(ex * (v[1] - ay_) - ey * (v[0] - ax_) >= 0 for v in ring):
                continue
        else:
            if all(ex * (v[1] - ay_) - ey * (v[0] - ax_) <= 0 for v in ring):
                continue
        cons = _shadow_region_constraints(tri, ea, eb, far)
        piece = _clip_many(ring, cons)
        if len(piece) >= 3:
            a = abs(ring_area(piece))
            if a > 0:
                shadows.append((a, cons))
    if not shadows:
        return ring_area_val
    shadows.sort(key=lambda s: -s[0])
    if len(shadows) == 1:
        union = shadows[0][0]
    else:
        (a1, c1), (a2, c2) = shadows[0], shadows[1]
        both = _clip_many(ring, c1 + c2)
        inter = abs(ring_area(both)) if len(both) >= 3 else R0
        union = a1 + a2 - inter
    return ring_area_val - union


class SearchEngine:
    """Shared branch-and-bound machinery for the oracle and maximize_triangle."""

    def __init__(
        self,
        poly: PolygonWithHoles,
        cells,
        eps,
        line_cache=None,
        status_cache=None,
        view_cache=None,
    ):
        self.poly = poly
        self.cells = cells
        self.eps = eps
        self.global_lines = vertex_pair_lines(poly.vertices)
        self.line_cache = line_cache if line_cache is not None else {}
        self.status_cache = status_cache if status_cache is not None else {}
        self.view_cache = view_cache if view_cache is not None else {}
        registry = self.status_cache.setdefault("__rings__", {})
        for c in self.cells:
            rk = tuple(c.ring)
            c.key = registry.setdefault(rk, len(registry))
        self.counter = itertools.count()
        self.heap = []
        self.best_value = None
        self.best_point = None
        self.pops = 0
        self.done = []  # exactly-resolved nodes kept for frontier export

    # -- incumbents --------------------------------------------------------
    def offer(self, point, value):
        if self.best_value is None or value > self.best_value or (
            value == self.best_value and point < self.best_point
        ):
            self.best_value = value
            self.best_point = point

    # -- statuses ----------------------------------------------------------
    def _cell_lines(self, cell: _Cell):
        if cell.lines is None:
            key = tuple(cell.ring)
            if key not in self.line_cache:
                self.line_cache[key] = cell_structure_lines(self.poly, cell.ring)
            cell.lines = self.line_cache[key]
        return cell.lines

    def _quick_status(self, tri, cell: _Cell):
        key = (tri[0], tri[1], tri[2], cell.key)
        hit = self.status_cache.get(key)
        if hit is not None:
            return hit
        hull = convex_hull(list(tri) + list(cell.ring))
        if _hull_clean(self.poly, hull):
            st = (FULL, cell.area)
        elif _edge_blocks(self.poly, tri, cell.ring, hull):
            st = (ZERO, R0)
        else:
            st = (CRUDE, shadow_bound(self.poly, tri, cell.ring, cell.area))
        self.status_cache[key] = st
        return st

    def _status_bound(self, tri, status, cell: _Cell):
        kind, payload = status
        if kind == VIEW:
            return payload.bound_over(tri)
        return payload

    # -- node lifecycle ----------------------------------------------------
    def root_node(self, tri):
        statuses = [(CRUDE, c.area) for c in self.cells]
        contribs = [c.coef * c.area for c in self.cells]
        bound = sum(contribs, R0)
        return _Node(next(self.counter), list(tri), statuses, contribs, bound, fresh=True)

    def _child(self, tri, parent: _Node):
        return _Node(
            next(self.counter),
            list(tri),
            list(parent.statuses),
            list(parent.contribs),
            parent.bound,
            fresh=True,
        )

    def push(self, node: _Node):
        heapq.heappush(self.heap, (-node.bound, node.nid, node))

    def value_at(self, node: _Node, q):
        total = R0
        for st, c in zip(node.statuses, self.cells):
            kind, payload = st
            if kind == FULL:
                total += c.coef * c.area
            elif kind == VIEW:
                total += c.coef * payload.value_at(q)
            elif kind == CRUDE:
                raise InternalInvariantError("evaluating an unfrozen node")
        return total

    def _refresh(self, node: _Node, threshold):
        """Recompute per-cell bounds for this node's own triangle, largest
        inherited contribution first, and stop early once the node provably
        cannot beat the incumbent (per-cell bounds only shrink on subsets)."""
        order = sorted(range(len(self.cells)), key=lambda i: (-node.contribs[i], i))
        rest = sum(node.contribs, R0)
        total = R0
        for i in order:
            rest -= node.contribs[i]
            st = node.statuses[i]
            c = self.cells[i]
            if st[0] == CRUDE:
                st = self._quick_status(node.tri, c)
                node.statuses[i] = st
            cval = c.coef * self._status_bound(node.tri, st, c)
            if cval > node.contribs[i]:
                cval = node.contribs[i]
            node.contribs[i] = cval
            total += cval
            if total + rest <= threshold:
                node.bound = total + rest
                node.fresh = False
                return
        node.bound = min(node.bound, total)
        node.fresh = False
        node.frozen = all(st[0] != CRUDE for st in node.statuses)
        if (
            node.frozen
            and node.bound > (self.best_value if self.best_value is not None else R0)
            and not all(st[0] in (FULL, ZERO) for st in node.statuses)
        ):
            q0 = centroid(node.tri)
            self.offer(q0, self.value_at(node, q0))

    def _global_crossing(self, node: _Node):
        for a, b in self.global_lines:
            if line_crosses_triangle(a, b, node.tri):
                return (a, b)
        return None

    def _try_freeze(self, node: _Node):
        """Upgrade crude cells whose structure lines miss the node to exact
        sector views; record one offending line otherwise."""
        q0 = centroid(node.tri)
        offend = None
        statuses = []
        for st, c in zip(node.statuses, self.cells):
            if st[0] != CRUDE:
                statuses.append(st)
                continue
            line = None
            for a, b in self._cell_lines(c):
                if line_crosses_triangle(a, b, node.tri):
                    line = (a, b)
                    break
            if line is not None:
                if offend is None:
                    offend = line
                statuses.append(st)
            elif locate_in_ring(q0, c.ring) != EXTERIOR:
                statuses.append((FULL, c.area))
            else:
                vkey = (q0, c.key)
                sectors = self.view_cache.get(vkey)
                if sectors is None:
                    sectors = cell_view(self.poly, c.ring, c.exponent, c.coef, q0).sectors
                    self.view_cache[vkey] = sectors
                view = CellView(c.ring, c.exponent, c.coef, c.area, "sectors", sectors)
                statuses.append((VIEW, view))
        node.statuses = statuses
        node.offend = offend
        node.freeze_tried = True
        node.frozen = all(st[0] != CRUDE for st in statuses)
        bound = R0
        for i, (st, c) in enumerate(zip(node.statuses, self.cells)):
            cval = c.coef * self._status_bound(node.tri, st, c)
            if cval > node.contribs[i]:
                cval = node.contribs[i]
            node.contribs[i] = cval
            bound += cval
        node.bound = min(node.bound, bound)
        if node.frozen and (self.best_value is None or node.bound > self.best_value):
            self.offer(q0, self.value_at(node, q0))

    def _split_by_line(self, node: _Node, line):
        a, b = line
        children = []
        for keep in (1, -1):
            piece = clip_cross(node.tri, a, b, keep)
            if len(piece) < 3 or ring_area(piece) == 0:
                continue
            for tri in fan_triangles(piece):
                children.append(self._child(tri, node))
        return children

    def _bisect(self, node: _Node):
        tri = node.tri
        lens = [dist2(tri[i], tri[(i + 1) % 3]) for i in range(3)]
        i = max(range(3), key=lambda k: (lens[k], -k))
        a, b, c = tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]
        mid = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
        out = []
        for t in ([a, mid, c], [mid, b, c]):
            if cross(t[0], t[1], t[2]) != 0:
                out.append(self._child(t, node))
        return out

    # -- main loop ---------------------------------------------------------
    def run(self, theta, max_pops=200_000):
        """Best-first refinement until top bound <= incumbent + theta.

        Returns the certified upper bound (max of all remaining node bounds).
        """
        if self.best_value is None:
            raise InternalInvariantError("search started without an incumbent")
        while self.heap:
            self.pops += 1
            if self.pops > max_pops:
                raise InternalInvariantError("branch-and-bound node budget exceeded")
            neg_bound, _, node = heapq.heappop(self.heap)
            bound = -neg_bound
            if bound <= self.best_value + theta:
                self.push(node)  # keep the heap covering H for frontier export
                return bound
            if node.fresh:
                self._refresh(node, self.best_value + theta)
                self.push(node)
                continue
            if not node.frozen:
                gline = self._global_crossing(node)
                if gline is not None:
                    for child in self._split_by_line(node, gline):
                        self.push(child)
                    continue
                if not node.freeze_tried:
                    self._try_freeze(node)
                    self.push(node)
                    continue
                if node.offend is not None:
                    for child in self._split_by_line(node, node.offend):
                        self.push(child)
                    continue
                raise InternalInvariantError("unfrozen node with nothing to refine")
            if all(st[0] in (FULL, ZERO) for st in node.statuses):
                # constant over the node; bound is attained, node is done
                self.offer(min(node.tri), node.bound)
                self.done.append(node)
                continue
            for child in self._bisect(node):
                self.push(child)
        return self.best_value

    # -- warm starting -------------------------------------------------------
    def export_frontier(self):
        """Geometry of the live search tree: (triangle, {ring key: (status,
        weight-free bound)}).  Statuses and bounds are weight-independent, so
        the next call can rescale them instead of re-deriving the tree."""
        out = []
        for _, _, node in self.heap:
            out.append(self._frontier_entry(node))
        for node in self.done:
            out.append(self._frontier_entry(node))
        out.sort(key=lambda e: e[0])
        return out

    def _frontier_entry(self, node: _Node):
        per_ring = {}
        for st, c, contrib in zip(node.statuses, self.cells, node.contribs):
            geo = contrib / c.coef if c.coef != 0 else contrib
            per_ring[c.key] = (st, geo)
        return (tuple(node.tri), per_ring)

    def import_frontier(self, frontier):
        """Rebuild the heap from a previous call's frontier under new weights."""
        for tri, per_ring in frontier:
            statuses = []
            contribs = []
            bound = R0
            for c in self.cells:
                hit = per_ring.get(c.key)
                if hit is None:
                    statuses.append((CRUDE, c.area))
                    contribs.append(c.coef * c.area)
                else:
                    st, geo = hit
                    if geo > c.area:
                        geo = c.area
                    statuses.append(st)
                    contribs.append(c.coef * geo)
                bound += contribs[-1]
            node = _Node(
                next(self.counter), list(tri), statuses, contribs, bound, fresh=False
            )
            node.frozen = all(st[0] != CRUDE for st in statuses)
            self.push(node)


def maximize_triangle(objective, theta):
    """Certified approximate maximization over one frozen triangle.

    Returns (point, exact value at point, certified upper bound) with
    value >= upper - theta.
    """
    if theta <= 0:
        raise InternalInvariantError("theta must be positive")
    cells = [
        _Cell(v.ring, v.exponent, v.coef, v.area) for v in objective.views
    ]
    engine = SearchEngine(objective.poly, cells, objective.eps)
    statuses = [
        (FULL, v.area) if v.kind == "full" else (VIEW, v) for v in objective.views
    ]
    node = _Node(
        next(engine.counter),
        list(objective.triangle),
        statuses,
        [R0] * len(cells),
        R0,
        fresh=False,
        frozen=True,
    )
    bound = R0
    for i, (st, c) in enumerate(zip(statuses, cells)):
        cval = c.coef * engine._status_bound(node.tri, st, c)
        node.contribs[i] = cval
        bound += cval
    node.bound = bound
    q0 = centroid(objective.triangle)
    engine.offer(q0, engine.value_at(node, q0))
    engine.push(node)
    upper = engine.run(theta)
    return engine.best_point, engine.best_value, upper
