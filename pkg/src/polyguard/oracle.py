"""The certified maximization oracle over the rounded active region.

Realizes the approximate-max contract: the returned point's exact objective
value is within an additive theta = nu*w(H~)/(2n) of a certified upper bound
on the supremum, which chains into the (1-nu) multiplicative guarantee against
the unrounded maximum.
"""

from __future__ import annotations

from dataclasses import dataclass

from .arrangement import CellComplex
from .errors import InternalInvariantError, InvalidInputError
from .geom import EXTERIOR, RAT, R0, PolygonWithHoles, centroid, fan_triangles, rat_str, ring_area
from .maximize import SearchEngine, _Cell
from .objective import xi_direct
from .rounding import GridSpec, RoundedComplex, round_complex


@dataclass
class OracleCertificate:
    """One oracle call's audited outcome; every field is exact."""

    point: tuple
    achieved: object  # exact rounded-objective value at point
    upper: object  # certified upper bound on sup of the rounded objective
    theta: object
    weight_tilde: object  # w_t(H~_t)
    dropped_area: object  # area(H_t \ H~_t)
    active_area: object
    reused: bool
    nodes_explored: int

    def gap_ok(self) -> bool:
        return self.achieved >= self.upper - self.theta

    def to_json_dict(self):
        return {
            "point": [rat_str(self.point[0]), rat_str(self.point[1])],
            "achieved": rat_str(self.achieved),
            "upper": rat_str(self.upper),
            "theta": rat_str(self.theta),
            "weight_tilde": rat_str(self.weight_tilde),
            "dropped_area": rat_str(self.dropped_area),
            "active_area": rat_str(self.active_area),
            "reused": self.reused,
            "nodes_explored": self.nodes_explored,
        }


class OracleContext:
    """Caches shared across oracle calls on one polygon: base triangulation,
    structure lines, visibility polygons, node statuses and sector views."""

    FRONTIER_CAP = 60_000

    def __init__(self, poly: PolygonWithHoles):
        self.poly = poly
        self.vis_cache = {}
        self.line_cache = {}
        self.status_cache = {}
        self.view_cache = {}
        self.frontier = None
        self._base_nodes = None

    def base_nodes(self):
        if self._base_nodes is None:
            from .arrangement import build_complex

            base = build_complex(self.poly, [])
            tris = []
            for cell in base.cells:
                tris.extend(fan_triangles(cell))
            self._base_nodes = tris
        return self._base_nodes


def kept_from_rounded(rounded: RoundedComplex):
    return [(ring, j, idx) for ring, j, idx in rounded.kept]


def _dyadic_round(x, j: int):
    scale = 1 << j
    num = x.numerator * 2 * scale + x.denominator
    den = 2 * x.denominator
    return RAT(num // den, scale)


def _snap_certified(poly, kept, eps, point, floor_value, vis_cache):
    """Coarsest dyadic rounding of `point` whose exact value still clears the
    certificate floor; None if the point already has short coordinates."""
    from .geom import bit_length

    if max(bit_length(point[0]), bit_length(point[1])) <= 16:
        return None
    for j in range(0, 48):
        q = (_dyadic_round(point[0], j), _dyadic_round(point[1], j))
        if q == point:
            return None
        if poly.locate(q) == EXTERIOR:
            continue
        val = xi_direct(poly, kept, eps, q, vis_cache=vis_cache)
        if val >= floor_value:
            return q, val
    return None


def active_as_kept(complex_: CellComplex, T: int):
    """The unrounded active region in kept-cell form, for direct evaluation."""
    return [
        (cell, len(lab), i)
        for i, (cell, lab) in enumerate(zip(complex_.cells, complex_.labels))
        if len(lab) < T
    ]


def max_oracle(
    poly: PolygonWithHoles,
    complex_: CellComplex,
    T: int,
    eps,
    nu,
    grid: GridSpec,
    context: OracleContext | None = None,
    prev_points=(),
    extra_seeds=(),
    max_pops: int = 200_000,
) -> OracleCertificate:
    """Approximately maximize the rounded weighted visible area.

    ``nu`` here is the accuracy of THIS call: the returned point satisfies
    achieved >= upper - theta with theta = nu * w(H~) / n and upper an exact
    upper bound on the supremum of the rounded objective.  The solver invokes
    this with half its own accuracy parameter; chained with the rounding-loss
    bound that yields a (1 - nu_solver)-approximate maximizer of the
    unrounded objective.
    """
    if context is None:
        context = OracleContext(poly)
    rounded = round_complex(complex_, T, grid, poly)
    if not rounded.kept:
        if rounded.active_area > 0:
            raise InternalInvariantError(
                "rounded active region empty while active area positive"
            )
        raise InvalidInputError("oracle called with no active area")
    w_tilde = rounded.weight(eps)
    n = poly.n
    theta = nu * w_tilde / n
    cells = [
        _Cell(ring, j, (1 - eps) ** j, ring_area(ring)) for ring, j, _ in rounded.kept
    ]
    engine = SearchEngine(
        poly,
        cells,
        eps,
        line_cache=context.line_cache,
        status_cache=context.status_cache,
        view_cache=context.view_cache,
    )

    kept = kept_from_rounded(rounded)
    seeds = set()
    for p in prev_points:
        if poly.locate(p) != EXTERIOR:
            seeds.add((RAT(p[0]), RAT(p[1])))
    seeds.update(poly.vertices)
    for p in extra_seeds:
        if poly.locate(p) != EXTERIOR:
            seeds.add((RAT(p[0]), RAT(p[1])))
    heavy = sorted(cells, key=lambda c: (-(c.coef * c.area), c.ring[0]))[:12]
    for c in heavy:
        seeds.add(centroid(c.ring))
    seed_values = {}
    for p in sorted(seeds):
        seed_values[p] = xi_direct(poly, kept, eps, p, vis_cache=context.vis_cache)
        engine.offer(p, seed_values[p])

    if context.frontier is not None:
        engine.import_frontier(context.frontier)
    else:
        for tri in context.base_nodes():
            engine.push(engine.root_node(tri))
    upper = engine.run(theta, max_pops=max_pops)
    frontier = engine.export_frontier()
    context.frontier = frontier if len(frontier) <= context.FRONTIER_CAP else None
    if upper < w_tilde / n:
        raise InternalInvariantError("certified bound fell below the pigeonhole floor")

    # prefer re-choosing an already-used guard whenever it stays certified;
    # keeps the support compact and the arrangements stable across iterations
    chosen = None
    reused = False
    for p in sorted(seeds & {(RAT(a), RAT(b)) for a, b in prev_points}):
        if seed_values[p] >= upper - theta:
            chosen = p
            reused = True
            break
    if chosen is None:
        chosen = engine.best_point
    achieved = seed_values.get(chosen)
    if achieved is None:
        achieved = xi_direct(poly, kept, eps, chosen, vis_cache=context.vis_cache)
    if not reused:
        # bit-length control: the coarsest nearby dyadic point that stays
        # certified replaces the raw search point, so coordinates never grow
        # with the iteration count and repeated optima snap to the same spot
        snapped = _snap_certified(
            poly, kept, eps, chosen, upper - theta, context.vis_cache
        )
        if snapped is not None:
            chosen, achieved = snapped
    if achieved < upper - theta:
        raise InternalInvariantError(
            f"certificate gap violated: {achieved} < {upper} - {theta}"
        )
    # with nu = nu_solver/2 this is the (nu_s/(2*(1-nu_s/2))) * U rounding cap
    claim3_cap = (nu / (1 - nu)) * upper
    if rounded.dropped_area > claim3_cap:
        raise InternalInvariantError(
            "rounding loss exceeded its certified fraction of the maximum"
        )
    return OracleCertificate(
        point=chosen,
        achieved=achieved,
        upper=upper,
        theta=theta,
        weight_tilde=w_tilde,
        dropped_area=rounded.dropped_area,
        active_area=rounded.active_area,
        reused=reused,
        nodes_explored=engine.pops,
    )
