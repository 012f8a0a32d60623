"""Grid rounding of the active arrangement: bit-length control for the oracle.

Large active cells are snapped inward to a power-of-two grid; small active
cells are dropped.  The exact area of everything lost is tracked, and the
guarantees (every large cell holds a grid point; the lost area stays below the
certified fraction of the maximum) are asserted, never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InternalInvariantError, InvalidInputError
from .geom import (
    EXTERIOR,
    RAT,
    R0,
    PolygonWithHoles,
    centroid,
    convex_hull,
    floor_log2,
    locate_in_ring,
    pow2,
    ring_area,
    ring_perimeter_bound,
)
from .arrangement import CellComplex


@dataclass(frozen=True)
class GridSpec:
    """Infinite grid of cell size rho = 2**exponent."""

    exponent: int
    rho: object
    bound: object  # the upper bracket value; rho <= bound <= 2*rho

    def snap_floor(self, x):
        """Largest grid coordinate <= x."""
        q = x / self.rho
        k = q.numerator // q.denominator
        return k * self.rho


def grid_spec(
    poly: PolygonWithHoles, n: int, h: int, eps, delta, nu, T: int, r_max: int
) -> GridSpec:
    """The unique power-of-two cell size in the rounding bracket.

    bound = nu*delta*(1-eps)^T*area(H) / (16*(1-nu/2)*Dbound*n*r_max); the
    returned rho is the largest power of two <= bound, so rho <= bound < 2*rho.
    """
    if not (0 < eps < 1 and 0 < delta < 1 and 0 < nu < 1):
        raise InvalidInputError("eps, delta, nu must lie in (0,1)")
    if T < 1 or r_max < 1:
        raise InvalidInputError("T and r_max must be >= 1")
    bound = (
        nu
        * delta
        * (1 - eps) ** T
        * poly.area()
        / (16 * (1 - nu / RAT(2)) * poly.diameter_bound() * n * r_max)
    )
    exp = floor_log2(bound)
    rho = pow2(exp)
    assert rho <= bound <= 2 * rho
    return GridSpec(exp, rho, bound)


@dataclass
class RoundedComplex:
    """Kept large active cells, snapped to the grid, plus exact loss accounting."""

    kept: list  # (snapped ring, exponent |label|, source cell index)
    dropped_area: object  # exact area of H_t minus the union of kept cells
    active_area: object
    grid: GridSpec

    def weight(self, eps):
        """w_t(H~_t): decayed weight of the kept rounded cells."""
        return sum(((1 - eps) ** j * ring_area(r) for r, j, _ in self.kept), R0)


def _nearest_grid_point_in_cell(v, cell, grid: GridSpec, max_ring: int = 64):
    """Nearest grid point inside the closed cell (ties: lexicographic)."""
    rho = grid.rho
    bx = grid.snap_floor(v[0])
    by = grid.snap_floor(v[1])
    best = None
    for ring_idx in range(max_ring + 1):
        if best is not None:
            # points in farther rings are at distance >= (ring_idx-1)*rho
            if best[0] <= ((ring_idx - 1) * rho) ** 2:
                break
        candidates = []
        if ring_idx == 0:
            candidates = [(bx, by), (bx + rho, by), (bx, by + rho), (bx + rho, by + rho)]
        else:
            lo_x, hi_x = bx - ring_idx * rho, bx + (ring_idx + 1) * rho
            lo_y, hi_y = by - ring_idx * rho, by + (ring_idx + 1) * rho
            steps = 2 * ring_idx + 2
            for k in range(steps):
                candidates.append((lo_x + k * rho, lo_y))
                candidates.append((lo_x + k * rho, hi_y))
            for k in range(1, steps - 1):
                candidates.append((lo_x, lo_y + k * rho))
                candidates.append((hi_x, lo_y + k * rho))
        for g in candidates:
            if locate_in_ring(g, cell) != EXTERIOR:
                d2 = (g[0] - v[0]) ** 2 + (g[1] - v[1]) ** 2
                cand = (d2, g)
                if best is None or cand < best:
                    best = cand
    return None if best is None else best[1]


def snap_cell(cell, grid: GridSpec):
    """Inner grid approximation: convex hull of per-vertex nearest grid points."""
    snaps = []
    missed = False
    for v in cell:
        g = _nearest_grid_point_in_cell(v, cell, grid)
        if g is None:
            missed = True
        else:
            snaps.append(g)
    if missed or not snaps:
        # thin-corner fallback: try interior anchors before declaring failure
        m = len(cell)
        anchors = [centroid(cell)] + [
            ((cell[i][0] + cell[(i + 1) % m][0]) / 2, (cell[i][1] + cell[(i + 1) % m][1]) / 2)
            for i in range(m)
        ]
        for a in anchors:
            g = _nearest_grid_point_in_cell(a, cell, grid)
            if g is not None:
                snaps.append(g)
    if not snaps:
        raise InternalInvariantError(
            "large cell contains no reachable grid point (Claim-2 style violation)"
        )
    hull = convex_hull(snaps)
    return hull


def round_complex(
    complex_: CellComplex, T: int, grid: GridSpec, poly: PolygonWithHoles
) -> RoundedComplex:
    """Drop small active cells, snap large ones inward to the grid."""
    threshold = 4 * grid.rho * poly.diameter_bound()
    kept = []
    dropped = R0
    active = R0
    for idx, (cell, lab) in enumerate(zip(complex_.cells, complex_.labels)):
        if len(lab) >= T:
            continue
        area = ring_area(cell)
        active += area
        if area < threshold:
            dropped += area
            continue
        snapped = snap_cell(cell, grid)
        if len(snapped) < 3:
            dropped += area
            continue
        s_area = ring_area(snapped)
        if s_area <= 0:
            dropped += area
            continue
        for p in snapped:
            if locate_in_ring(p, cell) == EXTERIOR:
                raise InternalInvariantError("snapped cell escaped its source")
        dropped += area - s_area
        kept.append((snapped, len(lab), idx))
    return RoundedComplex(kept, dropped, active, grid)


def truncation_bounds_hold(complex_: CellComplex, rounded: RoundedComplex) -> bool:
    """Per-cell check from the rounding analysis: area(R \\ R~) <= 2*rho*perim(R)."""
    rho = rounded.grid.rho
    for snapped, _, idx in rounded.kept:
        cell = complex_.cells[idx]
        defect = ring_area(cell) - ring_area(snapped)
        if defect > 2 * rho * ring_perimeter_bound(cell):
            return False
    return True
