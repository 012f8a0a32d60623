"""Baseline guard-placement algorithms used for comparison.

greedy_solve: repeatedly take a point whose visible share of the not-yet-seen
area is within (1-nu) of the best possible, until only a delta-fraction is
unseen. sample_solve: draw a uniform sample, then solve the discrete problem
of guarding the sample by iterative weight doubling over a finite candidate
set.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .arrangement import build_complex
from .errors import InternalInvariantError, InvalidInputError
from .geom import (
    EXTERIOR,
    RAT,
    R0,
    PolygonWithHoles,
    centroid,
    convex_hull,
    pow2,
    ring_area,
)
from .maximize import _edge_blocks, _hull_clean
from .oracle import OracleContext, max_oracle
from .rounding import grid_spec
from .solver import ABS_ITERATION_CAP, active_area
from .visibility import sees

_GREEDY_EPS = RAT(1, 2)  # weights are flat at T=1; only the grid bracket uses it


def greedy_iteration_cap(opt_ub: int, delta, nu) -> int:
    return int(math.ceil(opt_ub * math.log(1 / float(delta)) / (1 - float(nu)) + 1e-9))


def greedy_solve(poly: PolygonWithHoles, delta, nu, opt_ub: int | None = None):
    """Unweighted residual-area greedy: T=1 semantics of the oracle."""
    delta, nu = RAT(delta), RAT(nu)
    if not (0 < delta < 1 and 0 < nu < 1):
        raise InvalidInputError("delta and nu must lie in (0,1)")
    ctx = OracleContext(poly)
    area_h = poly.area()
    n, h = poly.n, poly.h
    cap = greedy_iteration_cap(opt_ub, delta, nu) if opt_ub else None
    guards = []
    residuals = []
    complex_ = build_complex(poly, [], 0, ctx.vis_cache)
    while True:
        residual = active_area(complex_, 1)
        if residual < delta * area_h:
            break
        if len(guards) >= ABS_ITERATION_CAP:
            raise InternalInvariantError("greedy absolute iteration cap exceeded")
        if cap is not None and len(guards) >= cap:
            raise InternalInvariantError(
                f"greedy exceeded its bound: {len(guards)} >= {cap}"
            )
        r_max = max(n * (h + 1) * (len(guards) + 1) ** 2, len(complex_.cells))
        grid = grid_spec(poly, n, h, _GREEDY_EPS, delta, nu, 1, r_max)
        cert = max_oracle(
            poly,
            complex_,
            1,
            _GREEDY_EPS,
            nu / RAT(2),
            grid,
            context=ctx,
            prev_points=(),
        )
        guards.append(cert.point)
        residuals.append(residual)
        complex_ = build_complex(poly, guards, len(guards), ctx.vis_cache)
    return guards, residuals


# ---------------------------------------------------------------------------
# random sampling + discrete hitting (weight doubling)
# ---------------------------------------------------------------------------

_DYADIC_BITS = 62


@dataclass
class SampleParams:
    delta: object
    sigma: object
    seed: int
    k: int  # guessed guard-count scale

    def __post_init__(self):
        self.delta = RAT(self.delta)
        self.sigma = RAT(self.sigma)
        if not (0 < self.delta < 1 and 0 < self.sigma < 1) or self.k < 1:
            raise InvalidInputError("need delta, sigma in (0,1) and k >= 1")
        self.eps = RAT(1, self.k)
        self.gamma = self.delta / 2

    @property
    def sample_size(self) -> int:
        val = 12 * self.k * math.log(self.k / float(self.sigma)) / float(self.delta) ** 2
        return max(1, int(math.ceil(val - 1e-9)))


def draw_sample(poly: PolygonWithHoles, r: int, seed: int):
    """r uniform points of H via rejection from the bounding box; coordinates
    are dyadic rationals from the seeded generator, so runs are reproducible
    bit for bit."""
    rng = random.Random(seed)
    x0, y0, x1, y1 = poly.bbox
    w, hgt = x1 - x0, y1 - y0
    den = 1 << _DYADIC_BITS
    out = []
    while len(out) < r:
        x = x0 + w * RAT(rng.getrandbits(_DYADIC_BITS), den)
        y = y0 + hgt * RAT(rng.getrandbits(_DYADIC_BITS), den)
        if poly.locate((x, y)) != EXTERIOR:
            out.append((x, y))
    return out


def candidate_guards(poly: PolygonWithHoles, base_complex=None):
    """Finite candidate set: representatives of the guard-free convex
    partition plus the polygon vertices.  Every point of H is seen by its own
    cell's representative, so the candidates can always guard any sample."""
    if base_complex is None:
        base_complex = build_complex(poly, [])
    cands = {centroid(c) for c in base_complex.cells}
    cands.update(poly.vertices)
    return sorted(cands), base_complex


def _visibility_masks(poly, samples, cands, base_complex):
    """Per-sample bitmask of candidates that see it.

    Cell-level pretests (full visibility / single-wall block) resolve most
    (cell, candidate) pairs without per-sample segment tests.
    """
    cells = base_complex.cells
    sample_cell = []
    for q in samples:
        found = None
        for ci, cell in enumerate(cells):
            from .geom import locate_in_ring

            if locate_in_ring(q, cell) != EXTERIOR:
                found = ci
                break
        if found is None:
            raise InternalInvariantError("sample escaped the partition")
        sample_cell.append(found)
    pair_status = {}
    for ci, cell in enumerate(cells):
        for gi, g in enumerate(cands):
            hull = convex_hull(list(cell) + [g])
            if len(hull) < 3:
                pair_status[(ci, gi)] = "full"
            elif _hull_clean(poly, hull):
                pair_status[(ci, gi)] = "full"
            elif _edge_blocks(poly, [g], cell, hull):
                pair_status[(ci, gi)] = "none"
            else:
                pair_status[(ci, gi)] = "test"
    masks = []
    for q, ci in zip(samples, sample_cell):
        mask = 0
        for gi, g in enumerate(cands):
            st = pair_status[(ci, gi)]
            if st == "full" or (st == "test" and sees(poly, g, q)):
                mask |= 1 << gi
        if mask == 0:
            raise InternalInvariantError("sample point visible to no candidate")
        masks.append(mask)
    return masks


def _weighted_net(weights, masks_distinct, eps_net):
    """Greedy hitting set for all ranges of weight >= eps_net * total."""
    total = sum(weights)
    heavy = []
    for mask in masks_distinct:
        w = sum(weights[i] for i in _bits(mask))
        if RAT(w) >= eps_net * total:
            heavy.append(mask)
    chosen = 0
    uncovered = heavy
    while uncovered:
        best_amount, best = 0, None
        n = max(m.bit_length() for m in uncovered)
        for i in range(n):  # deterministic argmax, lowest index wins ties
            bit = 1 << i
            amount = sum(1 for m in uncovered if m & bit)
            if amount > best_amount:
                best_amount, best = amount, i
        if best is None:
            raise InternalInvariantError("net construction stalled")
        chosen |= 1 << best
        uncovered = [m for m in uncovered if not (m & (1 << best))]
    return chosen


def _bits(mask):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def sample_solve(poly: PolygonWithHoles, params: SampleParams):
    """Appendix sampling baseline.  Returns (guards, diagnostics dict)."""
    r = params.sample_size
    samples = draw_sample(poly, r, params.seed)
    cands, base_complex = candidate_guards(poly)
    masks = _visibility_masks(poly, samples, cands, base_complex)
    distinct = sorted(set(masks))
    k_guess = params.k
    attempts = 0
    while k_guess <= 4 * len(cands):
        eps_net = RAT(1, 2 * k_guess)
        weights = [1] * len(cands)
        cap = int(math.ceil(5.2 * k_guess * math.log(max(len(cands), 2)))) + 4
        for _ in range(cap):
            attempts += 1
            net_mask = _weighted_net(weights, distinct, eps_net)
            violator = None
            for m in masks:
                if not (m & net_mask):
                    violator = m
                    break
            if violator is None:
                guards = [cands[i] for i in _bits(net_mask)]
                for m in masks:
                    if not (m & net_mask):
                        raise InternalInvariantError("unguarded sample point")
                return guards, {
                    "sample_size": r,
                    "candidates": len(cands),
                    "k_guess": k_guess,
                    "doubling_rounds": attempts,
                }
            for i in _bits(violator):
                weights[i] *= 2
        k_guess *= 2
    raise InternalInvariantError(
        "weight doubling failed to converge within the finite-case bound"
    )
