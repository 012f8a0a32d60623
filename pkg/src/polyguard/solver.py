"""The multiplicative-weights placement loop.

Weights are never materialized per point: each arrangement cell's label size
is its decay exponent, so every weight is exactly (1-eps)^|label| times area.
The loop adds one oracle point per iteration until the area seen fewer than T
times drops below delta * area(H).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath

from .arrangement import CellComplex, build_complex
from .errors import InternalInvariantError, InvalidInputError
from .geom import RAT, R0, PolygonWithHoles, rat_str, ring_area
from .oracle import OracleCertificate, OracleContext, max_oracle
from .rounding import grid_spec

ABS_ITERATION_CAP = 10_000


def compute_T(eps, delta) -> int:
    """T = ceil((1/eps^2) * ln(1/delta)), evaluated in 60-digit precision.

    ln of a rational other than 1 is irrational, so the ceiling is never at an
    exact integer boundary and 60 digits decide it correctly at any sane size.
    """
    with mpmath.workdps(60):
        val = mpmath.log(
            mpmath.mpf(int(delta.denominator)) / mpmath.mpf(int(delta.numerator))
        ) / (mpmath.mpf(int(eps.numerator)) / mpmath.mpf(int(eps.denominator))) ** 2
        return max(1, int(mpmath.ceil(val)))


def t_max_cap(opt_ub: int, eps, delta, nu, T: int) -> int:
    """Iteration bound ceil((Opt/(eps(1-nu))) * (T ln(1/(1-eps)) + ln(1/delta)))."""
    with mpmath.workdps(60):
        e = mpmath.mpf(int(eps.numerator)) / mpmath.mpf(int(eps.denominator))
        d = mpmath.mpf(int(delta.numerator)) / mpmath.mpf(int(delta.denominator))
        v = mpmath.mpf(int(nu.numerator)) / mpmath.mpf(int(nu.denominator))
        val = (opt_ub / (e * (1 - v))) * (T * mpmath.log(1 / (1 - e)) + mpmath.log(1 / d))
        return int(mpmath.ceil(val))


@dataclass
class SolveParams:
    eps: object
    delta: object
    nu: object
    T: int = 0

    def __post_init__(self):
        self.eps = RAT(self.eps)
        self.delta = RAT(self.delta)
        self.nu = RAT(self.nu)
        if not (0 < self.eps <= RAT(68, 100)):
            raise InvalidInputError("eps must lie in (0, 0.68]")
        if not (0 < self.delta < 1 and 0 < self.nu < 1):
            raise InvalidInputError("delta and nu must lie in (0,1)")
        if not self.T:
            self.T = compute_T(self.eps, self.delta)


@dataclass
class FractionalSolution:
    """Support points with uniform weight 1/T (a multiset)."""

    support: list
    T: int

    def total_measure(self):
        return RAT(len(self.support), self.T)


@dataclass
class IterationTrace:
    t: int
    point: tuple
    active_area: object
    weight_active: object
    certificate: OracleCertificate

    def to_json_dict(self):
        d = {
            "t": self.t,
            "point": [rat_str(self.point[0]), rat_str(self.point[1])],
            "active_area": rat_str(self.active_area),
            "weight_active": rat_str(self.weight_active),
        }
        d.update({"certificate": self.certificate.to_json_dict()})
        return d


def active_area(complex_: CellComplex, T: int):
    """Exact area seen by fewer than T guards (with multiplicity)."""
    return sum(
        (ring_area(c) for c, lab in zip(complex_.cells, complex_.labels) if len(lab) < T),
        R0,
    )


def weight_of_active(complex_: CellComplex, T: int, eps):
    """Exact decayed weight of the active region."""
    eps = RAT(eps)
    return sum(
        (
            (1 - eps) ** len(lab) * ring_area(c)
            for c, lab in zip(complex_.cells, complex_.labels)
            if len(lab) < T
        ),
        R0,
    )


class _ComplexCache:
    """Rebuilds of identical distinct-guard sets are pure relabelings."""

    def __init__(self, poly: PolygonWithHoles, vis_cache):
        self.poly = poly
        self.vis_cache = vis_cache
        self.store = {}

    def build(self, guards, generation: int) -> CellComplex:
        distinct = tuple(sorted(set(guards)))
        if distinct not in self.store:
            base = build_complex(self.poly, list(distinct), generation, self.vis_cache)
            flags = []
            for cell_idx in range(len(base.cells)):
                lab = base.labels[cell_idx]
                flags.append({distinct[k]: (k in lab) for k in range(len(distinct))})
            self.store[distinct] = (base.cells, flags)
        cells, flags = self.store[distinct]
        labels = [
            tuple(i for i, g in enumerate(guards) if f[g]) for f in flags
        ]
        out = CellComplex(self.poly, list(guards), cells, labels, generation)
        out.area_check()
        return out


def solve(
    poly: PolygonWithHoles,
    params: SolveParams,
    opt_ub: int | None = None,
    trace_hook=None,
    context: OracleContext | None = None,
):
    """Run the weighted placement loop to a fractional solution.

    Returns (FractionalSolution, [IterationTrace]).  When opt_ub is given the
    theoretical iteration cap is enforced as a fatal assertion.
    """
    eps, delta, nu, T = params.eps, params.delta, params.nu, params.T
    ctx = context or OracleContext(poly)
    cache = _ComplexCache(poly, ctx.vis_cache)
    area_h = poly.area()
    n, h = poly.n, poly.h
    cap = t_max_cap(opt_ub, eps, delta, nu, T) if opt_ub else None
    guards = []
    traces = []
    complex_ = cache.build(guards, 0)
    r_max_state = n * (h + 1)
    t = 0
    while True:
        act = active_area(complex_, T)
        if act < delta * area_h:
            break
        if t >= ABS_ITERATION_CAP:
            raise InternalInvariantError("absolute iteration cap exceeded")
        if cap is not None and t >= cap:
            raise InternalInvariantError(
                f"iteration bound exceeded: t={t} > t_max={cap} (oracle or rounding bug)"
            )
        r_max_state = max(r_max_state, n * (h + 1) * (t + 1) ** 2, len(complex_.cells))
        grid = grid_spec(poly, n, h, eps, delta, nu, T, r_max_state)
        cert = max_oracle(
            poly,
            complex_,
            T,
            eps,
            nu / RAT(2),
            grid,
            context=ctx,
            prev_points=guards,
        )
        guards.append(cert.point)
        t += 1
        complex_ = cache.build(guards, t)
        trace = IterationTrace(
            t=t,
            point=cert.point,
            active_area=active_area(complex_, T),
            weight_active=weight_of_active(complex_, T, eps),
            certificate=cert,
        )
        traces.append(trace)
        if trace_hook is not None:
            trace_hook(trace)
    return FractionalSolution(guards, T), traces
