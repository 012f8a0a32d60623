"""Rounding the fractional solution to an integral guard set.

The support's uniform weights make heaviness an exact cardinality test: a
cell needs T distinct support indices before the net must hit it.  Greedy
max-coverage over the finitely many heavy cells plays the role of the
deterministic net construction; its log-factor size matches the theorem's
shape and is checked, not assumed.
"""

from __future__ import annotations

import math

from .arrangement import CellComplex, build_complex
from .errors import InternalInvariantError
from .geom import PolygonWithHoles, RAT
from .solver import FractionalSolution


def extract_net(
    poly: PolygonWithHoles,
    frac: FractionalSolution,
    complex_: CellComplex | None = None,
):
    """A subset of the support hitting every heavily-covered cell.

    If the total fractional measure is at most 1, any support point works
    (every heavy cell sees the entire support); otherwise greedy hitting over
    the enumerated heavy cells.
    """
    support = frac.support
    T = frac.T
    if not support:
        return []
    if frac.total_measure() <= 1:
        return [min(support)]
    if complex_ is None or complex_.guards != support:
        complex_ = build_complex(poly, support)
    heavy = [
        set(lab) for lab in complex_.labels if len(lab) >= T
    ]
    for lab in heavy:
        if not lab:
            raise InternalInvariantError("heavy cell with empty label")
    uncovered = list(range(len(heavy)))
    chosen = []
    while uncovered:
        best_idx = None
        best_hit = -1
        for i in range(len(support)):
            hit = sum(1 for k in uncovered if i in heavy[k])
            if hit > best_hit:
                best_hit = hit
                best_idx = i
        if best_hit <= 0:
            raise InternalInvariantError("greedy hitting stalled on a heavy cell")
        chosen.append(best_idx)
        uncovered = [k for k in uncovered if best_idx not in heavy[k]]
    out = []
    for i in chosen:
        if support[i] not in out:
            out.append(support[i])
    return out


def net_is_valid(poly, frac, net, complex_=None) -> bool:
    """Exhaustive check: every heavy cell's label meets the net."""
    if complex_ is None or complex_.guards != frac.support:
        complex_ = build_complex(poly, frac.support)
    net_idx = {i for i, p in enumerate(frac.support) if p in set(net)}
    for lab in complex_.labels:
        if len(lab) >= frac.T and not (set(lab) & net_idx):
            return False
    return True


def greedy_size_bound(frac, heavy_count: int) -> float:
    """mu(P^) * (1 + ln #heavy), the greedy set-cover guarantee shape."""
    mu = float(frac.total_measure())
    return mu * (1.0 + math.log(max(heavy_count, 1)))
