"""Deterministic SVG rendering of instances and solve reports.

Exact coordinates are quantized to fixed decimals for display only; the same
input always produces byte-identical output.
"""

from __future__ import annotations

from .arrangement import build_complex
from .geom import PolygonWithHoles, RAT


def _dec(q, places: int = 6) -> str:
    """Exact fixed-point decimal string of a rational (display only)."""
    q = RAT(q)
    sign = "-" if q < 0 else ""
    q = abs(q)
    scaled = (q.numerator * 10**places) // q.denominator
    whole, frac = divmod(scaled, 10**places)
    return f"{sign}{whole}.{str(frac).zfill(places)}"


def _path(ring, scale, ox, oy) -> str:
    cmds = []
    for i, (x, y) in enumerate(ring):
        op = "M" if i == 0 else "L"
        cmds.append(f"{op}{_dec((x - ox) * scale)},{_dec((oy - y) * scale)}")
    return " ".join(cmds) + " Z"


def render(poly: PolygonWithHoles, guards=(), width: int = 480) -> str:
    """SVG document: polygon with holes, covered cells shaded, uncovered
    hatched, guards marked."""
    x0, y0, x1, y1 = poly.bbox
    pad = (x1 - x0 + y1 - y0) / 20 + RAT(1, 10)
    x0, y0, x1, y1 = x0 - pad, y0 - pad, x1 + pad, y1 + pad
    scale = RAT(width) / (x1 - x0)
    height = _dec((y1 - y0) * scale, 2)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        "<defs><pattern id='hatch' width='6' height='6' "
        "patternTransform='rotate(45)' patternUnits='userSpaceOnUse'>"
        "<line x1='0' y1='0' x2='0' y2='6' stroke='#b44' stroke-width='1.5'/>"
        "</pattern></defs>",
    ]
    guards = [tuple(map(RAT, g)) for g in guards]
    outline = _path(poly.outer, scale, x0, y1)
    for h in poly.holes:
        outline += " " + _path(h, scale, x0, y1)
    if guards:
        complex_ = build_complex(poly, guards)
        for cell, lab in zip(complex_.cells, complex_.labels):
            fill = "#9fd49f" if lab else "url(#hatch)"
            parts.append(
                f'<path d="{_path(cell, scale, x0, y1)}" fill="{fill}" '
                'stroke="#557755" stroke-width="0.4"/>'
            )
    else:
        parts.append(
            f'<path d="{outline}" fill="url(#hatch)" fill-rule="evenodd" stroke="none"/>'
        )
    parts.append(
        f'<path d="{outline}" fill="none" fill-rule="evenodd" '
        'stroke="#222222" stroke-width="2"/>'
    )
    for g in sorted(guards):
        cx = _dec((g[0] - x0) * scale)
        cy = _dec((y1 - g[1]) * scale)
        parts.append(
            f'<circle cx="{cx}" cy="{cy}" r="4" fill="#2244cc" stroke="#ffffff" stroke-width="1.2"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
