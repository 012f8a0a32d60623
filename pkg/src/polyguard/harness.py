"""Instance formats, generators, OPT bracketing, and verification."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field

import mpmath

from .arrangement import build_complex
from .errors import InternalInvariantError, InvalidInputError
from .geom import (
    EXTERIOR,
    RAT,
    R0,
    PolygonWithHoles,
    centroid,
    clip_convex,
    rat,
    rat_str,
    ring_area,
)
from .visibility import sees, star_fan_triangles, visibility_polygon


# ---------------------------------------------------------------------------
# instance files
# ---------------------------------------------------------------------------


@dataclass
class InstanceFile:
    name: str
    poly: PolygonWithHoles
    metadata: dict = field(default_factory=dict)

    def to_json_dict(self):
        return {
            "name": self.name,
            "outer": [[rat_str(x), rat_str(y)] for x, y in self.poly.outer],
            "holes": [
                [[rat_str(x), rat_str(y)] for x, y in h] for h in self.poly.holes
            ],
            "metadata": self.metadata,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    @staticmethod
    def from_json_dict(d) -> "InstanceFile":
        try:
            outer = [(rat(x), rat(y)) for x, y in d["outer"]]
            holes = [[(rat(x), rat(y)) for x, y in h] for h in d.get("holes", [])]
            name = d.get("name", "unnamed")
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed instance file: {exc}") from exc
        return InstanceFile(name, PolygonWithHoles(outer, holes), d.get("metadata", {}))

    @staticmethod
    def loads(text: str) -> "InstanceFile":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"bad JSON: {exc}") from exc
        return InstanceFile.from_json_dict(d)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def gen_convex(m: int) -> InstanceFile:
    """m rational points on a circle (exactly convex by construction)."""
    if m < 3:
        raise InvalidInputError("convex(m) needs m >= 3")
    if m == 4:
        ring = [(R0, R0), (RAT(4), R0), (RAT(4), RAT(4)), (R0, RAT(4))]
        return InstanceFile(f"convex{m}", PolygonWithHoles(ring), {"kind": "convex"})
    pts = []
    with mpmath.workdps(30):
        for k in range(m):
            theta = -mpmath.pi + mpmath.pi * (2 * k + 1) / m
            t = mpmath.tan(theta / 2)
            tq = RAT(int(mpmath.nint(t * 4096)), 4096)
            den = 1 + tq * tq
            x = (1 - tq * tq) / den
            y = 2 * tq / den
            pts.append((4 * x + 5, 4 * y + 5))
    ring = sorted(set(pts))
    # order by angle around the center (all points are on one circle)
    c = (RAT(5), RAT(5))
    from .geom import direction_key

    ring.sort(key=lambda p: direction_key((p[0] - c[0], p[1] - c[1])))
    poly = PolygonWithHoles(ring)
    if len(ring) != m:
        raise InternalInvariantError("convex generator collapsed vertices")
    return InstanceFile(f"convex{m}", poly, {"kind": "convex"})


def gen_lshape() -> InstanceFile:
    ring = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]
    return InstanceFile(
        "lshape", PolygonWithHoles([(RAT(x), RAT(y)) for x, y in ring]), {"kind": "lshape"}
    )


def gen_comb(k: int) -> InstanceFile:
    """The classical k-tooth comb: corridor [0,2k-1]x[0,1], teeth up to y=3.

    Tooth tips are pairwise invisible, so full-coverage OPT equals k.
    """
    if k < 1:
        raise InvalidInputError("comb(k) needs k >= 1")
    ring = [(R0, R0), (RAT(2 * k - 1), R0), (RAT(2 * k - 1), RAT(3))]
    for i in range(k - 1, 0, -1):
        ring.append((RAT(2 * i), RAT(3)))
        ring.append((RAT(2 * i), RAT(1)))
        ring.append((RAT(2 * i - 1), RAT(1)))
        ring.append((RAT(2 * i - 1), RAT(3)))
    ring.append((R0, RAT(3)))
    poly = PolygonWithHoles(ring)
    return InstanceFile(f"comb{k}", poly, {"kind": "comb", "teeth": k})


def gen_orthogonal(m: int, holes: int, seed: int) -> InstanceFile:
    """Seeded random orthogonal polygon with at most m vertices and up to one
    unit-square hole; deterministic for a fixed seed."""
    if m < 8:
        raise InvalidInputError("orthogonal(m) needs m >= 8")
    if holes not in (0, 1):
        raise InvalidInputError("orthogonal supports 0 or 1 holes")
    rng = random.Random(seed)
    W, Hg = 6, 5
    cells = {(i, j) for i in range(W) for j in range(Hg)}

    def corner_ok(cset):
        for i in range(-1, W + 1):
            for j in range(-1, Hg + 1):
                a = (i, j) in cset
                b = (i + 1, j) in cset
                c = (i, j + 1) in cset
                d = (i + 1, j + 1) in cset
                if (a and d and not b and not c) or (b and c and not a and not d):
                    return False
        return True

    def connected(cset):
        if not cset:
            return False
        seen = set()
        stack = [min(cset)]
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            x, y = cur
            for nb in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                if nb in cset and nb not in seen:
                    stack.append(nb)
        return len(seen) == len(cset)

    def vertex_count(cset):
        return len(_trace_boundary(cset))

    target = m if holes == 0 else m - 4
    for _ in range(200):
        boundary = sorted(
            c
            for c in cells
            if any(
                nb not in cells
                for nb in ((c[0] + 1, c[1]), (c[0] - 1, c[1]), (c[0], c[1] + 1), (c[0], c[1] - 1))
            )
        )
        c = rng.choice(boundary)
        trial = cells - {c}
        if len(trial) < 8 or not connected(trial) or not corner_ok(trial):
            continue
        if vertex_count(trial) > target:
            continue
        cells = trial
        if vertex_count(cells) >= target - 2 and rng.random() < 0.5:
            break
    ring = _trace_boundary(cells)
    hole_rings = []
    if holes == 1:
        inner = sorted(
            c
            for c in cells
            if all(
                (c[0] + dx, c[1] + dy) in cells
                for dx in (-1, 0, 1)
                for dy in (-1, 0, 1)
            )
        )
        if not inner:
            raise InternalInvariantError("no room for a hole; try another seed")
        hx, hy = inner[rng.randrange(len(inner))]
        q = RAT(1, 4)
        hole_rings = [[
            (hx + q, hy + q),
            (hx + q, hy + 3 * q),
            (hx + 3 * q, hy + 3 * q),
            (hx + 3 * q, hy + q),
        ]]
    poly = PolygonWithHoles(ring, hole_rings)
    if poly.n > m:
        raise InternalInvariantError("orthogonal generator exceeded vertex budget")
    return InstanceFile(
        f"orthogonal{m}h{holes}s{seed}", poly, {"kind": "orthogonal", "seed": seed}
    )


def _trace_boundary(cells):
    """CCW boundary ring of a simply-connected, corner-clean cell union."""
    edges = {}
    for (i, j) in cells:
        for a, b, outside in (
            ((i, j), (i + 1, j), (i, j - 1)),
            ((i + 1, j), (i + 1, j + 1), (i + 1, j)),
            ((i + 1, j + 1), (i, j + 1), (i, j + 1)),
            ((i, j + 1), (i, j), (i - 1, j)),
        ):
            if outside not in cells:
                edges[a] = b
    if not edges:
        raise InternalInvariantError("empty cell set")
    start = min(edges)
    ring = [start]
    cur = edges[start]
    while cur != start:
        ring.append(cur)
        cur = edges[cur]
    out = []
    n = len(ring)
    for idx in range(n):
        a, b, c = ring[idx - 1], ring[idx], ring[(idx + 1) % n]
        if (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) != 0:
            out.append((RAT(b[0]), RAT(b[1])))
    return out


def generate(kind: str, **kw) -> InstanceFile:
    if kind == "convex":
        return gen_convex(kw["m"])
    if kind == "lshape":
        return gen_lshape()
    if kind == "comb":
        return gen_comb(kw["k"])
    if kind == "orthogonal":
        return gen_orthogonal(kw["m"], kw.get("holes", 0), kw.get("seed", 0))
    raise InvalidInputError(f"unknown instance kind {kind!r}")


# ---------------------------------------------------------------------------
# OPT bracketing
# ---------------------------------------------------------------------------


@dataclass
class OptBracket:
    lower: int | None
    upper: int | None


def _covers_cell(poly, guard, vis_ring, cell):
    """Exact test cell ⊆ V(guard) by area identity."""
    fans = star_fan_triangles(vis_ring, guard)
    total = R0
    for tri in fans:
        piece = clip_convex(list(tri), cell)
        if len(piece) >= 3:
            total += abs(ring_area(piece))
    return total == ring_area(cell)


def _max_independent(adj, n):
    """Exact maximum independent set by branch and bound (small n)."""
    best = [0]
    order = sorted(range(n), key=lambda i: -bin(adj[i]).count("1"))

    def rec(cand_mask, size):
        if size + bin(cand_mask).count("1") <= best[0]:
            return
        if cand_mask == 0:
            best[0] = max(best[0], size)
            return
        i = min(k for k in order if cand_mask & (1 << k))
        rec(cand_mask & ~(1 << i) & ~adj[i], size + 1)
        rec(cand_mask & ~(1 << i), size)

    rec((1 << n) - 1, 0)
    return best[0]


def _rings_disjoint(r1, r2) -> bool:
    """Exact set-disjointness of two closed polygonal regions."""
    if min(p[0] for p in r1) > max(p[0] for p in r2):
        return True
    if min(p[0] for p in r2) > max(p[0] for p in r1):
        return True
    if min(p[1] for p in r1) > max(p[1] for p in r2):
        return True
    if min(p[1] for p in r2) > max(p[1] for p in r1):
        return True
    from .geom import locate_in_ring, segment_intersect

    n1, n2 = len(r1), len(r2)
    for i in range(n1):
        a, b = r1[i], r1[(i + 1) % n1]
        for j in range(n2):
            c, d = r2[j], r2[(j + 1) % n2]
            if segment_intersect(a, b, c, d)[0] != "empty":
                return False
    if locate_in_ring(r1[0], r2) != EXTERIOR:
        return False
    if locate_in_ring(r2[0], r1) != EXTERIOR:
        return False
    return True


def _min_cover(universe_count, sets_masks, cap):
    """Exact minimum set cover by branch and bound; None if infeasible."""
    full = (1 << universe_count) - 1
    reach = 0
    for m in sets_masks:
        reach |= m
    if reach != full:
        return None
    best = [cap + 1]

    def rec(covered, used, chosen_count):
        if chosen_count >= best[0]:
            return
        if covered == full:
            best[0] = chosen_count
            return
        # branch on the uncovered element with fewest options
        rest = full & ~covered
        elem, options = None, None
        e = 0
        r = rest
        while r:
            if r & 1:
                opts = [k for k in range(len(sets_masks)) if sets_masks[k] & (1 << e) and not (used & (1 << k))]
                if options is None or len(opts) < len(options):
                    elem, options = e, opts
                    if len(opts) <= 1:
                        break
            r >>= 1
            e += 1
        if not options:
            return
        for k in options:
            rec(covered | sets_masks[k], used | (1 << k), chosen_count + 1)

    rec(0, 0, 0)
    return best[0] if best[0] <= cap else None


def opt_bracket(poly: PolygonWithHoles, witness_budget: int = 26) -> OptBracket:
    """lower = most witnesses with pairwise-disjoint viewer regions (each then
    needs its own guard); upper = exact cover of the guard-free cells by
    candidate guards (representatives and vertices).

    Pairwise invisibility alone would overcount: two mutually invisible
    points can still share a viewer.  Disjoint visibility polygons are the
    sound certificate, and near-corner probes reach tooth-tip witnesses.
    """
    base = build_complex(poly, [])
    reps = [centroid(c) for c in base.cells]
    if len(reps) > witness_budget:
        return OptBracket(None, None)
    witnesses = set(reps)
    for cell in base.cells:
        c = centroid(cell)
        for v in cell:
            witnesses.add(((3 * v[0] + c[0]) / 4, (3 * v[1] + c[1]) / 4))
    witnesses = sorted(witnesses)[: 4 * witness_budget]
    viewer = [visibility_polygon(poly, w) for w in witnesses]
    n = len(witnesses)
    adj = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if not _rings_disjoint(viewer[i], viewer[j]):
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    lower = _max_independent(adj, n)

    cand = sorted(set(reps) | {v for c in base.cells for v in c})
    masks = []
    for g in cand:
        vis = visibility_polygon(poly, g)
        mask = 0
        for ci, cell in enumerate(base.cells):
            if _covers_cell(poly, g, vis, cell):
                mask |= 1 << ci
        masks.append(mask)
    upper = _min_cover(len(base.cells), masks, cap=max(n, lower) + 4)
    return OptBracket(lower, upper)


# ---------------------------------------------------------------------------
# verification and reports
# ---------------------------------------------------------------------------


def verify(poly: PolygonWithHoles, guards):
    """Exact covered-area fraction of H for the given guard set."""
    if not guards:
        return R0
    complex_ = build_complex(poly, list(guards))
    covered = sum(
        (ring_area(c) for c, lab in zip(complex_.cells, complex_.labels) if lab),
        R0,
    )
    return covered / poly.area()


@dataclass
class SolveReport:
    algorithm: str
    instance: str
    params: dict
    guards: list
    coverage: object
    iterations: int
    wall_time_s: float
    certificates_digest: str = ""

    def to_json_dict(self):
        return {
            "algorithm": self.algorithm,
            "instance": self.instance,
            "params": self.params,
            "guards": [[rat_str(x), rat_str(y)] for x, y in self.guards],
            "coverage": rat_str(self.coverage),
            "guard_count": len(self.guards),
            "iterations": self.iterations,
            "wall_time_s": round(self.wall_time_s, 3),
            "certificates_digest": self.certificates_digest,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    @staticmethod
    def loads(text: str) -> "SolveReport":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"bad JSON: {exc}") from exc
        return SolveReport(
            algorithm=d["algorithm"],
            instance=d["instance"],
            params=d["params"],
            guards=[(rat(x), rat(y)) for x, y in d["guards"]],
            coverage=rat(d["coverage"]),
            iterations=d["iterations"],
            wall_time_s=d["wall_time_s"],
            certificates_digest=d.get("certificates_digest", ""),
        )


def digest_lines(lines) -> str:
    h = hashlib.sha256()
    for line in lines:
        h.update(line.encode())
        h.update(b"\n")
    return h.hexdigest()
