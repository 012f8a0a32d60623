"""Command-line surface: gen, solve, greedy, sample, opt, verify, render.

All geometry travels as exact "p/q" strings; exit codes are 0 (success),
2 (invalid input), 3 (internal invariant violation).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .baselines import SampleParams, greedy_solve, sample_solve
from .epsnet import extract_net
from .errors import InternalInvariantError, InvalidInputError
from .geom import rat, rat_str
from .harness import InstanceFile, OptBracket, SolveReport, digest_lines, generate, opt_bracket, verify
from .render import render as render_svg
from .solver import SolveParams, solve

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL = 0, 2, 3


def _read_instance(path: str) -> InstanceFile:
    try:
        with open(path) as fh:
            return InstanceFile.loads(fh.read())
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc


def _write(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text + ("\n" if not text.endswith("\n") else ""))
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _cmd_gen(args) -> int:
    kw = {}
    if args.kind == "convex":
        kw["m"] = args.m
    elif args.kind == "comb":
        kw["k"] = args.k
    elif args.kind == "orthogonal":
        kw.update(m=args.m, holes=args.holes, seed=args.seed)
    inst = generate(args.kind, **kw)
    _write(args.out, inst.dumps())
    return EXIT_OK


def _cmd_solve(args) -> int:
    inst = _read_instance(args.infile)
    params = SolveParams(rat(args.eps), rat(args.delta), rat(args.nu))
    trace_lines = []

    def hook(tr):
        trace_lines.append(json.dumps(tr.to_json_dict(), sort_keys=True))

    start = time.perf_counter()
    frac, traces = solve(inst.poly, params, opt_ub=args.opt_ub, trace_hook=hook)
    net = extract_net(inst.poly, frac)
    elapsed = time.perf_counter() - start
    coverage = verify(inst.poly, net)
    report = SolveReport(
        algorithm="mwu",
        instance=inst.name,
        params={
            "eps": rat_str(params.eps),
            "delta": rat_str(params.delta),
            "nu": rat_str(params.nu),
            "T": params.T,
        },
        guards=net,
        coverage=coverage,
        iterations=len(traces),
        wall_time_s=elapsed,
        certificates_digest=digest_lines(trace_lines),
    )
    if args.trace:
        _write(args.trace, "\n".join(trace_lines) + "\n")
    _write(args.out, report.dumps())
    return EXIT_OK


def _cmd_greedy(args) -> int:
    inst = _read_instance(args.infile)
    start = time.perf_counter()
    guards, residuals = greedy_solve(inst.poly, rat(args.delta), rat(args.nu), args.opt_ub)
    elapsed = time.perf_counter() - start
    report = SolveReport(
        algorithm="greedy",
        instance=inst.name,
        params={"delta": rat_str(rat(args.delta)), "nu": rat_str(rat(args.nu))},
        guards=guards,
        coverage=verify(inst.poly, guards),
        iterations=len(guards),
        wall_time_s=elapsed,
    )
    _write(args.out, report.dumps())
    return EXIT_OK


def _cmd_sample(args) -> int:
    inst = _read_instance(args.infile)
    params = SampleParams(rat(args.delta), rat(args.sigma), args.seed, args.k)
    start = time.perf_counter()
    guards, diag = sample_solve(inst.poly, params)
    elapsed = time.perf_counter() - start
    report = SolveReport(
        algorithm="sample",
        instance=inst.name,
        params={
            "delta": rat_str(params.delta),
            "sigma": rat_str(params.sigma),
            "seed": params.seed,
            "k": params.k,
            **diag,
        },
        guards=guards,
        coverage=verify(inst.poly, guards),
        iterations=diag["doubling_rounds"],
        wall_time_s=elapsed,
    )
    _write(args.out, report.dumps())
    return EXIT_OK


def _cmd_opt(args) -> int:
    inst = _read_instance(args.infile)
    bracket = opt_bracket(inst.poly, args.witness_budget)
    _write(
        args.out,
        json.dumps(
            {"instance": inst.name, "lower": bracket.lower, "upper": bracket.upper},
            indent=2,
            sort_keys=True,
        ),
    )
    return EXIT_OK


def _cmd_verify(args) -> int:
    inst = _read_instance(args.infile)
    with open(args.report) as fh:
        report = SolveReport.loads(fh.read())
    coverage = verify(inst.poly, report.guards)
    ok = coverage == report.coverage
    _write(
        args.out,
        json.dumps(
            {
                "instance": inst.name,
                "coverage": rat_str(coverage),
                "matches_report": ok,
            },
            indent=2,
            sort_keys=True,
        ),
    )
    if not ok:
        raise InternalInvariantError("report coverage does not match recomputation")
    return EXIT_OK


def _cmd_render(args) -> int:
    inst = _read_instance(args.infile)
    guards = []
    if args.report:
        with open(args.report) as fh:
            guards = SolveReport.loads(fh.read()).guards
    _write(args.out, render_svg(inst.poly, guards))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="polyguard",
        description="Guard placement in polygons with holes, exact arithmetic throughout.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("--kind", required=True, choices=["convex", "lshape", "comb", "orthogonal"])
    g.add_argument("--m", type=int, default=8)
    g.add_argument("--k", type=int, default=4)
    g.add_argument("--holes", type=int, default=0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="-")
    g.set_defaults(func=_cmd_gen)

    s = sub.add_parser("solve", help="run the MWU solver and extract a net")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--eps", default="1/2")
    s.add_argument("--delta", default="1/10")
    s.add_argument("--nu", default="1/2")
    s.add_argument("--opt-ub", type=int, default=None)
    s.add_argument("--trace", default=None)
    s.add_argument("--out", default="-")
    s.set_defaults(func=_cmd_solve)

    gr = sub.add_parser("greedy", help="residual-area greedy baseline")
    gr.add_argument("--in", dest="infile", required=True)
    gr.add_argument("--delta", default="1/10")
    gr.add_argument("--nu", default="1/2")
    gr.add_argument("--opt-ub", type=int, default=None)
    gr.add_argument("--out", default="-")
    gr.set_defaults(func=_cmd_greedy)

    sa = sub.add_parser("sample", help="random-sampling + weight-doubling baseline")
    sa.add_argument("--in", dest="infile", required=True)
    sa.add_argument("--delta", default="1/10")
    sa.add_argument("--sigma", default="1/10")
    sa.add_argument("--seed", type=int, default=0)
    sa.add_argument("--k", type=int, required=True)
    sa.add_argument("--out", default="-")
    sa.set_defaults(func=_cmd_sample)

    o = sub.add_parser("opt", help="bracket the full-coverage optimum")
    o.add_argument("--in", dest="infile", required=True)
    o.add_argument("--witness-budget", type=int, default=26)
    o.add_argument("--out", default="-")
    o.set_defaults(func=_cmd_opt)

    v = sub.add_parser("verify", help="recompute a report's exact coverage")
    v.add_argument("--in", dest="infile", required=True)
    v.add_argument("--report", required=True)
    v.add_argument("--out", default="-")
    v.set_defaults(func=_cmd_verify)

    r = sub.add_parser("render", help="draw an instance (and report) as SVG")
    r.add_argument("--in", dest="infile", required=True)
    r.add_argument("--report", default=None)
    r.add_argument("--out", default="-")
    r.set_defaults(func=_cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InternalInvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
