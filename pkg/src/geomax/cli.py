"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal assertion.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import bench as bench_mod
from .exact import brute_matching, brute_tour, lp_matching_optimum, subtour_fractional_construction
from .instances import (GeneratorConfig, drop_last_if_odd, generate, load_instance,
                        write_native, write_tsplib)
from .matching import Matching, certify_ratio, cross_matching, matching_center, matching_local_search
from .render import render_svg
from .tour import Tour, cross_tour, tour_local_search
from .weber import fwp_improved, weber_combinatorial, weber_numeric

EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _pct(v):
    return f"{v:.2f}%"


def cmd_gen(args):
    cfg = GeneratorConfig(args.n, args.kind, args.k, args.radius, args.seed)
    inst = generate(cfg)
    _write(args.output, write_tsplib(inst) if args.format == "tsplib" else write_native(inst))


def cmd_solve_matching(args):
    inst = drop_last_if_odd(load_instance(args.input))
    pts = inst.points
    center = matching_center(pts, args.center)
    m = cross_matching(pts, center=center.center)
    if args.algo == "cross_ls":
        m = matching_local_search(pts, m, args.budget, args.seed, args.time_limit)
    ratio = certify_ratio(pts, center.center, m)
    print(f"{inst.name} n={len(pts)} value={m.value!r} fwp={center.value!r} "
          f"gap={_pct(100 * (center.value - m.value) / m.value)} edge_ratio={ratio:.6f}")
    if args.output:
        _write(args.output, "".join(f"{i} {j}\n" for i, j in m.pairs.tolist()))
    if args.svg:
        _write(args.svg, render_svg(pts, m, inst.name))


def cmd_solve_tour(args):
    inst = load_instance(args.input)
    pts = inst.points
    w = weber_numeric(pts)
    t = cross_tour(pts, w.center)
    if args.algo == "cross_tour_ls":
        t = tour_local_search(pts, t, args.budget, args.seed, args.time_limit)
    print(f"{inst.name} n={len(pts)} value={t.value!r} 2fwp={2 * w.value!r} "
          f"gap={_pct(100 * (2 * w.value - t.value) / t.value)}")
    if args.output:
        _write(args.output, "".join(f"{i}\n" for i in t.order.tolist()))
    if args.svg:
        _write(args.svg, render_svg(pts, t, inst.name))


def cmd_bound(args):
    inst = load_instance(args.input)
    pts = inst.points
    w = weber_numeric(pts)
    print(f"fwp_num={w.value!r} center=({w.center.x!r}, {w.center.y!r}) "
          f"method={w.method} iterations={w.iterations} status={w.status}")
    if args.combinatorial:
        c = weber_combinatorial(pts, numeric=w)
        print(f"fwp_com={c.value!r} center=({c.center.x!r}, {c.center.y!r}) "
              f"balanced={c.sector_balanced}")
    if args.fwp_prime:
        even = drop_last_if_odd(inst).points
        print(f"fwp_prime={fwp_improved(even, w.center)!r}")


def cmd_exact(args):
    inst = load_instance(args.input)
    pts = inst.points
    if args.what == "matching":
        res = brute_matching(drop_last_if_odd(inst).points)
    elif args.what == "tour":
        res = brute_tour(pts)
    elif args.what == "lp":
        res = lp_matching_optimum(drop_last_if_odd(inst).points, cap=args.cap)
    else:
        res = subtour_fractional_construction(pts)
    print(f"{args.what}={res.value!r}")


def _bench_spec(args) -> bench_mod.BenchSpec:
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            spec = bench_mod.BenchSpec.from_dict(json.load(fh))
    else:
        spec = bench_mod.BenchSpec()
        for path in args.input or []:
            spec.instances.append(bench_mod.InstanceSpec(file=path))
        for n in args.n or []:
            seeds = list(range(args.seed, args.seed + args.reps))
            spec.instances.append(bench_mod.InstanceSpec(kind=args.kind, n=n, k=args.k,
                                                         cluster_radius=args.radius,
                                                         seeds=seeds))
    if args.algo:
        algos = [a.strip() for a in args.algo.split(",") if a.strip()]
        bad = set(algos) - set(bench_mod.ALGORITHMS)
        if bad:
            raise UsageError(f"unknown algorithms: {', '.join(sorted(bad))}")
        spec.algorithms = algos
    if args.fwp_prime:
        spec.fwp_prime = True
    if args.budget is not None:
        spec.budget = args.budget
    if args.threads is not None:
        spec.threads = args.threads
    return spec


def cmd_bench(args):
    spec = _bench_spec(args)
    if args.output in (None, "-"):
        records = bench_mod.run_bench(spec, sys.stdout)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            records = bench_mod.run_bench(spec, fh)
    if args.summary:
        print(bench_mod.format_summary(bench_mod.summarize(records)), file=sys.stderr)
    if args.figure:
        from .report import plot_gaps

        plot_gaps(records, args.figure)


def _read_solution(path, kind, pts):
    rows = [ln.split() for ln in open(path, encoding="utf-8") if ln.strip()]
    if kind == "matching":
        return Matching.from_pairs(pts, np.array(rows, dtype=np.int64))
    return Tour.from_order(pts, np.array([r[0] for r in rows], dtype=np.int64))


def cmd_render(args):
    inst = load_instance(args.input)
    pts = inst.points
    sol = None
    if args.solution:
        if args.solution_kind == "matching":
            pts = drop_last_if_odd(inst).points
        sol = _read_solution(args.solution, args.solution_kind, pts)
    elif args.algo == "cross":
        pts = drop_last_if_odd(inst).points
        sol = cross_matching(pts)
    elif args.algo == "cross_tour":
        sol = cross_tour(pts)
    _write(args.output, render_svg(pts, sol, inst.name))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="geomax", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--kind", choices=("uniform", "clustered"), default="uniform")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, default=5)
    g.add_argument("--radius", type=float, default=0.05)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=("native", "tsplib"), default="native")
    g.add_argument("--output", "-o")
    g.set_defaults(func=cmd_gen)

    for name, algos, func in (("solve-matching", ("cross", "cross_ls"), cmd_solve_matching),
                              ("solve-tour", ("cross_tour", "cross_tour_ls"), cmd_solve_tour)):
        s = sub.add_parser(name, help=f"run {algos[0]} on an instance file")
        s.add_argument("--input", "-i", required=True)
        s.add_argument("--algo", choices=algos, default=algos[0])
        if name == "solve-matching":
            s.add_argument("--center", choices=("numeric", "combinatorial"), default="numeric")
        s.add_argument("--budget", type=int, default=1_000_000)
        s.add_argument("--time-limit", type=float)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--output", "-o", help="write the solution (pairs or order) here")
        s.add_argument("--svg", help="also render the solution to this SVG file")
        s.set_defaults(func=func)

    b = sub.add_parser("bound", help="star upper bounds for an instance")
    b.add_argument("--input", "-i", required=True)
    b.add_argument("--fwp-prime", action="store_true")
    b.add_argument("--combinatorial", action="store_true")
    b.set_defaults(func=cmd_bound)

    e = sub.add_parser("exact", help="exact optima for small instances")
    e.add_argument("--input", "-i", required=True)
    e.add_argument("--what", choices=("matching", "tour", "lp", "subtour"), default="lp")
    e.add_argument("--cap", type=int, default=2000)
    e.set_defaults(func=cmd_exact)

    r = sub.add_parser("bench", help="run an experiment matrix and write CSV")
    r.add_argument("--spec", help="JSON benchmark description")
    r.add_argument("--input", "-i", action="append", help="instance file (repeatable)")
    r.add_argument("--kind", choices=("uniform", "clustered"), default="uniform")
    r.add_argument("--n", type=int, action="append")
    r.add_argument("--k", type=int, default=5)
    r.add_argument("--radius", type=float, default=0.05)
    r.add_argument("--reps", type=int, default=1)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--algo", help=f"comma list from {','.join(bench_mod.ALGORITHMS)}")
    r.add_argument("--fwp-prime", action="store_true")
    r.add_argument("--budget", type=int)
    r.add_argument("--threads", type=int)
    r.add_argument("--output", "-o", help="CSV path (default stdout)")
    r.add_argument("--figure", help="gap chart written next to the CSV (png/svg/pdf)")
    r.add_argument("--summary", action="store_true", help="print a gap table to stderr")
    r.set_defaults(func=cmd_bench)

    v = sub.add_parser("render", help="draw an instance and a solution as SVG")
    v.add_argument("--input", "-i", required=True)
    v.add_argument("--algo", choices=("none", "cross", "cross_tour"), default="none")
    v.add_argument("--solution", help="solution file: 'i j' rows or one index per row")
    v.add_argument("--solution-kind", choices=("matching", "tour"), default="matching")
    v.add_argument("--output", "-o")
    v.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"geomax: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as exc:
        print(f"geomax: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (OSError, ValueError) as exc:
        print(f"geomax: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
