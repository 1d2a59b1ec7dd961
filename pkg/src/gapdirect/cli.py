"""Command-line interface: gen, solve, bench and profile subcommands."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .bench import (read_records_csv, run_suite, write_profile_csv, write_solve_trace_csv,
                    write_suite_outputs)
from .direct import LbarMode
from .generators import GenSpec, generate_suite
from .problems import load_problem
from .solver import evals_to_gaps, solve


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid float list {text!r}") from exc


def _parse_lbar(text: str) -> LbarMode:
    try:
        return LbarMode.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gapdirect",
        description="Solve equilibrium problems over boxes by globally minimizing "
                    "a regularized gap function with DIRECT-type partitioning.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a suite of random problem instances")
    gen.add_argument("--class", dest="klass", required=True, choices=["affine-vi", "trig-vi"])
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)

    slv = sub.add_parser("solve", help="solve one problem file")
    slv.add_argument("--problem", required=True)
    slv.add_argument("--algo", required=True, choices=["direct", "ldirect"])
    slv.add_argument("--alpha", type=float, default=1.0)
    slv.add_argument("--global-budget", type=int, default=500)
    slv.add_argument("--local-budget", type=int, default=100)
    slv.add_argument("--eps", type=float, default=1e-4)
    slv.add_argument("--eta", type=float, default=1e-4)
    slv.add_argument("--lbar", type=_parse_lbar, default=LbarMode.analytic(),
                     metavar="analytic|constant:<v>|slope:<f>")
    slv.add_argument("--trace", default=None, metavar="CSV",
                     help="write the history/summary CSV (a .png figure lands alongside)")
    slv.add_argument("--starts", type=int, default=1,
                     help="split the local budget across this many best centers")

    ben = sub.add_parser("bench", help="run a solver matrix over a suite directory")
    ben.add_argument("--suite", required=True)
    ben.add_argument("--algos", default="direct,ldirect")
    ben.add_argument("--alpha", type=float, default=1.0)
    ben.add_argument("--global-budget", type=int, default=500)
    ben.add_argument("--local-budget", type=int, default=100)
    ben.add_argument("--tau", type=float, default=1e-3)
    ben.add_argument("--gates", type=_parse_floats, default=(1e-1, 1e-3, 1e-5))
    ben.add_argument("--out", required=True)

    pro = sub.add_parser("profile", help="compute profiles from a records CSV")
    pro.add_argument("--records", required=True)
    pro.add_argument("--kind", required=True, choices=["perf", "data"])
    pro.add_argument("--tau", type=float, default=1e-3)
    pro.add_argument("--out", required=True)
    return parser


def _cmd_gen(args) -> int:
    spec = GenSpec(kind=args.klass, n=args.n, count=args.count, seed=args.seed)
    paths = generate_suite(spec, args.out)
    print(f"wrote {len(paths)} {spec.kind} instances (n={spec.n}, seed={spec.seed}) to {args.out}")
    return 0


def _cmd_solve(args) -> int:
    problem = load_problem(args.problem)
    result = solve(problem, args.algo, alpha=args.alpha,
                   global_budget=args.global_budget, local_budget=args.local_budget,
                   epsilon=args.eps, eta=args.eta, lbar_mode=args.lbar, starts=args.starts)
    gates = (1e-1, 1e-3, 1e-5)
    hits = evals_to_gaps(result, gates)
    print(f"problem {result.problem_id} [{result.variant}, alpha={result.alpha:g}]")
    print(f"  best gap value {result.best_phi:.6e} after {result.evals_used} evaluations")
    if result.gap_bound is not None:
        print(f"  optimality-gap certificate {result.gap_bound:.6e}")
    for gate, hit in zip(gates, hits):
        shown = ">budget" if math.isinf(hit) else f"{int(hit)}"
        print(f"  evals to gap <= {gate:g}: {shown}")
    if args.trace:
        trace_path = Path(args.trace)
        write_solve_trace_csv(result, trace_path)
        from .plotting import plot_gap_histories

        png = trace_path.with_suffix(".png")
        plot_gap_histories({result.variant: result.history}, png,
                           title=result.problem_id)
        print(f"  trace written to {trace_path} (figure: {png})")
    return 0


def _cmd_bench(args) -> int:
    variants = [v.strip() for v in args.algos.split(",") if v.strip()]
    records = run_suite(args.suite, variants, alpha=args.alpha,
                        global_budget=args.global_budget, local_budget=args.local_budget,
                        tau=args.tau, gates=args.gates)
    paths = write_suite_outputs(records, args.out, tau=args.tau, gates=args.gates)
    solved = sum(1 for r in records if r.solved)
    print(f"{len(records)} runs ({solved} solved at tau={args.tau:g}); outputs in {args.out}:")
    for name, path in sorted(paths.items()):
        print(f"  {name}: {path}")
    failures = [r for r in records if r.error]
    for record in failures:
        print(f"  FAILED {record.problem_id} [{record.variant}]: {record.error}")
    return 0


def _cmd_profile(args) -> int:
    from .bench import data_profile, performance_profile

    records = read_records_csv(args.records)
    base_dir = Path(args.records).parent
    if args.kind == "perf":
        curves = performance_profile(records, args.tau, base_dir=base_dir)
    else:
        curves = data_profile(records, args.tau, base_dir=base_dir)
    out = Path(args.out)
    write_profile_csv(curves, args.kind, out)
    from .plotting import plot_profiles

    png = out.with_suffix(".png")
    plot_profiles(curves, args.kind, png)
    print(f"{args.kind} profile written to {out} (figure: {png})")
    return 0


_COMMANDS = {"gen": _cmd_gen, "solve": _cmd_solve, "bench": _cmd_bench, "profile": _cmd_profile}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
