"""Command line for batch experiments.

Subcommands:
  generate   write random task-set JSON files
  analyze    print the schedulability verdict and response times of a file
  optimize   run one method on a task-set file, write the solution JSON
  benchmark  compare both methods over generated sets, write CSV + summary

Exit codes: 0 success, 1 usage or input error, 2 infeasible-input outcome
(unschedulable set for ``analyze``, infeasible initial point for ``optimize``).
All output uses UTF-8, LF line endings, and 6-significant-digit numbers so
repeated runs diff cleanly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import analyze, simulate_worst_response
from .bench import GenParams, generate_taskset, run_benchmark, write_csv, write_summary
from .model import load_problem, save_problem, utilization, validate_taskset
from .orchestrator import METHODS, RunConfig, make_problem, optimize, save_solution

__all__ = ["main"]


def _fmt(x: float) -> str:
    return format(x, ".6g")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this surface reserves 2 for
    infeasible outcomes, so remap usage errors to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_generation_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-tasks", type=int, default=20, help="tasks per set")
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")
    p.add_argument("--wcet-min", type=int, default=1, help="smallest WCET")
    p.add_argument("--wcet-max", type=int, default=100, help="largest WCET")
    p.add_argument("--cap-factor", type=float, default=5.0,
                   help="period upper bound as a multiple of the WCET sum")
    p.add_argument("--alpha-max", type=float, default=1000.0,
                   help="period-weight upper bound (lower bound is 1)")
    p.add_argument("--beta-max", type=float, default=10000.0,
                   help="response-time-weight upper bound (lower bound is 1)")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="northopt",
        description="Period/priority co-design with black-box schedulability constraints.",
    )
    parser.add_argument("--version", action="version", version=f"northopt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("generate", formatter_class=fmt,
                       help="write random task-set JSON files")
    _add_generation_flags(p)
    p.add_argument("--n-sets", type=int, default=1, help="number of files to write")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("analyze", formatter_class=fmt,
                       help="print verdict and response times for a task-set file")
    p.add_argument("--input", required=True, help="task-set JSON file")
    p.add_argument("--simulate", action="store_true",
                   help="also cross-check with the discrete-event simulator "
                        "(integer task sets only)")

    p = sub.add_parser("optimize", formatter_class=fmt,
                       help="optimize one task-set file with the chosen method")
    p.add_argument("--input", required=True, help="task-set JSON file")
    p.add_argument("--method", choices=METHODS, default="north+rm")
    p.add_argument("--k", type=float, default=1.0, help="k of the dkc policy")
    p.add_argument("--seed", type=int, default=0, help="seed recorded in the solution")
    p.add_argument("--max-outer", type=int, default=50, help="outer iteration cap")
    p.add_argument("--out", required=True, help="solution JSON path")

    p = sub.add_parser("benchmark", formatter_class=fmt,
                       help="compare north and north+rm over generated sets")
    _add_generation_flags(p)
    p.add_argument("--n-sets", type=int, default=100, help="number of generated sets")
    p.add_argument("--max-outer", type=int, default=50, help="outer iteration cap")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                   help="parallel worker processes")
    p.add_argument("--out", required=True, help="output directory for CSV and summary")

    return parser


def _gen_params(args: argparse.Namespace) -> GenParams:
    return GenParams(
        n_tasks=args.n_tasks,
        wcet_range=(args.wcet_min, args.wcet_max),
        period_cap_factor=args.cap_factor,
        alpha_range=(1.0, args.alpha_max),
        beta_range=(1.0, args.beta_max),
        seed=args.seed,
    )


def _cmd_generate(args: argparse.Namespace) -> int:
    params = _gen_params(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.n_sets):
        ts, weights, bounds = generate_taskset(params, i)
        save_problem(out / f"taskset_{i:04d}.json", ts, weights, bounds)
    print(f"wrote {args.n_sets} task set(s) to {out}")
    return 0


def _load(path: str):
    try:
        ts, weights, bounds = load_problem(path)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(1)
    violations = validate_taskset(ts, bounds)
    if violations:
        for v in violations:
            print(f"error: {v}", file=sys.stderr)
        raise SystemExit(1)
    return ts, weights, bounds


def _cmd_analyze(args: argparse.Namespace) -> int:
    ts, _, _ = _load(args.input)
    verdict = analyze(ts)
    print(f"schedulable: {'yes' if verdict.schedulable else 'no'}")
    print(f"utilization: {_fmt(utilization(ts))}")
    print("response times: " + " ".join(_fmt(r) for r in verdict.response_times))
    if verdict.miss_set:
        print("deadline misses: " + " ".join(str(i) for i in sorted(verdict.miss_set)))
    if args.simulate:
        try:
            worst = simulate_worst_response(ts)
        except (ValueError, RuntimeError) as exc:
            print(f"error: simulation failed: {exc}", file=sys.stderr)
            return 1
        print("simulated worst responses: " + " ".join(_fmt(w) for w in worst))
    return 0 if verdict.schedulable else 2


def _cmd_optimize(args: argparse.Namespace) -> int:
    ts, weights, bounds = _load(args.input)
    problem = make_problem(ts, weights, bounds)
    cfg = RunConfig(method=args.method, dkc_k=args.k, seed=args.seed,
                    max_outer=args.max_outer)
    sol = optimize(ts, problem, cfg)
    save_solution(args.out, sol, weights, bounds)
    print(f"method={sol.method} status={sol.status} "
          f"objective={_fmt(sol.objective_value)} "
          f"outer_iterations={len(sol.trace) - 1}")
    return 2 if sol.status == "initial_infeasible" else 0


def _cmd_benchmark(args: argparse.Namespace) -> int:
    params = _gen_params(args)
    cfg = RunConfig(max_outer=args.max_outer)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = run_benchmark(params, args.n_sets, cfg, workers=max(1, args.workers))
    write_csv(report, out / "results.csv")
    write_summary(report.summary, out / "summary.json")
    s = report.summary
    print(f"sets={s['count']} excluded={s['excluded']} "
          f"mean_gap={_fmt(s['mean_gap_percent'])}% "
          f"median_gap={_fmt(s['median_gap_percent'])}%")
    print(f"wrote {out / 'results.csv'} and {out / 'summary.json'}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    commands = {
        "generate": _cmd_generate,
        "analyze": _cmd_analyze,
        "optimize": _cmd_optimize,
        "benchmark": _cmd_benchmark,
    }
    try:
        args = parser.parse_args(argv)
        return commands[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
