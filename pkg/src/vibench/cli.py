"""Command-line experiment runner.

    vibench run <config.json> [--out DIR] [--seeds a,b,c] [--iters N]
                [--quiet] [--no-figures]
    vibench compare <report.json> <problem.json> [--out FILE]
    vibench suite [--quiet]

Exit codes: 0 success, 1 suite failure, 2 config/usage error, 3 solver
error.  ``compare`` accepts the summary.json written by ``run`` (or any
JSON with the same trajectory layout) as its report argument.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import ConfigError, format_bounds_table, load_config, run_experiment
from .solver import SolverError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vibench",
                                     description="benchmark runner for adaptive VI solvers")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a JSON config")
    p_run.add_argument("config", help="path to the experiment config")
    p_run.add_argument("--out", help="output directory (overrides config)")
    p_run.add_argument("--seeds", help="comma-separated seed list (overrides config)")
    p_run.add_argument("--iters", type=int, help="iteration count (overrides config)")
    p_run.add_argument("--quiet", action="store_true")
    p_run.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    p_cmp = sub.add_parser("compare", help="bounds table for a finished run")
    p_cmp.add_argument("report", help="summary.json written by `vibench run`")
    p_cmp.add_argument("problem", help="problem spec JSON (or a config containing one)")
    p_cmp.add_argument("--out", help="write the table to this file instead of stdout")

    p_suite = sub.add_parser("suite", help="run the full acceptance battery")
    p_suite.add_argument("--quiet", action="store_true")
    return parser


def _cmd_run(args) -> int:
    overrides = {}
    if args.out:
        overrides["output_dir"] = args.out
    if args.seeds:
        try:
            overrides["seeds"] = tuple(int(s) for s in args.seeds.split(","))
        except ValueError:
            print(f"vibench: bad --seeds value {args.seeds!r}", file=sys.stderr)
            return 2
    if args.iters is not None:
        overrides["iterations"] = args.iters
    if args.no_figures:
        overrides["figures"] = False
    if args.quiet:
        overrides["quiet"] = True
    try:
        config = load_config(args.config, **overrides)
    except ConfigError as e:
        print(f"vibench: config error: {e}", file=sys.stderr)
        return 2
    try:
        summary = run_experiment(config)
    except ConfigError as e:
        print(f"vibench: config error: {e}", file=sys.stderr)
        return 2
    except SolverError as e:
        print(f"vibench: solver error: {e}", file=sys.stderr)
        return 3
    if not config.quiet:
        print(f"{summary['label']}: solver={summary['solver']} K={summary['iterations']}"
              f" bounds_ok={summary['bounds_ok']} -> {config.output_dir}")
    return 0


def _cmd_compare(args) -> int:
    from .problems import problem_from_dict

    try:
        with open(args.report) as f:
            report = json.load(f)
        with open(args.problem) as f:
            problem_doc = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        print(f"vibench: cannot read inputs: {e}", file=sys.stderr)
        return 2
    try:
        problem = problem_from_dict(problem_doc.get("problem", problem_doc))
    except (KeyError, ValueError, TypeError) as e:
        print(f"vibench: bad problem spec: {e}", file=sys.stderr)
        return 2
    runs = report.get("runs")
    if not runs:
        print("vibench: report carries no trajectories", file=sys.stderr)
        return 2
    tables = []
    for payload in runs:
        rows = _rows_from_payload(payload, problem)
        header = f"# solver={payload.get('solver')} seed={payload.get('seed', '')}\n"
        tables.append(header + format_bounds_table(rows))
    text = "\n".join(tables)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        print(text, end="")
    return 0


def _rows_from_payload(payload: dict, problem) -> list:
    """Rebuild compare_bounds rows from a stored summary payload."""
    import numpy as np

    from .bench import compare_bounds
    from .solver import RunReport
    from .stochastic import StochasticRunReport

    t = payload["trajectory"]
    nan = float("nan")
    common = dict(
        solver=payload["solver"],
        w_hat=np.asarray(payload["w_hat"], dtype=np.float64),
        iterations=int(payload["iterations"]),
        D=float(payload["D"]),
        L0=float(payload["L0"]),
        ks=np.asarray(t["k"], dtype=np.int64),
        L_values=np.asarray([nan if v is None else v for v in t["L"]], dtype=np.float64),
        certificates=np.asarray([nan if v is None else v for v in t["certificate"]],
                                dtype=np.float64),
        gaps=(np.asarray([nan if v is None else v for v in t["exact_gap"]], dtype=np.float64)
              if any(v is not None for v in t["exact_gap"]) else None),
        wall_time=float(payload.get("wall_time", 0.0)),
    )
    if payload.get("solver") == "ump_stochastic":
        report = StochasticRunReport(**common, seed=int(payload.get("seed", 0)),
                                     sample_count=int(payload.get("sample_count", 0)),
                                     sigma_used=float(payload.get("sigma", 0.0)))
    else:
        report = RunReport(**common)
    return compare_bounds(report, problem)


def _cmd_suite(args) -> int:
    from .acceptance import run_all

    results = run_all(quiet=args.quiet)
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "compare":
        return _cmd_compare(args)
    return _cmd_suite(args)


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
