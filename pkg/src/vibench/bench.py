"""Experiment runner behind the ``vibench`` CLI.

Loads a JSON experiment config, runs the requested solver (adaptive,
adaptive-stochastic over a seed list, or the fixed-step extragradient
baseline), and writes into the output directory:

    trajectory.csv      columns: k, L_k, certificate, exact_gap_or_blank,
                        theorem_bound (first seed for multi-seed runs)
    trajectory_seed<S>.csv   per-seed trajectories (stochastic, multi-seed)
    summary.json        final metrics, bound-satisfaction flags, wall time,
                        seed list, and the full logged trajectories
    config.echo.json    the effective config after CLI overrides
    *.png               report figures (unless disabled)

Config errors surface before anything is written; solver errors still
produce a summary recording the failing iteration.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baseline import extragradient_fixed
from .gaps import default_gap_fn
from .problems import VIProblem, problem_from_dict
from .solver import RunReport, SolverError, gap_rate_bound, l_growth_bound, run
from .stochastic import StochasticRunReport, expected_gap_bound, expected_l_growth_bound, run_stochastic

SOLVERS = ("ump", "ump_stochastic", "extragradient_fixed")

# relative slack for dominance verdicts; covers float accumulation only
VERDICT_RTOL = 1e-9


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    problem_spec: dict
    solver: str
    iterations: int
    seeds: tuple = ()
    dense_until: int = 1000
    growth: float = 1.1
    output_dir: str = "out"
    L0_override: float | None = None
    D_override: float | None = None
    noise_sigma: float = 0.0
    figures: bool = True
    quiet: bool = False
    problem: VIProblem = field(init=False)

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}; expected one of {SOLVERS}")
        self.iterations = int(self.iterations)
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        self.seeds = tuple(int(s) for s in self.seeds)
        if self.solver == "ump_stochastic" and not self.seeds:
            raise ConfigError("stochastic solver requires a non-empty seed list")
        for name in ("L0_override", "D_override"):
            v = getattr(self, name)
            if v is not None and not float(v) > 0:
                raise ConfigError(f"{name} must be positive when present")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be >= 0")
        if self.dense_until < 1 or self.growth <= 1.0:
            raise ConfigError("log cadence requires dense_until >= 1 and growth > 1")
        try:
            self.problem = problem_from_dict(self.problem_spec)
        except (KeyError, ValueError, TypeError) as e:
            raise ConfigError(f"invalid problem spec: {e}") from e

    def to_dict(self) -> dict:
        return {
            "problem": self.problem_spec,
            "solver": self.solver,
            "iterations": self.iterations,
            "seeds": list(self.seeds),
            "log_cadence": {"dense_until": self.dense_until, "growth": self.growth},
            "output_dir": self.output_dir,
            "L0_override": self.L0_override,
            "D_override": self.D_override,
            "noise_sigma": self.noise_sigma,
            "figures": self.figures,
        }


def load_config(path, **overrides) -> ExperimentConfig:
    """Parse an experiment config file; raises ConfigError on any defect."""
    try:
        with open(path) as f:
            raw = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON config: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return parse_config(raw, **overrides)


def parse_config(raw: dict, **overrides) -> ExperimentConfig:
    known = {"problem", "solver", "iterations", "seeds", "log_cadence", "output_dir",
             "L0_override", "D_override", "noise_sigma", "figures"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("problem", "solver", "iterations"):
        if key not in raw:
            raise ConfigError(f"config is missing required key {key!r}")
    problem_spec = raw["problem"]
    if not isinstance(problem_spec, dict):
        raise ConfigError("config 'problem' must be an object")
    cadence = raw.get("log_cadence", {}) or {}
    sigma = raw.get("noise_sigma", problem_spec.get("noise_sigma", 0.0))
    cfg = dict(
        problem_spec=problem_spec,
        solver=raw["solver"],
        iterations=raw["iterations"],
        seeds=raw.get("seeds", ()),
        dense_until=cadence.get("dense_until", 1000),
        growth=cadence.get("growth", 1.1),
        output_dir=raw.get("output_dir", "out"),
        L0_override=raw.get("L0_override"),
        D_override=raw.get("D_override"),
        noise_sigma=sigma,
        figures=raw.get("figures", True),
    )
    cfg.update(overrides)
    try:
        return ExperimentConfig(**cfg)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return ""
    return f"{x:.17g}"


def compare_bounds(report: RunReport, problem: VIProblem) -> list:
    """Per-checkpoint comparison of the run against the known-class bounds.

    Each row carries the logged k, the adaptive coefficient and its a
    priori growth bound, the certificate and the worst-case gap bound, the
    exact gap when one was logged, and a dominance verdict (True/False, or
    "n/a" when the problem declares no constants or the solver admits no
    certificate).  For stochastic runs the bounds are the in-expectation
    ones evaluated with the run's own L0 and sigma; single paths may
    exceed them.
    """
    nu, L_nu = problem.known_nu, problem.known_L
    have_class = nu is not None and L_nu is not None
    is_stochastic = isinstance(report, StochasticRunReport)
    certified = report.solver in ("ump", "ump_stochastic")
    rows = []
    for i, k in enumerate(report.ks):
        k = int(k)
        L = float(report.L_values[i])
        cert = float(report.certificates[i])
        gap = float(report.gaps[i]) if report.gaps is not None else None
        l_bound = theorem = None
        if have_class:
            if is_stochastic:
                l_bound = expected_l_growth_bound(k, report.D, nu, L_nu,
                                                  report.sigma_used, report.L0)
                theorem = expected_gap_bound(k, report.D, nu, L_nu,
                                             report.sigma_used, report.L0)
            else:
                l_bound = l_growth_bound(k, report.D, nu, L_nu)
                theorem = gap_rate_bound(k, report.D, nu, L_nu)
        checks = []
        if certified and l_bound is not None and not math.isnan(L):
            checks.append(L <= l_bound * (1 + VERDICT_RTOL))
        if certified and theorem is not None and not math.isnan(cert):
            checks.append(cert <= theorem * (1 + VERDICT_RTOL))
        if certified and gap is not None and not math.isnan(cert):
            checks.append(gap <= cert * (1 + VERDICT_RTOL) + 1e-12)
        verdict = all(checks) if checks else "n/a"
        rows.append({
            "k": k,
            "L": L if not math.isnan(L) else None,
            "l_bound": l_bound,
            "certificate": cert if not math.isnan(cert) else None,
            "theorem_bound": theorem,
            "exact_gap": gap,
            "verdict": verdict,
        })
    return rows


def trajectory_rows(report: RunReport, problem: VIProblem) -> list:
    """Rows for trajectory.csv: k, L_k, certificate, exact_gap_or_blank, theorem_bound.

    The theorem_bound column always carries the deterministic worst-case
    rate for the declared problem class (blank without declared
    constants), whatever the solver, so zero-noise stochastic runs emit
    byte-identical trajectories to deterministic ones.  Solver-specific
    expectation bounds live in the summary and the compare table.
    """
    nu, L_nu = problem.known_nu, problem.known_L
    have_class = nu is not None and L_nu is not None
    rows = []
    for i, k in enumerate(report.ks):
        k = int(k)
        theorem = gap_rate_bound(k, report.D, nu, L_nu) if have_class else None
        gap = float(report.gaps[i]) if report.gaps is not None else None
        L = float(report.L_values[i])
        cert = float(report.certificates[i])
        rows.append([
            k,
            _fmt(L if not math.isnan(L) else None),
            _fmt(cert if not math.isnan(cert) else None),
            _fmt(gap),
            _fmt(theorem),
        ])
    return rows


def _write_csv(path: Path, rows: list) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k", "L_k", "certificate", "exact_gap_or_blank", "theorem_bound"])
    writer.writerows(rows)
    path.write_text(buf.getvalue())


def _report_payload(report: RunReport, problem: VIProblem) -> dict:
    rows = compare_bounds(report, problem)
    verdicts = [r["verdict"] for r in rows]
    payload = {
        "solver": report.solver,
        "iterations": report.iterations,
        "D": report.D,
        "L0": report.L0,
        "w_hat": report.w_hat.tolist(),
        "wall_time": report.wall_time,
        "warnings": list(report.warnings),
        "final_L": float(report.L_values[-1]) if len(report.L_values) else None,
        "final_certificate": _none_if_nan(float(report.certificates[-1])),
        "final_gap": float(report.gaps[-1]) if report.gaps is not None else None,
        "bounds_ok": all(v is True for v in verdicts) if any(v != "n/a" for v in verdicts) else None,
        "trajectory": {
            "k": [r["k"] for r in rows],
            "L": [r["L"] for r in rows],
            "certificate": [r["certificate"] for r in rows],
            "exact_gap": [r["exact_gap"] for r in rows],
            "l_bound": [r["l_bound"] for r in rows],
            "theorem_bound": [r["theorem_bound"] for r in rows],
            "verdict": verdicts,
        },
    }
    if isinstance(report, StochasticRunReport):
        payload.update(seed=report.seed, sample_count=report.sample_count,
                       sigma=report.sigma_used)
    return payload


def _none_if_nan(x: float):
    return None if math.isnan(x) else x


def run_experiment(config: ExperimentConfig) -> dict:
    """Execute one experiment and write its output files.

    Returns the summary dict.  Raises ConfigError before any file is
    written; on SolverError a summary recording the failing iteration is
    still written, then the error propagates.
    """
    problem = config.problem
    gap_fn = default_gap_fn(problem)
    out = Path(config.output_dir)
    kwargs = dict(gap_fn=gap_fn, dense_until=config.dense_until, growth=config.growth,
                  D_override=config.D_override)
    try:
        if config.solver == "ump":
            reports = [run(problem, config.iterations, config.L0_override, **kwargs)]
        elif config.solver == "extragradient_fixed":
            if problem.known_nu != 1.0 or not problem.known_L or problem.known_L <= 0:
                raise ConfigError(
                    "extragradient_fixed needs a declared Lipschitz constant (nu = 1) "
                    "to set its step; this problem declares none"
                )
            reports = [extragradient_fixed(problem, config.iterations,
                                           step=1.0 / problem.known_L, **kwargs)]
        else:
            def one_seed(seed):
                return run_stochastic(problem, config.iterations, seed,
                                      sigma=config.noise_sigma,
                                      L0_override=config.L0_override, **kwargs)

            if len(config.seeds) == 1:
                reports = [one_seed(config.seeds[0])]
            else:
                with ThreadPoolExecutor(max_workers=min(8, len(config.seeds))) as pool:
                    reports = list(pool.map(one_seed, config.seeds))
    except SolverError as e:
        out.mkdir(parents=True, exist_ok=True)
        summary = {
            "status": "solver_error",
            "message": str(e),
            "failing_iteration": e.iteration,
            "solver": config.solver,
            "label": problem.label,
        }
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
        (out / "config.echo.json").write_text(json.dumps(config.to_dict(), indent=2) + "\n")
        raise

    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "trajectory.csv", trajectory_rows(reports[0], problem))
    if config.solver == "ump_stochastic" and len(reports) > 1:
        for rep in reports:
            _write_csv(out / f"trajectory_seed{rep.seed}.csv", trajectory_rows(rep, problem))

    payloads = [_report_payload(rep, problem) for rep in reports]
    summary = {
        "status": "ok",
        "label": problem.label,
        "solver": config.solver,
        "iterations": config.iterations,
        "seeds": list(config.seeds),
        "noise_sigma": config.noise_sigma if config.solver == "ump_stochastic" else None,
        "D": reports[0].D,
        "known_nu": problem.known_nu,
        "known_L": problem.known_L,
        "wall_time": sum(rep.wall_time for rep in reports),
        "bounds_ok": _combine_flags([p["bounds_ok"] for p in payloads]),
        "runs": payloads,
    }
    if config.solver == "ump_stochastic" and reports[0].gaps is not None:
        finals = np.array([rep.gaps[-1] for rep in reports], dtype=np.float64)
        summary["mean_final_gap"] = float(finals.mean())
        summary["stderr_final_gap"] = (
            float(finals.std(ddof=1) / math.sqrt(len(finals))) if len(finals) > 1 else 0.0
        )
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    (out / "config.echo.json").write_text(json.dumps(config.to_dict(), indent=2) + "\n")

    if config.figures:
        from . import plots

        summary["figures"] = [str(p) for p in plots.render_figures(reports, problem, out)]
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def _combine_flags(flags: list):
    known = [f for f in flags if f is not None]
    if not known:
        return None
    return all(known)


def format_bounds_table(rows: list) -> str:
    """CSV rendering of compare_bounds rows."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k", "L_k", "l_bound", "L_ok", "certificate", "theorem_bound",
                     "cert_ok", "exact_gap", "gap_ok", "verdict"])
    for r in rows:
        l_ok = cert_ok = gap_ok = ""
        if r["l_bound"] is not None and r["L"] is not None:
            l_ok = r["L"] <= r["l_bound"] * (1 + VERDICT_RTOL)
        if r["theorem_bound"] is not None and r["certificate"] is not None:
            cert_ok = r["certificate"] <= r["theorem_bound"] * (1 + VERDICT_RTOL)
        if r["exact_gap"] is not None and r["certificate"] is not None:
            gap_ok = r["exact_gap"] <= r["certificate"] * (1 + VERDICT_RTOL) + 1e-12
        writer.writerow([
            r["k"], _fmt(r["L"]), _fmt(r["l_bound"]), l_ok,
            _fmt(r["certificate"]), _fmt(r["theorem_bound"]), cert_ok,
            _fmt(r["exact_gap"]), gap_ok, r["verdict"],
        ])
    return buf.getvalue()
