"""Report figures rendered alongside the CSV/JSON experiment output.

Kept out of the solver modules so the core has no plotting dependency;
imported lazily by the experiment runner.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .solver import gap_rate_bound, l_growth_bound
from .stochastic import StochasticRunReport, expected_gap_bound, expected_l_growth_bound


def render_figures(reports, problem, out_dir) -> list:
    """Write the adaptivity and gap-bound figures for a set of runs.

    Returns the list of files written.  Multi-seed runs get one thin line
    per seed plus the seed mean.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [
        _l_figure(reports, problem, out_dir / "l_trajectory.png"),
        _gap_figure(reports, problem, out_dir / "gap_bounds.png"),
    ]
    return written


def _class_bounds(report, problem, ks, which):
    nu, L_nu = problem.known_nu, problem.known_L
    if nu is None or L_nu is None:
        return None
    if isinstance(report, StochasticRunReport):
        if which == "L":
            return [expected_l_growth_bound(int(k), report.D, nu, L_nu,
                                            report.sigma_used, report.L0) for k in ks]
        return [expected_gap_bound(int(k), report.D, nu, L_nu,
                                   report.sigma_used, report.L0) for k in ks]
    if which == "L":
        return [l_growth_bound(int(k), report.D, nu, L_nu) for k in ks]
    return [gap_rate_bound(int(k), report.D, nu, L_nu) for k in ks]


def _seed_label(report):
    if isinstance(report, StochasticRunReport):
        return f"seed {report.seed}"
    return report.solver


def _l_figure(reports, problem, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4.2))
    many = len(reports) > 1
    for rep in reports:
        ax.loglog(rep.ks, rep.L_values, lw=0.8 if many else 1.6,
                  alpha=0.5 if many else 1.0,
                  label=None if many else _seed_label(rep))
    if many:
        L_mean = np.mean([rep.L_values for rep in reports], axis=0)
        ax.loglog(reports[0].ks, L_mean, "k-", lw=1.8, label=f"mean over {len(reports)} seeds")
    bounds = _class_bounds(reports[0], problem, reports[0].ks, "L")
    if bounds is not None:
        ax.loglog(reports[0].ks, bounds, "r--", lw=1.2, label="a priori growth bound")
    ax.set_xlabel("iteration k")
    ax.set_ylabel("adaptive coefficient L")
    ax.set_title(f"{problem.label}: adaptive coefficient")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _gap_figure(reports, problem, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4.2))
    rep0 = reports[0]
    many = len(reports) > 1
    if np.isfinite(rep0.certificates).any():
        if many:
            cert_mean = np.mean([rep.certificates for rep in reports], axis=0)
            ax.loglog(rep0.ks, cert_mean, "b-", lw=1.6, label="certificate (seed mean)")
        else:
            ax.loglog(rep0.ks, rep0.certificates, "b-", lw=1.6, label="certificate 2D^2L/k")
    if rep0.gaps is not None:
        if many:
            gap_mean = np.mean([rep.gaps for rep in reports], axis=0)
            ax.loglog(rep0.ks, np.maximum(gap_mean, 1e-300), "g-", lw=1.6, label="exact gap (seed mean)")
        else:
            ax.loglog(rep0.ks, np.maximum(rep0.gaps, 1e-300), "g-", lw=1.6, label="exact gap")
    bounds = _class_bounds(rep0, problem, rep0.ks, "gap")
    if bounds is not None:
        ax.loglog(rep0.ks, bounds, "r--", lw=1.2, label="worst-case bound")
    ax.set_xlabel("iteration k")
    ax.set_ylabel("restricted gap")
    ax.set_title(f"{problem.label}: gap vs certificates")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
