"""Figure rendering for the report-producing commands.

Figures are written next to the CSVs they illustrate and use the Agg
backend, so no display is required.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .study import ConvergenceReport, ProbeReport


def render_convergence_figure(report: ConvergenceReport, path: Path) -> None:
    """Log-log strong error against n with the fitted slope and guide rates."""
    n = np.asarray(report.resolutions, dtype=float)
    err = np.asarray(report.errors)
    se = np.asarray(report.std_errors)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.errorbar(n, err, yerr=se, fmt="o", color="C0", capsize=3,
                label=f"{report.metadata.get('scheme', 'scheme')} error")
    fit = 2.0 ** (report.intercept + report.slope * np.log2(n))
    ax.plot(n, fit, "-", color="C0", alpha=0.7,
            label=f"fit slope {report.slope:.3f}")
    for rate, style in ((-0.75, "--"), (-0.5, ":")):
        guide = err[0] * (n / n[0]) ** rate
        ax.plot(n, guide, style, color="gray", lw=1.0,
                label=f"$n^{{{rate}}}$ guide")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log", base=2)
    ax.set_xlabel("n (grid points)")
    metric = report.metadata.get("metric", "terminal")
    ax.set_ylabel("terminal $L^1$ error" if metric == "terminal"
                  else "discrete sup $L^1$ error")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_probe_figure(report: ProbeReport, path: Path) -> None:
    """Log-log reconstruction residual against the number of grid samples."""
    n = np.asarray(report.resolutions, dtype=float)
    res = np.asarray(report.residuals)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.errorbar(n, res, yerr=np.asarray(report.std_errors), fmt="s",
                color="C1", capsize=3, label="k-NN residual")
    guide = res[0] * (n / n[0]) ** -0.75
    ax.plot(n, guide, "--", color="gray", lw=1.0, label="$n^{-3/4}$ guide")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log", base=2)
    ax.set_xlabel("n (Brownian samples)")
    ax.set_ylabel("mean $|X_1 - \\hat{g}|$")
    ax.set_title(f"M={report.sample_size}, k={report.k}")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_transform_figure(
    header: list[str], rows: list[tuple], path: Path
) -> None:
    """Two panels: the transform and its derivative, then the coefficients."""
    table = {name: np.array([row[i] for row in rows])
             for i, name in enumerate(header)}
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6.0, 6.4), sharex=True)
    top.plot(table["x"], table["G"], label="G")
    top.plot(table["x"], table["Gp"], label="G'")
    top.set_ylabel("transform")
    top.legend(fontsize=8)
    top.grid(alpha=0.3)
    bottom.plot(table["x"], table["mu_t"], label="transformed drift")
    bottom.plot(table["x"], table["sigma_t"], label="transformed diffusion")
    bottom.plot(table["x"], table["rho_t"], label="jump displacement")
    bottom.set_xlabel("x (z = G(x) on the same axis)")
    bottom.set_ylabel("coefficients at G(x)")
    bottom.legend(fontsize=8)
    bottom.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
