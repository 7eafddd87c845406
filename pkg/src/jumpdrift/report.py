"""Delimited report emission.

Every CSV starts with one comment line recording the seed, the package
version, and a hash of the effective run payload, followed by a header
row naming each column.  Floats are written with ``repr`` (shortest
round-trip form), so equal runs produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .noise import DrivingNoise
from .study import ConvergenceReport, ProbeReport
from .transform import TransformedCoefficients


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence],
    seed: int,
    run_hash: str,
) -> None:
    lines = [f"# seed={seed} version={__version__} config_hash={run_hash}"]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def transform_table(
    coefficients: TransformedCoefficients, xs: np.ndarray
) -> tuple[list[str], list[tuple]]:
    """Sampled values of the transform and the transformed coefficients.

    Each row pairs a state x with the transform value/derivative there and
    the transformed coefficients evaluated at z = G(x).
    """
    transform = coefficients.transform
    zs = transform.value(xs)
    header = ["x", "G", "Gp", "z", "mu_t", "sigma_t", "rho_t"]
    rows = list(
        zip(
            xs,
            zs,
            transform.derivative(xs),
            zs,
            coefficients.drift(zs),
            coefficients.diffusion(zs),
            coefficients.jump_increment(zs),
        )
    )
    return header, rows


def default_transform_span(breakpoints: Sequence[float], points: int = 1001) -> np.ndarray:
    """Sampling grid covering all breakpoints with a margin of 2 either side.

    The breakpoints themselves are included exactly, so tables always carry
    the fixed-point rows of the transform.
    """
    if len(breakpoints):
        lo, hi = min(breakpoints) - 2.0, max(breakpoints) + 2.0
    else:
        lo, hi = -2.0, 2.0
    return np.union1d(np.linspace(lo, hi, points), np.asarray(breakpoints, dtype=float))


def write_transform_csv(
    path: Path,
    coefficients: TransformedCoefficients,
    xs: np.ndarray,
    seed: int,
    run_hash: str,
) -> None:
    header, rows = transform_table(coefficients, xs)
    write_csv(path, header, rows, seed, run_hash)


def write_convergence_csv(
    path: Path, report: ConvergenceReport, run_hash: str
) -> None:
    rows = zip(report.resolutions, report.errors, report.std_errors)
    write_csv(
        path, ["n", "error", "stderr"], rows, report.metadata["seed"], run_hash
    )


def convergence_summary(report: ConvergenceReport) -> dict:
    return {
        "slope": report.slope,
        "slope_ci": list(report.slope_ci),
        "intercept": report.intercept,
        "resolutions": list(report.resolutions),
        "errors": list(report.errors),
        "std_errors": list(report.std_errors),
        "metadata": dict(report.metadata),
    }


def write_probe_csv(path: Path, report: ProbeReport, run_hash: str) -> None:
    rows = [
        (n, r, s, report.sample_size, report.k)
        for n, r, s in zip(report.resolutions, report.residuals, report.std_errors)
    ]
    write_csv(
        path, ["n", "residual", "stderr", "M", "k"], rows,
        report.metadata["seed"], run_hash,
    )


def write_noise_csv(path: Path, noise: DrivingNoise, run_hash: str) -> None:
    """One row per master node: time, increment of the cell ending there, flag."""
    is_jump = noise.is_jump_node
    rows = [(noise.nodes[0], 0.0, bool(is_jump[0]))]
    rows += [
        (t, dw, bool(j))
        for t, dw, j in zip(noise.nodes[1:], noise.increments, is_jump[1:])
    ]
    write_csv(path, ["t", "dW", "is_jump"], rows, noise.seed, run_hash)


def write_terminals_csv(
    path: Path, terminals: np.ndarray, seed: int, run_hash: str
) -> None:
    rows = list(enumerate(terminals))
    write_csv(path, ["path", "terminal"], rows, seed, run_hash)
