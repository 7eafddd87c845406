"""Monte Carlo strong-error studies and the information lower-bound probe.

Strong errors are estimated against a coupled reference: the quasi-Milstein
scheme run at a much finer resolution on the same master noise, so that
per-path differences measure discretization error only.  Convergence
orders come from an ordinary least-squares fit of log2(error) against
log2(n).

The probe approximates the best possible reconstruction of the terminal
state from a fixed information set (Brownian marginals on a uniform grid,
Brownian values at the jump times, and the jump times themselves) with a
leave-one-out k-nearest-neighbor regression.  Its residual is an upper
estimate of the optimal reconstruction error at that feature set; how fast
it decays with n is the quantity of interest.

Every path is a pure function of (seed, path index); results are written
into per-path slots and reduced in index order, so reports do not depend
on chunking or thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats
from sklearn.neighbors import NearestNeighbors

from .drift import JumpDiffusionProblem
from .errors import ConfigError, DomainError
from .noise import (
    DrivingNoise,
    brownian_at,
    build_jump_adapted_grid,
    jump_counts_per_cell,
    sample_driving_noise,
)
from .schemes import _integrate_euler_batch, _integrate_transformed_batch
from .transform import TransformedCoefficients, transformed_coefficients

SCHEME_NAMES = ("em", "ja-euler", "ja-qmilstein")
DEFAULT_CHUNK_SIZE = 256


@dataclass(frozen=True)
class RateFit:
    """Fitted log2-log2 slope with a residual-based 95% interval."""

    slope: float
    intercept: float
    ci: tuple[float, float]
    stderr: float


def fit_rate(
    resolutions: Sequence[int],
    errors: Sequence[float],
    std_errors: Sequence[float] | None = None,
) -> RateFit:
    """OLS fit of log2(error) on log2(n); error ~ n^slope.

    ``std_errors`` is accepted for report plumbing but does not weight the
    fit.  The confidence interval uses the t-distribution on the fit
    residuals.
    """
    res = np.asarray(resolutions, dtype=float)
    err = np.asarray(errors, dtype=float)
    if res.size < 3:
        raise ConfigError("rate fitting needs at least 3 resolutions")
    if res.shape != err.shape:
        raise ConfigError("resolutions and errors must have equal length")
    if not np.all(np.diff(res) > 0):
        raise ConfigError("resolutions must be strictly increasing")
    if not np.all(err > 0.0):
        raise DomainError(
            "errors must be positive to fit a rate; a zero error usually "
            "means too few paths or an error below the reference bias floor"
        )
    fit = stats.linregress(np.log2(res), np.log2(err))
    quantile = float(stats.t.ppf(0.975, res.size - 2))
    half_width = quantile * fit.stderr
    return RateFit(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        ci=(float(fit.slope - half_width), float(fit.slope + half_width)),
        stderr=float(fit.stderr),
    )


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-resolution Monte Carlo strong errors and the fitted rate."""

    resolutions: tuple[int, ...]
    errors: tuple[float, ...]
    std_errors: tuple[float, ...]
    slope: float
    slope_ci: tuple[float, float]
    intercept: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not all(e > 0.0 for e in self.errors):
            raise ConfigError("convergence report requires positive errors")
        if not all(
            a < b for a, b in zip(self.resolutions, self.resolutions[1:])
        ):
            raise ConfigError("resolutions must be strictly increasing")
        n_ref = self.metadata.get("n_ref")
        if n_ref is not None and n_ref % max(self.resolutions) != 0:
            raise ConfigError("n_ref must be a multiple of the largest resolution")


@dataclass(frozen=True)
class ProbeReport:
    """Leave-one-out k-NN residuals of the terminal state per feature count."""

    resolutions: tuple[int, ...]
    residuals: tuple[float, ...]
    std_errors: tuple[float, ...]
    sample_size: int
    k: int
    feature_width: int
    dropped_paths: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if any(r < 0.0 for r in self.residuals):
            raise ConfigError("probe residuals must be nonnegative")


def _chunk_ranges(paths: int, chunk_size: int) -> list[tuple[int, int]]:
    return [(s, min(s + chunk_size, paths)) for s in range(0, paths, chunk_size)]


def _run_jobs(jobs, threads: int) -> None:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for future in [pool.submit(job) for job in jobs]:
                future.result()
    else:
        for job in jobs:
            job()


def _sample_noises(
    problem: JumpDiffusionProblem, n_master: int, seed: int, start: int, stop: int
) -> list[DrivingNoise]:
    return [
        sample_driving_noise(n_master, problem.jump_intensity, seed, p)
        for p in range(start, stop)
    ]


def _padded_transformed_batch(noises: list[DrivingNoise], n: int):
    """Per-path jump-adapted grids at resolution n, padded to equal length.

    Padding repeats the terminal node, so padded cells have zero width and
    zero Brownian increment and leave the state untouched.
    """
    grids = [build_jump_adapted_grid(n, ns.jump_times) for ns in noises]
    n_paths = len(grids)
    length = max(g.nodes.size for g in grids)
    nodes = np.ones((n_paths, length))
    jump = np.zeros((n_paths, length), dtype=bool)
    dws = np.zeros((n_paths, length - 1))
    for p, (grid, ns) in enumerate(zip(grids, noises)):
        m = grid.nodes.size
        nodes[p, :m] = grid.nodes
        jump[p, :m] = grid.is_jump
        dws[p, : m - 1] = np.diff(brownian_at(ns, grid.nodes))
    return nodes, np.diff(nodes, axis=1), dws, jump[:, 1:]


def _run_transformed_batch(
    coefficients: TransformedCoefficients,
    initial_value: float,
    noises: list[DrivingNoise],
    n: int,
    milstein: bool,
):
    """Integrate a batch in the transformed coordinate; returns (nodes, Z states)."""
    nodes, dts, dws, jump_after = _padded_transformed_batch(noises, n)
    z0 = np.full(len(noises), coefficients.transform.value(initial_value))
    states, _ = _integrate_transformed_batch(
        coefficients, z0, dts, dws, jump_after, milstein
    )
    return nodes, states


def _run_euler_batch(problem: JumpDiffusionProblem, noises: list[DrivingNoise], n: int):
    """Batched non-adaptive Euler-Maruyama; returns (grid nodes, X states)."""
    grid_nodes = np.arange(n + 1) / n
    n_paths = len(noises)
    dws = np.empty((n_paths, n))
    counts = np.empty((n_paths, n))
    for p, ns in enumerate(noises):
        dws[p] = np.diff(brownian_at(ns, grid_nodes))
        counts[p] = jump_counts_per_cell(grid_nodes, ns.jump_times)
    states = _integrate_euler_batch(problem, dws, counts, n)
    return grid_nodes, states


def _positions_in_reference(
    ref_nodes: np.ndarray, coarse_nodes: np.ndarray
) -> np.ndarray:
    """Per-path positions of coarse nodes inside the (padded) reference grids."""
    n_paths, length = coarse_nodes.shape
    idx = np.empty((n_paths, length), dtype=np.int64)
    for p in range(n_paths):
        idx[p] = np.searchsorted(ref_nodes[p], coarse_nodes[p])
    return idx


def _chunk_strong_errors(
    problem: JumpDiffusionProblem,
    coefficients: TransformedCoefficients,
    scheme: str,
    resolutions: Sequence[int],
    n_ref: int,
    n_master: int,
    metric: str,
    seed: int,
    start: int,
    stop: int,
) -> dict[int, np.ndarray]:
    noises = _sample_noises(problem, n_master, seed, start, stop)
    transform = coefficients.transform
    xi = float(problem.initial_value)
    ref_nodes, ref_z = _run_transformed_batch(
        coefficients, xi, noises, n_ref, milstein=True
    )
    ref_terminal_x = transform.inverse(ref_z[:, -1])
    errors: dict[int, np.ndarray] = {}
    for n in resolutions:
        if scheme == "em":
            grid_nodes, x_states = _run_euler_batch(problem, noises, n)
            terminal_x = x_states[:, -1]
            coarse_nodes = np.broadcast_to(grid_nodes, x_states.shape)
            coarse_x = x_states
        else:
            coarse_nodes, z_states = _run_transformed_batch(
                coefficients, xi, noises, n, milstein=(scheme == "ja-qmilstein")
            )
            terminal_x = transform.inverse(z_states[:, -1])
            coarse_x = None
        if metric == "terminal":
            errors[n] = np.abs(terminal_x - ref_terminal_x)
        else:
            if coarse_x is None:
                coarse_x = transform.inverse(z_states)
            idx = _positions_in_reference(ref_nodes, coarse_nodes)
            ref_x_at = transform.inverse(np.take_along_axis(ref_z, idx, axis=1))
            errors[n] = np.max(np.abs(coarse_x - ref_x_at), axis=1)
    return errors


def _validate_study_layout(
    resolutions: Sequence[int], n_ref: int, n_master: int
) -> None:
    if len(resolutions) == 0:
        raise ConfigError("at least one resolution is required")
    if any(n < 1 for n in resolutions):
        raise ConfigError("resolutions must be positive")
    if sorted(set(resolutions)) != list(resolutions):
        raise ConfigError("resolutions must be strictly increasing")
    for n in resolutions:
        if n_ref % n != 0:
            raise ConfigError(f"resolution {n} does not divide n_ref={n_ref}")
    if n_master % n_ref != 0:
        raise ConfigError(f"n_ref={n_ref} does not divide n_master={n_master}")


def monte_carlo_strong_errors(
    problem: JumpDiffusionProblem,
    scheme: str,
    resolutions: Sequence[int],
    n_ref: int,
    paths: int,
    seed: int,
    metric: str = "terminal",
    safety_fraction: float = 0.5,
    n_master: int | None = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    threads: int = 1,
) -> dict[int, np.ndarray]:
    """Per-path absolute errors against the coupled reference, keyed by n."""
    if scheme not in SCHEME_NAMES:
        raise ConfigError(f"unknown scheme {scheme!r}; choose from {SCHEME_NAMES}")
    if metric not in ("terminal", "sup"):
        raise ConfigError(f"unknown metric {metric!r}; choose terminal or sup")
    if paths < 2:
        raise ConfigError("at least 2 paths are required")
    n_master = n_ref if n_master is None else n_master
    _validate_study_layout(resolutions, n_ref, n_master)
    coefficients = transformed_coefficients(problem.drift, safety_fraction)
    per_path = {n: np.empty(paths) for n in resolutions}

    def make_job(start: int, stop: int):
        def job() -> None:
            chunk = _chunk_strong_errors(
                problem, coefficients, scheme, resolutions,
                n_ref, n_master, metric, seed, start, stop,
            )
            for n, values in chunk.items():
                per_path[n][start:stop] = values

        return job

    jobs = [make_job(s, t) for s, t in _chunk_ranges(paths, chunk_size)]
    _run_jobs(jobs, threads)
    return per_path


def estimate_strong_error(
    problem: JumpDiffusionProblem,
    scheme: str,
    n: int,
    n_ref: int,
    paths: int,
    seed: int,
    metric: str = "terminal",
    safety_fraction: float = 0.5,
    n_master: int | None = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    threads: int = 1,
) -> tuple[float, float]:
    """Monte Carlo estimate of the strong error at one resolution.

    Returns (error, standard error); the error is the mean absolute
    terminal gap (or discrete sup gap) against the quasi-Milstein reference
    at ``n_ref`` on the same noise.
    """
    per_path = monte_carlo_strong_errors(
        problem, scheme, [n], n_ref, paths, seed, metric,
        safety_fraction, n_master, chunk_size, threads,
    )[n]
    return float(per_path.mean()), float(per_path.std(ddof=1) / math.sqrt(paths))


def convergence_study(
    problem: JumpDiffusionProblem,
    scheme: str,
    resolutions: Sequence[int],
    n_ref: int,
    paths: int,
    seed: int,
    metric: str = "terminal",
    safety_fraction: float = 0.5,
    n_master: int | None = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    threads: int = 1,
    drift_label: str = "",
) -> ConvergenceReport:
    """Estimate strong errors over a resolution ladder and fit the rate."""
    per_path = monte_carlo_strong_errors(
        problem, scheme, resolutions, n_ref, paths, seed, metric,
        safety_fraction, n_master, chunk_size, threads,
    )
    errors = tuple(float(per_path[n].mean()) for n in resolutions)
    std_errors = tuple(
        float(per_path[n].std(ddof=1) / math.sqrt(paths)) for n in resolutions
    )
    fit = fit_rate(resolutions, errors, std_errors)
    metadata = {
        "scheme": scheme,
        "drift": drift_label,
        "lambda": problem.jump_intensity,
        "xi": problem.initial_value,
        "paths": paths,
        "seed": seed,
        "n_ref": n_ref,
        "n_master": n_ref if n_master is None else n_master,
        "metric": metric,
        "safety_fraction": safety_fraction,
    }
    return ConvergenceReport(
        resolutions=tuple(int(n) for n in resolutions),
        errors=errors,
        std_errors=std_errors,
        slope=fit.slope,
        slope_ci=fit.ci,
        intercept=fit.intercept,
        metadata=metadata,
    )


def simulate_terminal_values(
    problem: JumpDiffusionProblem,
    scheme: str,
    n: int,
    paths: int,
    seed: int,
    safety_fraction: float = 0.5,
    n_master: int | None = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    threads: int = 1,
) -> np.ndarray:
    """Terminal state of the chosen scheme for each path (original coordinate)."""
    if scheme not in SCHEME_NAMES:
        raise ConfigError(f"unknown scheme {scheme!r}; choose from {SCHEME_NAMES}")
    if paths < 1:
        raise ConfigError("at least 1 path is required")
    n_master = n if n_master is None else n_master
    if n_master % n != 0:
        raise ConfigError(f"resolution {n} does not divide n_master={n_master}")
    coefficients = transformed_coefficients(problem.drift, safety_fraction)
    terminals = np.empty(paths)

    def make_job(start: int, stop: int):
        def job() -> None:
            noises = _sample_noises(problem, n_master, seed, start, stop)
            if scheme == "em":
                _, states = _run_euler_batch(problem, noises, n)
                terminals[start:stop] = states[:, -1]
            else:
                _, z_states = _run_transformed_batch(
                    coefficients, float(problem.initial_value), noises, n,
                    milstein=(scheme == "ja-qmilstein"),
                )
                terminals[start:stop] = coefficients.transform.inverse(
                    z_states[:, -1]
                )

        return job

    jobs = [make_job(s, t) for s, t in _chunk_ranges(paths, chunk_size)]
    _run_jobs(jobs, threads)
    return terminals


def poisson_quantile_width(intensity: float, tail: float = 0.999) -> int:
    """Feature width for padded jump vectors: a high Poisson quantile."""
    return int(stats.poisson.ppf(tail, intensity))


def _knn_loo_predictions(
    features: np.ndarray, targets: np.ndarray, k: int
) -> np.ndarray:
    """Leave-one-out k-NN regression values under a standardized metric.

    Coordinates are z-scored so the Euclidean metric weighs them equally
    (constant coordinates are left unscaled).  Each point is predicted by
    the mean target of its k nearest other points.
    """
    mean = features.mean(axis=0)
    scale = features.std(axis=0)
    scale[scale == 0.0] = 1.0
    standardized = (features - mean) / scale
    neighbors = NearestNeighbors(n_neighbors=k + 1, algorithm="brute")
    neighbors.fit(standardized)
    _, idx = neighbors.kneighbors(standardized)
    # Push each row's self-match (distance 0, but possibly displaced by a
    # duplicate row) to the back, keeping the k nearest others.
    is_self = idx == np.arange(idx.shape[0])[:, None]
    order = np.argsort(is_self, axis=1, kind="stable")
    others = np.take_along_axis(idx, order, axis=1)[:, :k]
    return targets[others].mean(axis=1)


def probe_lower_bound(
    problem: JumpDiffusionProblem,
    resolutions: Sequence[int],
    sample_size: int,
    k: int | None = None,
    seed: int = 0,
    n_ref: int = 512,
    safety_fraction: float = 0.5,
    chunk_size: int = 512,
    threads: int = 1,
    drift_label: str = "",
) -> ProbeReport:
    """Estimate the best terminal reconstruction error per information level.

    For each n, a path's features are the Brownian values at {i/n}, the
    Brownian values at its jump times (zero-padded to a fixed width), the
    jump count, and the jump times (same padding) -- a lossless summary of
    the Poisson path.  The target is the fine-resolution terminal state.
    The leave-one-out k-NN residual upper-bounds the optimal reconstruction
    error for these (equidistant, hence feasible but not optimal) nodes;
    paths with more jumps than the padding width are dropped and counted.
    """
    if sample_size < 1000:
        raise ConfigError("the probe needs at least 1000 paths to be meaningful")
    if k is None:
        k = math.isqrt(sample_size - 1) + 1
    if k < 1:
        raise ConfigError("k must be at least 1")
    if sample_size <= k:
        raise ConfigError("sample size must exceed k")
    resolutions = [int(n) for n in resolutions]
    _validate_study_layout(resolutions, n_ref, n_ref)
    coefficients = transformed_coefficients(problem.drift, safety_fraction)
    width = poisson_quantile_width(problem.jump_intensity)

    targets = np.empty(sample_size)
    jump_counts = np.empty(sample_size)
    jump_features = np.zeros((sample_size, 2 * width))
    grid_features = {n: np.empty((sample_size, n)) for n in resolutions}

    def make_job(start: int, stop: int):
        def job() -> None:
            noises = _sample_noises(problem, n_ref, seed, start, stop)
            _, z_states = _run_transformed_batch(
                coefficients, float(problem.initial_value), noises, n_ref,
                milstein=True,
            )
            targets[start:stop] = coefficients.transform.inverse(z_states[:, -1])
            for p, ns in enumerate(noises):
                row = start + p
                count = ns.jump_times.size
                jump_counts[row] = count
                if count <= width:
                    jump_features[row, :count] = brownian_at(ns, ns.jump_times)
                    jump_features[row, width : width + count] = ns.jump_times
                for n in resolutions:
                    grid_features[n][row] = brownian_at(
                        ns, np.arange(1, n + 1) / n
                    )

        return job

    jobs = [make_job(s, t) for s, t in _chunk_ranges(sample_size, chunk_size)]
    _run_jobs(jobs, threads)

    keep = jump_counts <= width
    dropped = int(sample_size - keep.sum())
    retained = int(keep.sum())
    if retained <= k:
        raise ConfigError("too few retained paths for the requested k")

    residual_means: list[float] = []
    residual_stderrs: list[float] = []
    for n in resolutions:
        features = np.hstack(
            [
                grid_features[n][keep],
                jump_features[keep],
                jump_counts[keep, None],
            ]
        )
        predictions = _knn_loo_predictions(features, targets[keep], k)
        residuals = np.abs(targets[keep] - predictions)
        residual_means.append(float(residuals.mean()))
        residual_stderrs.append(
            float(residuals.std(ddof=1) / math.sqrt(retained))
        )
    metadata = {
        "drift": drift_label,
        "lambda": problem.jump_intensity,
        "xi": problem.initial_value,
        "seed": seed,
        "n_ref": n_ref,
        "requested_sample_size": sample_size,
        "safety_fraction": safety_fraction,
    }
    return ProbeReport(
        resolutions=tuple(resolutions),
        residuals=tuple(residual_means),
        std_errors=tuple(residual_stderrs),
        sample_size=retained,
        k=k,
        feature_width=width,
        dropped_paths=dropped,
        metadata=metadata,
    )
