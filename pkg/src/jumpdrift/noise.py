"""Reproducible driving noise: jump times, Brownian paths, adapted grids.

Randomness comes from counter-based Philox streams keyed by
(experiment seed, path index, stream id), one stream each for the jump
count, the jump locations, and the Gaussian increments.  Every draw goes
through explicit inverse-CDF constructions on open-interval uniforms, so a
path is a pure function of its key regardless of platform, thread count,
or batching.

Brownian paths are materialized once on a fine master grid (the uniform
grid refined by the path's jump times).  Coarser resolutions never
resample: their increments are differences of the master path values at
shared nodes, which makes refinement coupling exact by construction.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox
from scipy.special import ndtri

from .errors import CouplingError, DomainError, NumericsError

logger = logging.getLogger(__name__)

_STREAM_JUMP_COUNT = 0
_STREAM_JUMP_TIMES = 1
_STREAM_GAUSSIAN = 2
_STREAMS_PER_PATH = 4
_POISSON_ITERATION_CAP = 10_000_000


def _stream(seed: int, path_index: int, stream_id: int) -> Generator:
    if path_index < 0:
        raise DomainError("path_index must be nonnegative")
    key = np.array(
        [np.uint64(seed % 2**64), np.uint64(path_index * _STREAMS_PER_PATH + stream_id)],
        dtype=np.uint64,
    )
    return Generator(Philox(key=key))


def _open_uniforms(gen: Generator, size: int) -> np.ndarray:
    # (k + 0.5) / 2^53 lies strictly inside (0, 1), so inverse CDFs below
    # never see 0 or 1; these dyadic+half values also never collide with
    # the dyadic nodes of a power-of-two grid.
    return (gen.integers(0, 2**53, size=size).astype(np.float64) + 0.5) / 2**53


def _poisson_from_uniform(u: float, intensity: float) -> int:
    # CDF inversion; explicit so the draw is identically reproducible
    # everywhere, not tied to a library's rejection sampler.
    term = math.exp(-intensity)
    cumulative = term
    k = 0
    while u > cumulative:
        k += 1
        term *= intensity / k
        cumulative += term
        if term == 0.0 or k >= _POISSON_ITERATION_CAP:
            raise NumericsError("Poisson inversion failed to terminate")
    return k


def sample_jump_count(intensity: float, seed: int, path_index: int) -> int:
    """Poisson(intensity) jump count for one path, by CDF inversion."""
    if not (intensity > 0.0 and np.isfinite(intensity)):
        raise DomainError("intensity must be a positive real")
    u = float(_open_uniforms(_stream(seed, path_index, _STREAM_JUMP_COUNT), 1)[0])
    return _poisson_from_uniform(u, intensity)


def sample_jump_times(intensity: float, seed: int, path_index: int) -> np.ndarray:
    """Strictly increasing jump epochs in (0, 1) for one path.

    Uses the order-statistics construction: draw the Poisson count, then
    sort that many uniforms.  Exact ties (astronomically rare with 53-bit
    uniforms) are resolved by nudging the later epoch up one ulp.
    """
    count = sample_jump_count(intensity, seed, path_index)
    if count == 0:
        return np.empty(0, dtype=float)
    times = np.sort(
        _open_uniforms(_stream(seed, path_index, _STREAM_JUMP_TIMES), count)
    )
    for i in range(1, count):
        if times[i] <= times[i - 1]:
            times[i] = np.nextafter(times[i - 1], 1.0)
            logger.warning(
                "duplicate jump epoch at path %d nudged by one ulp", path_index
            )
    return times


@dataclass(frozen=True)
class DrivingNoise:
    """One realization of the driving pair (Brownian motion, Poisson jumps).

    ``nodes`` is the master grid: the uniform grid of the stated resolution
    refined by the path's jump times.  ``values`` holds the Brownian path at
    the nodes (starting at 0) and is the single source of truth for every
    coarser resolution; ``increments`` are its first differences, one per
    cell with variance equal to the cell width.
    """

    jump_times: np.ndarray
    nodes: np.ndarray
    values: np.ndarray
    increments: np.ndarray
    seed: int
    path_index: int
    master_resolution: int

    @property
    def path_seed(self) -> tuple[int, int]:
        return (self.seed, self.path_index)

    @property
    def is_jump_node(self) -> np.ndarray:
        return np.isin(self.nodes, self.jump_times)

    def terminal_brownian(self) -> float:
        return float(self.values[-1])


def sample_brownian_on_master(
    n_master: int,
    jump_times: np.ndarray,
    seed: int,
    path_index: int,
) -> DrivingNoise:
    """Draw the Brownian path on the jump-refined uniform grid.

    One Gaussian per cell, scaled by the square root of the cell width;
    Gaussians come from the path's dedicated stream via the inverse normal
    CDF.
    """
    if n_master < 1:
        raise DomainError("master resolution must be at least 1")
    jumps = np.asarray(jump_times, dtype=float)
    if jumps.size and not (np.all(jumps > 0.0) and np.all(jumps < 1.0)):
        raise DomainError("jump times must lie strictly inside (0, 1)")
    nodes = np.union1d(np.arange(n_master + 1) / n_master, jumps)
    widths = np.diff(nodes)
    gen = _stream(seed, path_index, _STREAM_GAUSSIAN)
    gaussians = ndtri(_open_uniforms(gen, widths.size))
    values = np.concatenate(([0.0], np.cumsum(gaussians * np.sqrt(widths))))
    return DrivingNoise(
        jump_times=jumps,
        nodes=nodes,
        values=values,
        increments=np.diff(values),
        seed=seed,
        path_index=path_index,
        master_resolution=n_master,
    )


def sample_driving_noise(
    n_master: int,
    intensity: float,
    seed: int,
    path_index: int,
) -> DrivingNoise:
    """Draw jump times and the Brownian master path for one path index."""
    jumps = sample_jump_times(intensity, seed, path_index)
    return sample_brownian_on_master(n_master, jumps, seed, path_index)


@dataclass(frozen=True)
class JumpAdaptedGrid:
    """Uniform grid of a given resolution refined by realized jump times."""

    nodes: np.ndarray
    is_jump: np.ndarray
    resolution: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if self.nodes.shape != self.is_jump.shape:
            raise DomainError("nodes and is_jump must have equal length")


def build_jump_adapted_grid(n: int, jump_times: np.ndarray) -> JumpAdaptedGrid:
    """Sorted union of {i/n} and the jump times, with per-node jump flags."""
    if n < 1:
        raise DomainError("grid resolution must be at least 1")
    jumps = np.asarray(jump_times, dtype=float)
    if jumps.size and not (np.all(jumps > 0.0) and np.all(jumps < 1.0)):
        raise DomainError("jump times must lie strictly inside (0, 1)")
    nodes = np.union1d(np.arange(n + 1) / n, jumps)
    return JumpAdaptedGrid(
        nodes=nodes, is_jump=np.isin(nodes, jumps), resolution=n
    )


def equidistant_grid(n: int) -> JumpAdaptedGrid:
    """Uniform grid with no jump refinement (all jump flags false)."""
    if n < 1:
        raise DomainError("grid resolution must be at least 1")
    nodes = np.arange(n + 1) / n
    return JumpAdaptedGrid(
        nodes=nodes, is_jump=np.zeros(n + 1, dtype=bool), resolution=n
    )


def node_indices(noise: DrivingNoise, nodes: np.ndarray) -> np.ndarray:
    """Positions of the given nodes inside the master grid (exact match)."""
    idx = np.searchsorted(noise.nodes, nodes)
    valid = (idx < noise.nodes.size) & (noise.nodes[np.minimum(idx, noise.nodes.size - 1)] == nodes)
    if not np.all(valid):
        missing = np.asarray(nodes)[~valid]
        raise CouplingError(
            f"nodes {missing[:4]} are not master-grid nodes; the coarse "
            "resolution must divide the master resolution"
        )
    return idx


def brownian_at(noise: DrivingNoise, nodes: np.ndarray) -> np.ndarray:
    """Brownian path values at master-grid nodes."""
    return noise.values[node_indices(noise, nodes)]


def aggregate_increments(noise: DrivingNoise, grid: JumpAdaptedGrid) -> np.ndarray:
    """Brownian increments per cell of a coarse grid, exactly coupled.

    Increments are first differences of the shared master path values, so
    aggregating through any intermediate resolution yields bit-identical
    results.
    """
    return np.diff(brownian_at(noise, grid.nodes))


def jump_counts_per_cell(grid_nodes: np.ndarray, jump_times: np.ndarray) -> np.ndarray:
    """Number of jumps in each half-open cell (left, right] of a grid."""
    positions = np.searchsorted(np.asarray(jump_times, dtype=float), grid_nodes, side="right")
    return np.diff(positions)


def brownian_at_jump_times(noise: DrivingNoise, width: int | None = None) -> np.ndarray:
    """Brownian values at the jump epochs, zero-padded to a fixed width.

    With no width given the vector has one entry per jump; a width shorter
    than the jump count is a domain error (callers drop such paths).
    """
    values = brownian_at(noise, noise.jump_times)
    if width is None:
        return values
    if values.size > width:
        raise DomainError(
            f"path has {values.size} jumps, more than feature width {width}"
        )
    padded = np.zeros(width, dtype=float)
    padded[: values.size] = values
    return padded
