"""Numerical integrators for the jump-diffusion SDE.

Three schemes are provided: a non-adaptive Euler-Maruyama step on the
original equation (it sees only the uniform grid plus per-cell jump
counts), and jump-adapted Euler and quasi-Milstein steps on the
transformed equation, whose grids include the realized jump times.  The
jump-adapted schemes diffuse to each node first and apply the jump
displacement at the pre-jump state, as the transformed dynamics dictate.

The quasi-Milstein correction uses the one-sided quasi-derivative of the
diffusion coefficient in the centered form
0.5 * sigma * sigma' * (dW^2 - dt); the diffusion here is Lipschitz and
piecewise C^1, for which the one-sided derivative is the standard reading.

All integrators are pure functions of (coefficients, noise, resolution)
and run on arrays with a leading path axis, so batches of coupled paths
step in lockstep; the single-path entry points wrap a batch of one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .drift import JumpDiffusionProblem
from .errors import CouplingError
from .noise import (
    DrivingNoise,
    JumpAdaptedGrid,
    aggregate_increments,
    brownian_at,
    build_jump_adapted_grid,
    equidistant_grid,
    jump_counts_per_cell,
)
from .transform import Transform, TransformedCoefficients


@dataclass(frozen=True)
class SchemeTrajectory:
    """States of one scheme run, post-jump per node.

    ``pre_jump_states`` holds the value immediately before the jump at jump
    nodes and equals ``states`` everywhere else.
    """

    grid: JumpAdaptedGrid
    states: np.ndarray
    pre_jump_states: np.ndarray

    def __post_init__(self) -> None:
        if self.states.shape != self.grid.nodes.shape:
            raise CouplingError("states must have one value per grid node")
        if self.pre_jump_states.shape != self.states.shape:
            raise CouplingError("pre_jump_states must match states in length")


def _integrate_transformed_batch(
    coefficients: TransformedCoefficients,
    z0: np.ndarray,
    dts: np.ndarray,
    dws: np.ndarray,
    jump_after: np.ndarray,
    milstein: bool,
) -> tuple[np.ndarray, np.ndarray]:
    """Step a batch of transformed paths over per-path (padded) grids.

    Padded cells carry dt = dw = 0 and no jump flag, which makes the update
    a no-op, so paths of different grid lengths can share one batch.
    Returns (post-jump states, pre-jump states), each (paths, nodes).
    """
    n_paths, n_cells = dts.shape
    states = np.empty((n_paths, n_cells + 1))
    pre = np.empty_like(states)
    z = np.asarray(z0, dtype=float).copy()
    states[:, 0] = z
    pre[:, 0] = z
    for i in range(n_cells):
        dt = dts[:, i]
        dw = dws[:, i]
        mu, sigma, sigma_qd = coefficients.step_coefficients(z)
        z_pre = z + mu * dt + sigma * dw
        if milstein:
            z_pre = z_pre + 0.5 * sigma * sigma_qd * (dw * dw - dt)
        pre[:, i + 1] = z_pre
        jumping = jump_after[:, i]
        if jumping.any():
            z = z_pre.copy()
            z[jumping] = z_pre[jumping] + coefficients.jump_increment(z_pre[jumping])
        else:
            z = z_pre
        states[:, i + 1] = z
    return states, pre


def _integrate_euler_batch(
    problem: JumpDiffusionProblem,
    dws: np.ndarray,
    jump_counts: np.ndarray,
    n: int,
) -> np.ndarray:
    """Non-adaptive Euler-Maruyama on the original SDE, batched over paths."""
    n_paths = dws.shape[0]
    dt = 1.0 / n
    states = np.empty((n_paths, n + 1))
    x = np.full(n_paths, float(problem.initial_value))
    states[:, 0] = x
    for i in range(n):
        x = x + problem.drift.value(x) * dt + dws[:, i] + jump_counts[:, i]
        states[:, i + 1] = x
    return states


def euler_maruyama(
    problem: JumpDiffusionProblem, noise: DrivingNoise, n: int
) -> SchemeTrajectory:
    """Euler-Maruyama on the uniform grid {i/n}.

    Uses only the Brownian increments between grid points and the number of
    jumps per cell, i.e. the information of the driving pair sampled at
    fixed times.
    """
    grid = equidistant_grid(n)
    dws = np.diff(brownian_at(noise, grid.nodes))
    counts = jump_counts_per_cell(grid.nodes, noise.jump_times).astype(float)
    states = _integrate_euler_batch(problem, dws[None, :], counts[None, :], n)[0]
    return SchemeTrajectory(grid=grid, states=states, pre_jump_states=states.copy())


def jump_adapted_euler(
    coefficients: TransformedCoefficients,
    noise: DrivingNoise,
    n: int,
    initial_value: float,
) -> SchemeTrajectory:
    """Euler scheme for the transformed SDE on the jump-adapted grid."""
    return _jump_adapted(coefficients, noise, n, initial_value, milstein=False)


def jump_adapted_quasi_milstein(
    coefficients: TransformedCoefficients,
    noise: DrivingNoise,
    n: int,
    initial_value: float,
) -> SchemeTrajectory:
    """Quasi-Milstein scheme for the transformed SDE on the jump-adapted grid."""
    return _jump_adapted(coefficients, noise, n, initial_value, milstein=True)


def _jump_adapted(
    coefficients: TransformedCoefficients,
    noise: DrivingNoise,
    n: int,
    initial_value: float,
    milstein: bool,
) -> SchemeTrajectory:
    grid = build_jump_adapted_grid(n, noise.jump_times)
    dts = np.diff(grid.nodes)[None, :]
    dws = aggregate_increments(noise, grid)[None, :]
    jump_after = grid.is_jump[1:][None, :]
    z0 = np.array([coefficients.transform.value(float(initial_value))])
    states, pre = _integrate_transformed_batch(
        coefficients, z0, dts, dws, jump_after, milstein
    )
    return SchemeTrajectory(grid=grid, states=states[0], pre_jump_states=pre[0])


def back_transform(trajectory: SchemeTrajectory, transform: Transform) -> SchemeTrajectory:
    """Map a transformed-coordinate trajectory back to the original state."""
    return SchemeTrajectory(
        grid=trajectory.grid,
        states=transform.inverse(trajectory.states),
        pre_jump_states=transform.inverse(trajectory.pre_jump_states),
    )


def terminal_value(trajectory: SchemeTrajectory) -> float:
    """State at the final node (time 1)."""
    return float(trajectory.states[-1])


def discrete_sup_distance(
    trajectory: SchemeTrajectory, reference: SchemeTrajectory
) -> float:
    """Largest state gap over the trajectory's own nodes.

    The reference grid must contain every trajectory node (which the
    coupled construction guarantees); post-jump values are compared at jump
    nodes and plain values elsewhere.
    """
    idx = np.searchsorted(reference.grid.nodes, trajectory.grid.nodes)
    idx_clipped = np.minimum(idx, reference.grid.nodes.size - 1)
    if not np.all(reference.grid.nodes[idx_clipped] == trajectory.grid.nodes):
        raise CouplingError("reference grid does not contain the trajectory grid")
    return float(np.max(np.abs(trajectory.states - reference.states[idx_clipped])))
