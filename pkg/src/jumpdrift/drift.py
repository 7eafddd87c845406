"""Piecewise-regular drift coefficients and the SDE problem description.

A drift is described by finitely many breakpoints, one evaluator pair
(value, derivative) per open piece, and explicit one-sided limits at each
breakpoint.  Evaluation at a breakpoint uses the right-limit convention:
the solution of the SDE does not depend on the drift's value on a null
set, so any fixed convention is admissible, and the right limit keeps
evaluation total and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConstructionError, DomainError

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DriftPiece:
    """Evaluators for one open interval between breakpoints.

    Both callables must be numpy-vectorized: they receive a float array and
    return an array of the same shape.
    """

    value: ArrayFn
    derivative: ArrayFn


@dataclass(frozen=True)
class PiecewiseDrift:
    """A drift that is Lipschitz, with Lipschitz derivative, on each piece.

    ``breakpoints`` are strictly increasing; ``pieces`` has one entry more
    than ``breakpoints`` (the pieces cover (-inf, b_1), (b_1, b_2), ...,
    (b_k, inf)).  ``left_limits``/``right_limits`` hold the one-sided values
    at each breakpoint and are supplied explicitly rather than computed by
    numerical limit-taking.  Instances are immutable and safe to share
    between workers.
    """

    breakpoints: tuple[float, ...]
    pieces: tuple[DriftPiece, ...]
    left_limits: tuple[float, ...]
    right_limits: tuple[float, ...]
    lipschitz_bound_hint: float | None = None
    _breaks: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        breaks = np.asarray(self.breakpoints, dtype=float)
        if breaks.size and not np.all(np.diff(breaks) > 0.0):
            raise ConstructionError("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(breaks)):
            raise ConstructionError("breakpoints must be finite")
        if len(self.pieces) != len(self.breakpoints) + 1:
            raise ConstructionError(
                f"need {len(self.breakpoints) + 1} pieces for "
                f"{len(self.breakpoints)} breakpoints, got {len(self.pieces)}"
            )
        for name, limits in (("left", self.left_limits), ("right", self.right_limits)):
            if len(limits) != len(self.breakpoints):
                raise ConstructionError(f"{name}_limits must match breakpoint count")
            if not all(np.isfinite(v) for v in limits):
                raise ConstructionError(f"{name}_limits must all be finite")
        if self.lipschitz_bound_hint is not None and self.lipschitz_bound_hint <= 0:
            raise ConstructionError("lipschitz_bound_hint must be positive")
        object.__setattr__(self, "_breaks", breaks)

    @property
    def breakpoint_count(self) -> int:
        return len(self.breakpoints)

    def has_genuine_discontinuity(self) -> bool:
        """True iff the one-sided limits differ at some breakpoint (exact)."""
        return any(l != r for l, r in zip(self.left_limits, self.right_limits))

    def value(self, x):
        """Drift value; at a breakpoint, the supplied right limit."""
        return self._eval(x, derivative=False)

    def derivative(self, x):
        """Piecewise drift derivative, right piece at a breakpoint."""
        return self._eval(x, derivative=True)

    def _eval(self, x, derivative: bool):
        arr = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise DomainError("drift evaluated at a non-finite point")
        flat = np.atleast_1d(arr)
        out = np.empty_like(flat)
        # side="right" sends x == breakpoint to the piece on its right,
        # matching the right-limit convention.
        idx = np.searchsorted(self._breaks, flat, side="right")
        for i, piece in enumerate(self.pieces):
            mask = idx == i
            if mask.any():
                fn = piece.derivative if derivative else piece.value
                out[mask] = fn(flat[mask])
        if not derivative:
            for j, z in enumerate(self.breakpoints):
                out[flat == z] = self.right_limits[j]
        if arr.ndim == 0:
            return float(out[0])
        return out.reshape(arr.shape)


@dataclass(frozen=True)
class JumpDiffusionProblem:
    """Scalar SDE with unit diffusion and unit jumps on the unit interval.

    The state moves by the drift, a standard Brownian motion, and a
    homogeneous Poisson counting process of the given intensity.  The
    jump-free companion process is the same problem driven by a noise path
    that carries zero jumps.
    """

    drift: PiecewiseDrift
    initial_value: float
    jump_intensity: float
    horizon: float = 1.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.initial_value):
            raise ConstructionError("initial_value must be finite")
        if not (self.jump_intensity > 0.0 and np.isfinite(self.jump_intensity)):
            raise ConstructionError("jump_intensity must be a positive real")
        if self.horizon != 1.0:
            raise ConstructionError("only the unit time horizon is supported")


def neg_sign_drift(amplitude: float = 1.0) -> PiecewiseDrift:
    """Drift -amplitude * sign(x): one breakpoint at 0, jump of 2*amplitude."""
    a = float(amplitude)
    if not np.isfinite(a):
        raise ConstructionError("amplitude must be finite")
    return PiecewiseDrift(
        breakpoints=(0.0,),
        pieces=(
            DriftPiece(lambda x: np.full_like(x, a), lambda x: np.zeros_like(x)),
            DriftPiece(lambda x: np.full_like(x, -a), lambda x: np.zeros_like(x)),
        ),
        left_limits=(a,),
        right_limits=(-a,),
        lipschitz_bound_hint=None if a == 0.0 else abs(a),
    )


def piecewise_linear_drift(
    breakpoints: Sequence[float],
    coefficients: Sequence[tuple[float, float]],
    lipschitz_bound_hint: float | None = None,
) -> PiecewiseDrift:
    """Drift that is affine on each piece.

    ``coefficients[i] = (intercept, slope)`` for the i-th piece; one-sided
    limits at every breakpoint follow exactly from the affine formulas.
    """
    breaks = tuple(float(b) for b in breakpoints)
    coeffs = [(float(a), float(b)) for a, b in coefficients]
    if len(coeffs) != len(breaks) + 1:
        raise ConstructionError(
            f"need {len(breaks) + 1} coefficient pairs, got {len(coeffs)}"
        )

    def make_piece(a: float, b: float) -> DriftPiece:
        return DriftPiece(
            lambda x, a=a, b=b: a + b * x,
            lambda x, b=b: np.full_like(x, b),
        )

    left = tuple(coeffs[j][0] + coeffs[j][1] * z for j, z in enumerate(breaks))
    right = tuple(coeffs[j + 1][0] + coeffs[j + 1][1] * z for j, z in enumerate(breaks))
    hint = lipschitz_bound_hint
    if hint is None:
        slopes = [abs(b) for _, b in coeffs]
        hint = max(slopes) if max(slopes) > 0 else None
    return PiecewiseDrift(
        breakpoints=breaks,
        pieces=tuple(make_piece(a, b) for a, b in coeffs),
        left_limits=left,
        right_limits=right,
        lipschitz_bound_hint=hint,
    )


def linear_drift(slope: float = 0.0, intercept: float = 0.0) -> PiecewiseDrift:
    """Globally affine drift (no breakpoints); slope 0 gives the zero drift."""
    return piecewise_linear_drift((), [(intercept, slope)])
