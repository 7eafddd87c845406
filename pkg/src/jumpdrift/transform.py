"""Coefficient-regularizing state transform for discontinuous drift.

The transform perturbs the identity near each drift breakpoint by a
compactly supported C^2 bump, chosen so that the transformed SDE has
Lipschitz drift, diffusion, and jump coefficients.  Integrating in the
transformed coordinate and mapping back through the inverse removes the
order barrier that the raw discontinuous drift imposes on standard
schemes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .drift import PiecewiseDrift
from .errors import ConstructionError, DomainError, NumericsError

_INVERSE_ITERATION_CAP = 10_000


def bump_profile(u):
    """C^2 bump (1-u^2)^3 on [-1, 1], zero outside."""
    arr = np.asarray(u, dtype=float)
    out = np.zeros_like(arr)
    inside = np.abs(arr) <= 1.0
    w = arr[inside]
    out[inside] = (1.0 - w * w) ** 3
    return float(out) if arr.ndim == 0 else out


def bump_profile_d1(u):
    """First derivative of :func:`bump_profile`: -6u(1-u^2)^2 inside."""
    arr = np.asarray(u, dtype=float)
    out = np.zeros_like(arr)
    inside = np.abs(arr) <= 1.0
    w = arr[inside]
    out[inside] = -6.0 * w * (1.0 - w * w) ** 2
    return float(out) if arr.ndim == 0 else out


def bump_profile_d2(u):
    """Second derivative of :func:`bump_profile`: (1-u^2)(30u^2-6) inside."""
    arr = np.asarray(u, dtype=float)
    out = np.zeros_like(arr)
    inside = np.abs(arr) <= 1.0
    w = arr[inside]
    out[inside] = (1.0 - w * w) * (30.0 * w * w - 6.0)
    return float(out) if arr.ndim == 0 else out


@dataclass(frozen=True)
class Transform:
    """Monotone bijection built from one bump per drift breakpoint.

    ``value`` maps x to x + sum_j a_j * bump((x-b_j)/c) * (x-b_j)|x-b_j|.
    The half-width ``c`` must satisfy 6|a_j|c < 1 (keeps the derivative
    positive) and 2c < min breakpoint gap (keeps bump supports disjoint);
    both are enforced at construction.  Instances are immutable, and
    ``inverse`` keeps no shared scratch state, so concurrent use is safe.
    """

    breakpoints: tuple[float, ...]
    alphas: tuple[float, ...]
    bump_halfwidth: float
    inverse_tolerance: float = 1e-12
    _breaks: np.ndarray = field(init=False, repr=False, compare=False)
    _alphas: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        breaks = np.asarray(self.breakpoints, dtype=float)
        alphas = np.asarray(self.alphas, dtype=float)
        if breaks.shape != alphas.shape:
            raise ConstructionError("breakpoints and alphas must pair up")
        if breaks.size and not np.all(np.diff(breaks) > 0.0):
            raise ConstructionError("breakpoints must be strictly increasing")
        if not (self.inverse_tolerance > 0.0):
            raise ConstructionError("inverse_tolerance must be positive")
        c = self.bump_halfwidth
        if not (np.isfinite(c) and c > 0.0):
            raise ConstructionError("bump_halfwidth must be a positive real")
        if c >= admissible_halfwidth_bound(self.breakpoints, self.alphas):
            raise ConstructionError(
                "bump_halfwidth must lie strictly inside the admissible interval"
            )
        object.__setattr__(self, "_breaks", breaks)
        object.__setattr__(self, "_alphas", alphas)

    @property
    def is_identity(self) -> bool:
        return bool(np.all(self._alphas == 0.0))

    @property
    def inverse_bracket_margin(self) -> float:
        """Bound on |value(x) - x|: each bump moves a point by at most a*c^2."""
        if self.is_identity:
            return 0.0
        return float(np.max(np.abs(self._alphas))) * self.bump_halfwidth**2

    def value(self, x):
        arr = np.asarray(x, dtype=float)
        out = arr + self._bump_sum(np.atleast_1d(arr), order=0).reshape(arr.shape)
        return float(out) if arr.ndim == 0 else out

    def derivative(self, x):
        arr = np.asarray(x, dtype=float)
        out = 1.0 + self._bump_sum(np.atleast_1d(arr), order=1).reshape(arr.shape)
        return float(out) if arr.ndim == 0 else out

    def second_derivative(self, x, side: str = "right"):
        """One-sided second derivative; it jumps by 4*a_j at breakpoint j."""
        if side not in ("left", "right"):
            raise DomainError(f"side must be 'left' or 'right', got {side!r}")
        arr = np.asarray(x, dtype=float)
        sign_at_zero = 1.0 if side == "right" else -1.0
        out = self._bump_sum(np.atleast_1d(arr), order=2, sign_at_zero=sign_at_zero)
        out = out.reshape(arr.shape)
        return float(out) if arr.ndim == 0 else out

    def inverse(self, y):
        """Solve value(x) = y by Newton steps safeguarded with bisection.

        The root is bracketed analytically: the bump terms move no point by
        more than ``inverse_bracket_margin``.  Convergence is to an absolute
        residual below ``inverse_tolerance``; positivity of the derivative
        makes failure a sign of a corrupted transform, reported as
        :class:`NumericsError`.
        """
        arr = np.asarray(y, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise DomainError("inverse evaluated at a non-finite point")
        if self.is_identity:
            return float(arr) if arr.ndim == 0 else arr.copy()

        flat = np.atleast_1d(arr).astype(float)
        margin = self.inverse_bracket_margin
        lo = flat - margin
        hi = flat + margin
        x = flat.copy()
        tol = self.inverse_tolerance
        for _ in range(_INVERSE_ITERATION_CAP):
            residual = self.value(x) - flat
            active = np.abs(residual) > tol
            if not active.any():
                break
            below = active & (residual < 0.0)
            above = active & (residual > 0.0)
            lo = np.where(below, x, lo)
            hi = np.where(above, x, hi)
            step = residual / self.derivative(x)
            candidate = x - step
            fallback = active & (
                ~np.isfinite(candidate) | (candidate <= lo) | (candidate >= hi)
            )
            candidate = np.where(fallback, 0.5 * (lo + hi), candidate)
            x = np.where(active, candidate, x)
        else:
            raise NumericsError(
                "transform inversion did not converge; transform invariants "
                "are likely violated"
            )
        if arr.ndim == 0:
            return float(x[0])
        return x.reshape(arr.shape)

    def _bump_sum(
        self, flat: np.ndarray, order: int, sign_at_zero: float = 1.0
    ) -> np.ndarray:
        c = self.bump_halfwidth
        total = np.zeros_like(flat)
        for alpha, center in zip(self._alphas, self._breaks):
            if alpha == 0.0:
                continue
            s = flat - center
            inside = np.abs(s) <= c
            if not inside.any():
                continue
            si = s[inside]
            u = si / c
            if order == 0:
                total[inside] += alpha * bump_profile(u) * si * np.abs(si)
            elif order == 1:
                total[inside] += alpha * (
                    bump_profile_d1(u) / c * si * np.abs(si)
                    + 2.0 * bump_profile(u) * np.abs(si)
                )
            else:
                sgn = np.where(si > 0, 1.0, np.where(si < 0, -1.0, sign_at_zero))
                total[inside] += alpha * (
                    bump_profile_d2(u) / c**2 * si * np.abs(si)
                    + 4.0 * bump_profile_d1(u) / c * np.abs(si)
                    + 2.0 * bump_profile(u) * sgn
                )
        return total


def admissible_halfwidth_bound(
    breakpoints: tuple[float, ...] | np.ndarray,
    alphas: tuple[float, ...] | np.ndarray,
) -> float:
    """Supremum of admissible bump half-widths (may be +inf).

    The half-width must stay below 1/(6|a_j|) for every bump coefficient
    (with 1/0 = inf) and below half of every gap between consecutive
    breakpoints.
    """
    bound = np.inf
    for alpha in np.atleast_1d(np.asarray(alphas, dtype=float)):
        if alpha != 0.0:
            bound = min(bound, 1.0 / (6.0 * abs(alpha)))
    breaks = np.atleast_1d(np.asarray(breakpoints, dtype=float))
    if breaks.size >= 2:
        bound = min(bound, float(np.min(np.diff(breaks))) / 2.0)
    return bound


def build_transform(
    drift: PiecewiseDrift,
    safety_fraction: float = 0.5,
    inverse_tolerance: float = 1e-12,
) -> Transform:
    """Construct the regularizing transform for a drift.

    Bump coefficients are half the drift's jump sizes, computed from the
    supplied one-sided limits.  The half-width is placed at
    ``safety_fraction`` of its admissible supremum; when that supremum is
    infinite (no jump and at most one breakpoint) the transform is the
    identity and the half-width defaults to 1.
    """
    if not (0.0 < safety_fraction < 1.0):
        raise ConstructionError("safety_fraction must lie in (0, 1)")
    alphas = tuple(
        (l - r) / 2.0 for l, r in zip(drift.left_limits, drift.right_limits)
    )
    bound = admissible_halfwidth_bound(drift.breakpoints, alphas)
    halfwidth = 1.0 if np.isinf(bound) else safety_fraction * bound
    return Transform(
        breakpoints=drift.breakpoints,
        alphas=alphas,
        bump_halfwidth=halfwidth,
        inverse_tolerance=inverse_tolerance,
    )


@dataclass(frozen=True)
class TransformedCoefficients:
    """Lipschitz coefficients of the SDE in the transformed coordinate.

    With G the transform and m the original drift, the transformed process
    has drift (G'm + G''/2) o G^{-1}, diffusion G' o G^{-1}, and a jump
    displacement G(G^{-1}(z) + 1) - z.  Second derivatives and the drift
    value use the right-sided convention at breakpoints; the composed drift
    is side-independent there by construction, which keeps it continuous.
    """

    transform: Transform
    drift_coefficient: PiecewiseDrift

    def original_state(self, z):
        """Pull a transformed state back to the original coordinate."""
        return self.transform.inverse(z)

    def drift(self, z):
        return self._drift_at(self.transform.inverse(z))

    def diffusion(self, z):
        return self.transform.derivative(self.transform.inverse(z))

    def diffusion_quasi_derivative(self, z):
        """One-sided derivative of the diffusion in the transformed variable."""
        x = self.transform.inverse(z)
        return self.transform.second_derivative(x) / self.transform.derivative(x)

    def jump_increment(self, z):
        """Displacement of the transformed state across one unit jump."""
        x = self.transform.inverse(z)
        return self.transform.value(x + 1.0) - z

    def step_coefficients(self, z):
        """(drift, diffusion, diffusion quasi-derivative) with one inversion.

        Integrators call this once per step; evaluating the three
        coefficients jointly avoids re-solving the inverse.
        """
        x = self.transform.inverse(z)
        first = self.transform.derivative(x)
        second = self.transform.second_derivative(x)
        drift = first * self.drift_coefficient.value(x) + 0.5 * second
        return drift, first, second / first

    def _drift_at(self, x):
        first = self.transform.derivative(x)
        second = self.transform.second_derivative(x)
        return first * self.drift_coefficient.value(x) + 0.5 * second


def transformed_coefficients(
    drift: PiecewiseDrift,
    safety_fraction: float = 0.5,
) -> TransformedCoefficients:
    """Build the transform for a drift and bind the coefficient evaluators."""
    return TransformedCoefficients(build_transform(drift, safety_fraction), drift)
