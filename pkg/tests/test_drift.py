"""Drift representation: construction, evaluation conventions, invariants."""

import numpy as np
import pytest

from jumpdrift import (
    ConstructionError,
    DomainError,
    DriftPiece,
    JumpDiffusionProblem,
    PiecewiseDrift,
    linear_drift,
    neg_sign_drift,
    piecewise_linear_drift,
)


def test_neg_sign_has_genuine_discontinuity():
    drift = neg_sign_drift()
    assert drift.left_limits == (1.0,)
    assert drift.right_limits == (-1.0,)
    assert drift.has_genuine_discontinuity()


def test_plain_linear_drift_has_no_discontinuity():
    assert not linear_drift(slope=1.0).has_genuine_discontinuity()


def test_equal_one_sided_limits_do_not_count_as_discontinuity():
    # piecewise definition of the same affine function: x on both sides of 0
    drift = piecewise_linear_drift([0.0], [(0.0, 1.0), (0.0, 1.0)])
    assert drift.left_limits == drift.right_limits == (0.0,)
    assert not drift.has_genuine_discontinuity()


def test_discontinuity_invariant_under_equal_limit_breakpoint():
    base = neg_sign_drift()
    # add a spurious breakpoint at 2 where both sides evaluate to -1
    enriched = piecewise_linear_drift([0.0, 2.0], [(1.0, 0.0), (-1.0, 0.0), (-1.0, 0.0)])
    assert base.has_genuine_discontinuity() == enriched.has_genuine_discontinuity()


def test_value_examples():
    drift = neg_sign_drift()
    assert drift.value(0.5) == -1.0
    assert drift.value(-0.5) == 1.0
    assert drift.value(0.0) == -1.0  # right-limit convention at the breakpoint
    assert linear_drift(slope=2.0).value(3.0) == 6.0


def test_vectorized_value_matches_scalar():
    drift = piecewise_linear_drift([-1.0, 1.0], [(0.0, 1.0), (2.0, 0.0), (-3.0, 1.0)])
    xs = np.array([-2.0, -1.0, 0.0, 0.5, 1.0, 4.0])
    vec = drift.value(xs)
    assert vec.shape == xs.shape
    for x, v in zip(xs, vec):
        assert drift.value(float(x)) == v


def test_piece_lookup_consistency_sampled():
    drift = piecewise_linear_drift([-0.5, 0.7], [(1.0, -1.0), (0.0, 2.0), (-4.0, 0.5)])
    rng = np.random.default_rng(7)
    xs = rng.uniform(-3, 3, size=500)
    xs = xs[~np.isin(xs, drift.breakpoints)]
    coeffs = [(1.0, -1.0), (0.0, 2.0), (-4.0, 0.5)]
    for x in xs:
        idx = sum(x >= b for b in drift.breakpoints)
        if x in drift.breakpoints:
            continue
        a, b = coeffs[idx]
        assert drift.value(float(x)) == pytest.approx(a + b * x, abs=0)


def test_derivative_uses_right_piece_at_breakpoint():
    drift = piecewise_linear_drift([0.0], [(0.0, 1.0), (0.0, 5.0)])
    assert drift.derivative(0.0) == 5.0
    assert drift.derivative(-1e-9) == 1.0


def test_one_sided_limits_agree_with_piece_evaluation_in_the_limit():
    drift = piecewise_linear_drift([0.0, 1.0], [(1.0, 2.0), (-1.0, 0.5), (-3.0, 0.0)])
    for j, z in enumerate(drift.breakpoints):
        previous_left = np.inf
        previous_right = np.inf
        for h in (1e-3, 1e-5, 1e-7):
            gap_left = abs(drift.value(z - h) - drift.left_limits[j])
            gap_right = abs(drift.value(z + h) - drift.right_limits[j])
            assert gap_left <= previous_left + 1e-15
            assert gap_right <= previous_right + 1e-15
            assert gap_left <= 10.0 * h
            assert gap_right <= 10.0 * h
            previous_left, previous_right = gap_left, gap_right


def test_sampled_lipschitz_bound_holds_per_piece():
    drift = piecewise_linear_drift(
        [0.0], [(1.0, -2.0), (0.0, 3.0)], lipschitz_bound_hint=3.0
    )
    rng = np.random.default_rng(11)
    for lo, hi in ((-5.0, -1e-9), (1e-9, 5.0)):
        xs = rng.uniform(lo, hi, size=400)
        ys = rng.uniform(lo, hi, size=400)
        mask = xs != ys
        xs, ys = xs[mask], ys[mask]
        quot_val = np.abs(drift.value(xs) - drift.value(ys)) / np.abs(xs - ys)
        quot_der = np.abs(drift.derivative(xs) - drift.derivative(ys)) / np.abs(xs - ys)
        assert np.all(quot_val <= drift.lipschitz_bound_hint + 1e-9)
        assert np.all(quot_der <= drift.lipschitz_bound_hint + 1e-9)


def test_non_finite_evaluation_is_a_domain_error():
    drift = neg_sign_drift()
    with pytest.raises(DomainError):
        drift.value(float("nan"))
    with pytest.raises(DomainError):
        drift.value(np.array([0.0, np.inf]))


def test_construction_rejects_bad_breakpoints():
    piece = DriftPiece(lambda x: x, lambda x: np.ones_like(x))
    with pytest.raises(ConstructionError):
        PiecewiseDrift(
            breakpoints=(1.0, 1.0),
            pieces=(piece, piece, piece),
            left_limits=(1.0, 1.0),
            right_limits=(1.0, 1.0),
        )
    with pytest.raises(ConstructionError):
        PiecewiseDrift(
            breakpoints=(0.0,),
            pieces=(piece,),  # needs two pieces
            left_limits=(0.0,),
            right_limits=(0.0,),
        )
    with pytest.raises(ConstructionError):
        PiecewiseDrift(
            breakpoints=(0.0,),
            pieces=(piece, piece),
            left_limits=(float("inf"),),
            right_limits=(0.0,),
        )


def test_piecewise_linear_coefficient_count_checked():
    with pytest.raises(ConstructionError):
        piecewise_linear_drift([0.0], [(0.0, 1.0)])


def test_problem_validation():
    drift = neg_sign_drift()
    problem = JumpDiffusionProblem(drift, initial_value=0.0, jump_intensity=1.0)
    assert problem.horizon == 1.0
    with pytest.raises(ConstructionError):
        JumpDiffusionProblem(drift, initial_value=0.0, jump_intensity=0.0)
    with pytest.raises(ConstructionError):
        JumpDiffusionProblem(drift, initial_value=0.0, jump_intensity=1.0, horizon=2.0)
    with pytest.raises(ConstructionError):
        JumpDiffusionProblem(drift, initial_value=float("nan"), jump_intensity=1.0)
