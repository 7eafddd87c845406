"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
complete.  The heavy criteria (3, 4, 6) take a few minutes each; every run
is deterministic in the fixed seeds, so results are reproducible bit for
bit.

Criterion 6's monotonicity and slope checks are known to fail: the
specified plain k-NN mean under a standardized Euclidean metric loses more
neighbor quality to the growing feature dimension than it gains from the
added Brownian samples at feasible sample sizes, so its residual does not
decay with n even though the underlying optimal reconstruction error does.
The checks are asserted as stated rather than weakened.
"""

import numpy as np
import pytest

from jumpdrift import (
    JumpDiffusionProblem,
    back_transform,
    convergence_study,
    euler_maruyama,
    fit_rate,
    jump_adapted_euler,
    jump_adapted_quasi_milstein,
    linear_drift,
    neg_sign_drift,
    piecewise_linear_drift,
    probe_lower_bound,
    sample_driving_noise,
    sample_jump_count,
    terminal_value,
    transformed_coefficients,
)
from jumpdrift.cli import main

THREADS = 4
STUDY_RESOLUTIONS = (8, 16, 32, 64, 128, 256, 512)


def _criterion(number: int, name: str, checks: dict[str, bool]) -> None:
    passed = all(checks.values())
    detail = "; ".join(f"{k}: {'ok' if v else 'FAIL'}" for k, v in checks.items())
    print(f"\ncriterion {number} ({name}): {'PASS' if passed else 'FAIL'} [{detail}]")
    assert passed, f"criterion {number} ({name}) failed: [{detail}]"


def neg_sign_problem():
    return JumpDiffusionProblem(
        neg_sign_drift(), initial_value=0.0, jump_intensity=1.0
    )


def test_criterion_1_transform_suite():
    checks = {}
    drifts = {
        "neg-sign": neg_sign_drift(),
        "two-breakpoints": piecewise_linear_drift(
            [0.0, 1.0], [(1.0, 0.0), (-1.0, 0.0), (-3.0, 0.0)]
        ),
    }
    rng = np.random.default_rng(0)
    for label, drift in drifts.items():
        tc = transformed_coefficients(drift, 0.5)
        transform = tc.transform
        if label == "neg-sign":
            checks["halfwidth is 1/12"] = transform.bump_halfwidth == 1.0 / 12.0
            checks["bump coefficient is 1"] = transform.alphas == (1.0,)

        a = rng.uniform(-5, 5, size=10_000)
        b = rng.uniform(-5, 5, size=10_000)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        strict = lo < hi
        checks[f"{label}: monotone on sampled pairs"] = bool(
            np.all(transform.value(lo[strict]) < transform.value(hi[strict]))
        )

        xs = rng.uniform(-5, 5, size=4000)
        checks[f"{label}: inverse round trip <= 1e-10"] = bool(
            np.max(np.abs(transform.inverse(transform.value(xs)) - xs)) <= 1e-10
        )

        h = 1e-6
        fd = (transform.value(xs + h) - transform.value(xs - h)) / (2 * h)
        checks[f"{label}: derivative matches FD to 1e-6"] = bool(
            np.max(np.abs(transform.derivative(xs) - fd)) <= 1e-6
        )

        for j, breakpoint in enumerate(drift.breakpoints):
            image = transform.value(breakpoint)
            gaps = {
                h: abs(tc.drift(image + h) - tc.drift(image - h))
                for h in (1e-3, 1e-4, 1e-5)
            }
            scale = max(1.0, 2.0 * gaps[1e-3] / 1e-3)
            checks[f"{label}: drift continuity at breakpoint {j}"] = all(
                gap <= scale * h for h, gap in gaps.items()
            )
            average = 0.5 * (drift.left_limits[j] + drift.right_limits[j])
            checks[f"{label}: drift midpoint value at breakpoint {j}"] = (
                abs(tc.drift(image) - average) <= 1e-8
            )
    checks["neg-sign: midpoint is zero"] = abs(
        transformed_coefficients(drifts["neg-sign"]).drift(0.0)
    ) <= 1e-8
    _criterion(1, "transform suite", checks)


def test_criterion_2_exactness_oracle():
    problem = JumpDiffusionProblem(
        linear_drift(0.0), initial_value=0.5, jump_intensity=1.0
    )
    tc = transformed_coefficients(problem.drift)
    n = 64
    worst = 0.0
    for path in range(1000):
        noise = sample_driving_noise(n, problem.jump_intensity, seed=0, path_index=path)
        exact = problem.initial_value + noise.terminal_brownian() + noise.jump_times.size
        values = (
            terminal_value(euler_maruyama(problem, noise, n)),
            terminal_value(back_transform(
                jump_adapted_euler(tc, noise, n, problem.initial_value), tc.transform
            )),
            terminal_value(back_transform(
                jump_adapted_quasi_milstein(tc, noise, n, problem.initial_value),
                tc.transform,
            )),
        )
        worst = max(worst, max(abs(v - exact) for v in values))
    _criterion(2, "exactness oracle", {f"max deviation {worst:.2e} <= 1e-12": worst <= 1e-12})


def test_criterion_3_optimal_rate_reproduction():
    problem = neg_sign_problem()
    report = convergence_study(
        problem, "ja-qmilstein", STUDY_RESOLUTIONS, n_ref=8192,
        paths=4000, seed=0, threads=THREADS,
    )
    checks = {
        f"slope {report.slope:.4f} within [-0.90, -0.60]":
            -0.90 <= report.slope <= -0.60,
    }
    # reference-bias control: double the reference on shared noise and
    # require every error to move by less than one standard error
    base = convergence_study(
        problem, "ja-qmilstein", STUDY_RESOLUTIONS, n_ref=8192,
        paths=4000, seed=0, n_master=16384, threads=THREADS,
    )
    doubled = convergence_study(
        problem, "ja-qmilstein", STUDY_RESOLUTIONS, n_ref=16384,
        paths=4000, seed=0, n_master=16384, threads=THREADS,
    )
    for n, err_a, err_b, se in zip(
        STUDY_RESOLUTIONS, base.errors, doubled.errors, base.std_errors
    ):
        checks[f"n={n}: reference-bias shift below 1 stderr"] = abs(err_a - err_b) < se
    _criterion(3, "optimal-rate reproduction", checks)


def test_criterion_4_baseline_separation():
    report = convergence_study(
        neg_sign_problem(), "em", STUDY_RESOLUTIONS, n_ref=8192,
        paths=4000, seed=0, threads=THREADS,
    )
    _criterion(
        4, "baseline separation",
        {f"EM slope {report.slope:.4f} <= -0.45": report.slope <= -0.45},
    )


def test_criterion_5_poisson_layer():
    paths = 100_000
    counts = np.fromiter(
        (sample_jump_count(1.0, seed=0, path_index=p) for p in range(paths)),
        dtype=float, count=paths,
    )
    target = np.exp(-1.0)
    zero_fraction = float((counts == 0.0).mean())
    se_zero = np.sqrt(target * (1.0 - target) / paths)
    mean = float(counts.mean())
    se_mean = np.sqrt(1.0 / paths)
    _criterion(
        5, "Poisson layer",
        {
            f"P(no jumps) {zero_fraction:.5f} within 3se of exp(-1)":
                abs(zero_fraction - target) <= 3 * se_zero,
            f"mean count {mean:.5f} within 3se of 1":
                abs(mean - 1.0) <= 3 * se_mean,
        },
    )


def test_criterion_6_lower_bound_probe():
    report = probe_lower_bound(
        neg_sign_problem(), [1, 2, 4, 8, 16], sample_size=20_000,
        seed=0, n_ref=512, threads=THREADS,
    )
    residuals = np.asarray(report.residuals)
    std_errors = np.asarray(report.std_errors)
    checks = {"residuals strictly positive": bool(np.all(residuals > 0.0))}
    for i in range(len(residuals) - 1):
        allowance = 3.0 * float(np.hypot(std_errors[i], std_errors[i + 1]))
        checks[f"nonincreasing {report.resolutions[i]}->{report.resolutions[i+1]}"] = (
            residuals[i + 1] <= residuals[i] + allowance
        )
    slope = fit_rate(report.resolutions, report.residuals).slope
    checks[f"slope {slope:.3f} within [-1.1, -0.3]"] = -1.1 <= slope <= -0.3
    _criterion(6, "lower-bound probe", checks)


def test_criterion_7_determinism(tmp_path):
    outputs = []
    for threads, name in (("1", "run_a"), ("4", "run_b")):
        out = tmp_path / name
        code = main(
            [
                "convergence", "--drift", "neg-sign",
                "--resolutions", "8,16,32", "--n-ref", "512",
                "--paths", "200", "--seed", "0",
                "--threads", threads, "--output-dir", str(out),
            ]
        )
        assert code == 0
        outputs.append((out / "convergence.csv").read_bytes())
    _criterion(
        7, "determinism",
        {"byte-identical CSVs across thread counts": outputs[0] == outputs[1]},
    )


def test_criterion_8_fit_rate_oracle():
    ns = (8, 16, 32, 64)
    checks = {}
    for exponent in (-0.75, -0.5, 0.0):
        errors = [2.0 * n**exponent for n in ns]
        slope = fit_rate(ns, errors).slope
        checks[f"planted n^{exponent} recovered"] = slope == pytest.approx(
            exponent, abs=1e-12
        )
    _criterion(8, "fit_rate oracle", checks)
