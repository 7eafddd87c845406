"""Command-line interface.

Four subcommands cover the experiment surface:

* ``inspect-transform``: sampled tables of the transform and transformed
  coefficients as CSV, with a rendered figure.
* ``simulate``: per-path terminal values of one scheme as CSV; optionally
  one CSV per path of the driving noise.
* ``convergence``: Monte Carlo strong-error study with fitted rate; CSV,
  JSON summary, and figure.
* ``probe-lower-bound``: k-NN reconstruction residuals per information
  level; CSV and figure.

A JSON config file provides the experiment settings; command-line flags
override individual fields.  Outputs land in the configured directory
(flag, config key, or the JUMPDRIFT_OUT environment variable).  All
outputs are deterministic in the seed and independent of --threads.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

import numpy as np

from .config import (
    DEFAULT_PATHS,
    DEFAULT_RESOLUTIONS,
    DEFAULT_SEED,
    ExperimentConfig,
    config_hash,
    default_output_dir,
    parse_config,
)
from .drift import JumpDiffusionProblem
from .errors import ConfigError, JumpDriftError
from .noise import sample_driving_noise
from .report import (
    convergence_summary,
    default_transform_span,
    transform_table,
    write_convergence_csv,
    write_csv,
    write_noise_csv,
    write_probe_csv,
    write_terminals_csv,
)
from .study import (
    convergence_study,
    probe_lower_bound,
    simulate_terminal_values,
)
from .transform import transformed_coefficients


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated integer list, got {text!r}") from exc


def _drift_spec_from_flag(value: str, amplitude: float | None) -> dict:
    path = Path(value)
    if value.endswith(".json") or path.is_file():
        try:
            spec = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read drift file {value!r}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"drift file {value!r} is not valid JSON: {exc.msg} "
                f"(line {exc.lineno}, column {exc.colno})"
            ) from exc
    else:
        spec = {"name": value}
    if amplitude is not None:
        spec["amplitude"] = amplitude
    return spec


def _effective_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file (or defaults) with flag overrides applied; flags win."""
    if args.config:
        config = parse_config(Path(args.config).read_text(encoding="utf-8"))
        raw = config.to_dict()
    else:
        raw = {
            "drift": {"name": "neg-sign"},
            "xi": 0.0,
            "lambda": 1.0,
            "scheme": "ja-qmilstein",
            "resolutions": list(DEFAULT_RESOLUTIONS),
            "n_ref": 0,
            "paths": DEFAULT_PATHS,
            "seed": DEFAULT_SEED,
            "safety_fraction": 0.5,
            "output_dir": default_output_dir(),
        }
    if args.drift is not None:
        raw["drift"] = _drift_spec_from_flag(args.drift, args.drift_amplitude)
    elif args.drift_amplitude is not None:
        raw["drift"] = dict(raw["drift"], amplitude=args.drift_amplitude)
    for flag, key in (
        ("xi", "xi"),
        ("jump_intensity", "lambda"),
        ("scheme", "scheme"),
        ("n_ref", "n_ref"),
        ("paths", "paths"),
        ("seed", "seed"),
        ("safety_fraction", "safety_fraction"),
        ("output_dir", "output_dir"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            raw[key] = value
    if getattr(args, "resolutions", None) is not None:
        raw["resolutions"] = list(_parse_int_list(args.resolutions))
    return ExperimentConfig(
        drift_spec=raw["drift"],
        xi=float(raw["xi"]),
        jump_intensity=float(raw["lambda"]),
        scheme=str(raw["scheme"]),
        resolutions=tuple(int(n) for n in raw["resolutions"]),
        n_ref=int(raw["n_ref"]),
        paths=int(raw["paths"]),
        seed=int(raw["seed"]),
        safety_fraction=float(raw["safety_fraction"]),
        output_dir=str(raw["output_dir"]),
    )


def _problem(config: ExperimentConfig) -> JumpDiffusionProblem:
    return JumpDiffusionProblem(
        drift=config.build_drift(),
        initial_value=config.xi,
        jump_intensity=config.jump_intensity,
    )


def _run_payload(command: str, config: ExperimentConfig, **extras) -> dict:
    """Hash input identifying the experiment; placement knobs excluded."""
    payload = {k: v for k, v in config.to_dict().items() if k != "output_dir"}
    payload["command"] = command
    payload.update(extras)
    return payload


def _ensure_output_dir(config: ExperimentConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_inspect_transform(args: argparse.Namespace) -> int:
    config = _effective_config(args)
    out = _ensure_output_dir(config)
    coefficients = transformed_coefficients(
        config.build_drift(), config.safety_fraction
    )
    run_hash = config_hash(_run_payload("inspect-transform", config))
    xs = default_transform_span(coefficients.transform.breakpoints)
    header, rows = transform_table(coefficients, xs)
    csv_path = out / "transform.csv"
    write_csv(csv_path, header, rows, config.seed, run_hash)
    from .plots import render_transform_figure

    figure_path = out / "transform.png"
    render_transform_figure(header, rows, figure_path)
    print(f"wrote {csv_path} and {figure_path}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _effective_config(args)
    out = _ensure_output_dir(config)
    problem = _problem(config)
    run_hash = config_hash(_run_payload("simulate", config, n=args.n))
    terminals = simulate_terminal_values(
        problem, config.scheme, args.n, config.paths, config.seed,
        safety_fraction=config.safety_fraction, threads=args.threads,
    )
    csv_path = out / "terminals.csv"
    write_terminals_csv(csv_path, terminals, config.seed, run_hash)
    print(
        f"wrote {csv_path} (scheme={config.scheme}, n={args.n}, "
        f"paths={config.paths}, mean={terminals.mean()!r})"
    )
    if args.dump_noise:
        for p in range(config.paths):
            noise = sample_driving_noise(
                args.n, config.jump_intensity, config.seed, p
            )
            write_noise_csv(out / f"noise_path{p:04d}.csv", noise, run_hash)
        print(f"wrote {config.paths} noise files to {out}")
    return 0


def _cmd_convergence(args: argparse.Namespace) -> int:
    config = _effective_config(args)
    out = _ensure_output_dir(config)
    problem = _problem(config)
    run_hash = config_hash(_run_payload("convergence", config, metric=args.metric))
    report = convergence_study(
        problem, config.scheme, config.resolutions, config.n_ref,
        config.paths, config.seed, metric=args.metric,
        safety_fraction=config.safety_fraction, threads=args.threads,
        drift_label=config.drift_label,
    )
    csv_path = out / "convergence.csv"
    write_convergence_csv(csv_path, report, run_hash)
    summary = convergence_summary(report)
    summary_path = out / "convergence_summary.json"
    summary_path.write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    from .plots import render_convergence_figure

    figure_path = out / "convergence.png"
    render_convergence_figure(report, figure_path)
    lo, hi = report.slope_ci
    print(
        f"wrote {csv_path}, {summary_path}, {figure_path} "
        f"slope={report.slope:.4f} ci=[{lo:.4f}, {hi:.4f}]"
    )
    return 0


def _cmd_probe(args: argparse.Namespace) -> int:
    config = _effective_config(args)
    out = _ensure_output_dir(config)
    problem = _problem(config)
    probe_resolutions = _parse_int_list(args.probe_resolutions)
    run_hash = config_hash(
        _run_payload(
            "probe-lower-bound", config,
            probe_resolutions=list(probe_resolutions),
            samples=args.samples, k=args.k, probe_n_ref=args.probe_n_ref,
        )
    )
    report = probe_lower_bound(
        problem, probe_resolutions, args.samples, k=args.k,
        seed=config.seed, n_ref=args.probe_n_ref,
        safety_fraction=config.safety_fraction, threads=args.threads,
        drift_label=config.drift_label,
    )
    csv_path = out / "probe.csv"
    write_probe_csv(csv_path, report, run_hash)
    from .plots import render_probe_figure

    figure_path = out / "probe.png"
    render_probe_figure(report, figure_path)
    print(
        f"wrote {csv_path} and {figure_path} "
        f"(M={report.sample_size}, k={report.k}, "
        f"dropped={report.dropped_paths})"
    )
    return 0


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="path to a JSON config file")
    sub.add_argument("--drift", help="catalog drift name or JSON drift file")
    sub.add_argument(
        "--drift-amplitude", type=float, dest="drift_amplitude",
        help="amplitude parameter for the neg-sign drift",
    )
    sub.add_argument("--lambda", type=float, dest="jump_intensity",
                     help="jump intensity (positive)")
    sub.add_argument("--xi", type=float, help="initial value")
    sub.add_argument("--seed", type=int, help="experiment seed")
    sub.add_argument("--safety-fraction", type=float, dest="safety_fraction",
                     help="bump half-width as a fraction of its supremum")
    sub.add_argument("--output-dir", dest="output_dir",
                     help="directory for report files")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker threads (outputs do not depend on this)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jumpdrift",
        description="Strong approximation experiments for jump-diffusion "
        "SDEs with discontinuous drift",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    inspect = subparsers.add_parser(
        "inspect-transform",
        help="dump sampled transform and coefficient tables",
    )
    _add_common_flags(inspect)
    inspect.set_defaults(func=_cmd_inspect_transform)

    simulate = subparsers.add_parser(
        "simulate", help="emit per-path terminal values for one scheme"
    )
    _add_common_flags(simulate)
    simulate.add_argument("--scheme", choices=["em", "ja-euler", "ja-qmilstein"])
    simulate.add_argument("--n", type=int, default=64, help="grid resolution")
    simulate.add_argument("--paths", type=int, help="number of Monte Carlo paths")
    simulate.add_argument(
        "--dump-noise", action="store_true",
        help="also write one (t, dW, is_jump) CSV per path",
    )
    simulate.set_defaults(func=_cmd_simulate)

    convergence = subparsers.add_parser(
        "convergence", help="strong-error convergence study with fitted rate"
    )
    _add_common_flags(convergence)
    convergence.add_argument("--scheme", choices=["em", "ja-euler", "ja-qmilstein"])
    convergence.add_argument("--resolutions",
                             help="comma-separated powers of two, e.g. 8,16,32")
    convergence.add_argument("--n-ref", type=int, dest="n_ref",
                             help="reference resolution (defaults to 16x max)")
    convergence.add_argument("--paths", type=int, help="number of Monte Carlo paths")
    convergence.add_argument("--metric", choices=["terminal", "sup"],
                             default="terminal")
    convergence.set_defaults(func=_cmd_convergence)

    probe = subparsers.add_parser(
        "probe-lower-bound",
        help="k-NN reconstruction residuals per information level",
    )
    _add_common_flags(probe)
    probe.add_argument("--probe-resolutions", default="1,2,4,8,16",
                       dest="probe_resolutions",
                       help="comma-separated sample counts, e.g. 1,2,4,8,16")
    probe.add_argument("--samples", type=int, default=20000,
                       help="Monte Carlo sample size M")
    probe.add_argument("--k", type=int, help="neighbor count (default: ceil sqrt M)")
    probe.add_argument("--probe-n-ref", type=int, default=512, dest="probe_n_ref",
                       help="fine resolution for the terminal-state surrogate")
    probe.set_defaults(func=_cmd_probe)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except JumpDriftError as exc:
        print(f"error category={exc.category}: {exc}", file=sys.stderr)
        return 2
    except Exception:  # pragma: no cover - defensive
        traceback.print_exc()
        print("error category=internal: unexpected failure", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
