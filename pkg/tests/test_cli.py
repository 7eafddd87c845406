"""Config parsing, CLI subcommands, report files, determinism."""

import json

import numpy as np
import pytest

from jumpdrift.cli import main
from jumpdrift.config import (
    ExperimentConfig,
    config_hash,
    drift_from_spec,
    dumps_config,
    parse_config,
)
from jumpdrift.errors import ConfigError


def test_parse_minimal_config_fills_defaults():
    config = parse_config('{"drift": {"name": "neg-sign"}, "lambda": 1.0, "xi": 0.0}')
    assert config.safety_fraction == 0.5
    assert config.paths == 4000
    assert config.seed == 0
    assert config.scheme == "ja-qmilstein"
    assert config.resolutions == (8, 16, 32, 64, 128, 256, 512)
    assert config.n_ref == 16 * 512


def test_parse_rejects_non_power_of_two_resolutions():
    with pytest.raises(ConfigError, match="power of two"):
        parse_config(
            '{"drift": {"name": "neg-sign"}, "resolutions": [8, 12], "n_ref": 96}'
        )


def test_parse_rejects_nonpositive_intensity():
    with pytest.raises(ConfigError, match="positive"):
        parse_config('{"drift": {"name": "neg-sign"}, "lambda": 0.0}')


def test_parse_rejects_unknown_keys_and_bad_json():
    with pytest.raises(ConfigError, match="unknown config keys"):
        parse_config('{"drift": {"name": "neg-sign"}, "pathz": 10}')
    with pytest.raises(ConfigError, match="line"):
        parse_config('{"drift": {"name": "neg-sign"},\n  "paths": }')


def test_parse_rejects_unknown_drift():
    with pytest.raises(ConfigError, match="catalog"):
        parse_config('{"drift": {"name": "cubic"}}')
    with pytest.raises(ConfigError, match="unknown keys"):
        parse_config('{"drift": {"name": "neg-sign", "slope": 2}}')


def test_config_round_trip():
    config = parse_config(
        json.dumps(
            {
                "drift": {"name": "piecewise-linear", "breakpoints": [0.0],
                          "pieces": [[1.0, 0.0], [-1.0, 0.5]]},
                "xi": 0.25,
                "lambda": 2.0,
                "scheme": "em",
                "resolutions": [4, 8, 16],
                "n_ref": 256,
                "paths": 100,
                "seed": 7,
                "safety_fraction": 0.25,
                "output_dir": "out",
            }
        )
    )
    assert parse_config(dumps_config(config)) == config


def test_drift_from_spec_builds_catalog_entries():
    drift = drift_from_spec({"name": "neg-sign", "amplitude": 2.0})
    assert drift.value(1.0) == -2.0
    table = drift_from_spec(
        {"name": "piecewise-linear", "breakpoints": [0.0],
         "pieces": [[1.0, 0.0], [-1.0, 0.0]]}
    )
    assert table.value(-3.0) == 1.0 and table.value(3.0) == -1.0


def test_config_hash_is_order_insensitive_and_stable():
    assert config_hash({"a": 1, "b": 2}) == config_hash({"b": 2, "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def _read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# seed=")
    assert "version=" in lines[0] and "config_hash=" in lines[0]
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    return header, rows


def test_inspect_transform_writes_table_and_figure(tmp_path):
    out = tmp_path / "reports"
    code = main(
        ["inspect-transform", "--drift", "neg-sign", "--output-dir", str(out)]
    )
    assert code == 0
    header, rows = _read_csv(out / "transform.csv")
    assert header == ["x", "G", "Gp", "z", "mu_t", "sigma_t", "rho_t"]
    by_x = {row[0]: row for row in rows}
    zero_row = by_x["0.0"]
    assert float(zero_row[1]) == 0.0  # G(0) = 0
    assert float(zero_row[2]) == 1.0  # G'(0) = 1
    assert (out / "transform.png").stat().st_size > 0


def test_simulate_writes_terminals_and_noise_dumps(tmp_path):
    out = tmp_path / "reports"
    code = main(
        [
            "simulate", "--drift", "neg-sign", "--scheme", "em",
            "--n", "8", "--paths", "5", "--seed", "3",
            "--output-dir", str(out), "--dump-noise",
        ]
    )
    assert code == 0
    header, rows = _read_csv(out / "terminals.csv")
    assert header == ["path", "terminal"]
    assert len(rows) == 5
    noise_header, noise_rows = _read_csv(out / "noise_path0000.csv")
    assert noise_header == ["t", "dW", "is_jump"]
    assert noise_rows[0][0] == "0.0" and noise_rows[-1][0] == "1.0"
    assert all(row[2] in ("true", "false") for row in noise_rows)


def test_convergence_outputs_and_thread_invariance(tmp_path):
    outputs = []
    for threads, name in (("1", "a"), ("4", "b")):
        out = tmp_path / name
        code = main(
            [
                "convergence", "--drift", "neg-sign",
                "--resolutions", "8,16,32", "--n-ref", "128",
                "--paths", "80", "--seed", "5",
                "--threads", threads, "--output-dir", str(out),
            ]
        )
        assert code == 0
        outputs.append(out)
    csv_a = (outputs[0] / "convergence.csv").read_bytes()
    csv_b = (outputs[1] / "convergence.csv").read_bytes()
    assert csv_a == csv_b
    summary = json.loads((outputs[0] / "convergence_summary.json").read_text())
    assert summary["slope"] < 0
    assert (outputs[0] / "convergence.png").stat().st_size > 0
    header, rows = _read_csv(outputs[0] / "convergence.csv")
    assert header == ["n", "error", "stderr"]
    assert [row[0] for row in rows] == ["8", "16", "32"]
    assert all(float(row[1]) > 0 for row in rows)


def test_convergence_rerun_is_byte_identical(tmp_path):
    args = [
        "convergence", "--drift", "neg-sign", "--resolutions", "8,16,32",
        "--n-ref", "128", "--paths", "60", "--seed", "9",
    ]
    first = tmp_path / "first"
    second = tmp_path / "second"
    assert main(args + ["--output-dir", str(first)]) == 0
    assert main(args + ["--output-dir", str(second)]) == 0
    assert (first / "convergence.csv").read_bytes() == (second / "convergence.csv").read_bytes()
    assert (first / "convergence_summary.json").read_text() == (
        second / "convergence_summary.json"
    ).read_text()


def test_probe_command_writes_report(tmp_path):
    out = tmp_path / "probe"
    code = main(
        [
            "probe-lower-bound", "--drift", "neg-sign",
            "--probe-resolutions", "1,2", "--samples", "1000",
            "--k", "12", "--probe-n-ref", "64",
            "--seed", "2", "--output-dir", str(out),
        ]
    )
    assert code == 0
    header, rows = _read_csv(out / "probe.csv")
    assert header == ["n", "residual", "stderr", "M", "k"]
    assert len(rows) == 2
    assert all(float(row[1]) > 0 for row in rows)
    assert (out / "probe.png").stat().st_size > 0


def test_cli_reports_error_category_on_stderr(tmp_path, capsys):
    code = main(
        [
            "convergence", "--drift", "neg-sign", "--lambda", "-1.0",
            "--output-dir", str(tmp_path / "x"),
        ]
    )
    assert code == 2
    captured = capsys.readouterr()
    assert "error category=config" in captured.err


def test_cli_drift_file_and_config_overrides(tmp_path):
    drift_file = tmp_path / "drift.json"
    drift_file.write_text(
        json.dumps({"name": "piecewise-linear", "breakpoints": [0.0],
                    "pieces": [[1.0, 0.0], [-1.0, 0.0]]})
    )
    config_file = tmp_path / "config.json"
    config_file.write_text(
        json.dumps({"drift": {"name": "neg-sign"}, "paths": 40, "seed": 1,
                    "resolutions": [8, 16, 32], "n_ref": 64,
                    "output_dir": str(tmp_path / "from_config")})
    )
    out = tmp_path / "override"
    code = main(
        [
            "convergence", "--config", str(config_file),
            "--drift", str(drift_file), "--paths", "50",
            "--output-dir", str(out),
        ]
    )
    assert code == 0
    # flag wins over the config file for paths and output location
    assert (out / "convergence.csv").exists()
    summary = json.loads((out / "convergence_summary.json").read_text())
    assert summary["metadata"]["paths"] == 50
    assert summary["metadata"]["drift"] == "piecewise-linear(k=1)"


def test_default_config_object_is_valid():
    config = ExperimentConfig(drift_spec={"name": "neg-sign"})
    assert config.n_ref == 8192
    assert config.build_drift().has_genuine_discontinuity()
