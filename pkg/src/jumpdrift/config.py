"""Experiment configuration: a small JSON key-value tree with validation.

A config pins everything a reproducible run needs: the drift (by catalog
name plus parameters), initial value, jump intensity, scheme, resolution
ladder, reference resolution, path count, seed, transform safety fraction,
and output directory.  Parsing applies defaults, rejects unknown keys, and
reports violated constraints by key name; JSON syntax errors carry line
information from the decoder.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from hashlib import sha256

from .drift import PiecewiseDrift, neg_sign_drift, piecewise_linear_drift
from .errors import ConfigError
from .study import SCHEME_NAMES

OUTPUT_DIR_ENV = "JUMPDRIFT_OUT"
DEFAULT_RESOLUTIONS = (8, 16, 32, 64, 128, 256, 512)
DEFAULT_PATHS = 4000
DEFAULT_SEED = 0
DEFAULT_SAFETY_FRACTION = 0.5
_KNOWN_KEYS = frozenset(
    [
        "drift", "xi", "lambda", "scheme", "resolutions", "n_ref",
        "paths", "seed", "safety_fraction", "output_dir",
    ]
)
_KNOWN_DRIFT_KEYS = {
    "neg-sign": frozenset(["name", "amplitude"]),
    "piecewise-linear": frozenset(["name", "breakpoints", "pieces"]),
}


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, fully materialized experiment settings."""

    drift_spec: dict
    xi: float = 0.0
    jump_intensity: float = 1.0
    scheme: str = "ja-qmilstein"
    resolutions: tuple[int, ...] = DEFAULT_RESOLUTIONS
    n_ref: int = 0
    paths: int = DEFAULT_PATHS
    seed: int = DEFAULT_SEED
    safety_fraction: float = DEFAULT_SAFETY_FRACTION
    output_dir: str = field(default_factory=lambda: default_output_dir())

    def __post_init__(self) -> None:
        if self.n_ref == 0:
            object.__setattr__(self, "n_ref", 16 * max(self.resolutions))
        validate_drift_spec(self.drift_spec)
        if not (self.jump_intensity > 0.0):
            raise ConfigError("lambda: intensity must be positive")
        if self.scheme not in SCHEME_NAMES:
            raise ConfigError(
                f"scheme: {self.scheme!r} is not one of {list(SCHEME_NAMES)}"
            )
        if len(self.resolutions) == 0:
            raise ConfigError("resolutions: must not be empty")
        if list(self.resolutions) != sorted(set(self.resolutions)):
            raise ConfigError("resolutions: must be strictly increasing")
        for n in self.resolutions:
            if not _is_power_of_two(int(n)):
                raise ConfigError(f"resolutions: {n} is not a power of two")
            if self.n_ref % int(n) != 0:
                raise ConfigError(
                    f"resolutions: {n} does not divide n_ref={self.n_ref}"
                )
        if self.n_ref < max(self.resolutions):
            raise ConfigError("n_ref: must be at least the largest resolution")
        if self.paths < 2:
            raise ConfigError("paths: at least 2 paths are required")
        if self.seed < 0:
            raise ConfigError("seed: must be nonnegative")
        if not (0.0 < self.safety_fraction < 1.0):
            raise ConfigError("safety_fraction: must lie strictly in (0, 1)")

    def build_drift(self) -> PiecewiseDrift:
        return drift_from_spec(self.drift_spec)

    @property
    def drift_label(self) -> str:
        return drift_label(self.drift_spec)

    def to_dict(self) -> dict:
        return {
            "drift": dict(self.drift_spec),
            "xi": self.xi,
            "lambda": self.jump_intensity,
            "scheme": self.scheme,
            "resolutions": list(self.resolutions),
            "n_ref": self.n_ref,
            "paths": self.paths,
            "seed": self.seed,
            "safety_fraction": self.safety_fraction,
            "output_dir": self.output_dir,
        }


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_DIR_ENV, "reports")


def validate_drift_spec(spec: dict) -> None:
    if not isinstance(spec, dict):
        raise ConfigError("drift: must be an object with a 'name' key")
    name = spec.get("name")
    if name not in _KNOWN_DRIFT_KEYS:
        raise ConfigError(
            f"drift.name: {name!r} is not in the catalog "
            f"{sorted(_KNOWN_DRIFT_KEYS)}"
        )
    unknown = set(spec) - _KNOWN_DRIFT_KEYS[name]
    if unknown:
        raise ConfigError(f"drift: unknown keys {sorted(unknown)} for {name!r}")
    if name == "piecewise-linear":
        if "breakpoints" not in spec or "pieces" not in spec:
            raise ConfigError(
                "drift: piecewise-linear needs 'breakpoints' and 'pieces'"
            )


def drift_from_spec(spec: dict) -> PiecewiseDrift:
    """Materialize a drift from its config description."""
    validate_drift_spec(spec)
    if spec["name"] == "neg-sign":
        return neg_sign_drift(float(spec.get("amplitude", 1.0)))
    return piecewise_linear_drift(
        [float(b) for b in spec["breakpoints"]],
        [(float(a), float(b)) for a, b in spec["pieces"]],
    )


def drift_label(spec: dict) -> str:
    if spec["name"] == "neg-sign":
        return f"neg-sign(amplitude={float(spec.get('amplitude', 1.0))})"
    return f"piecewise-linear(k={len(spec['breakpoints'])})"


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON config, materializing all defaults."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config is not valid JSON: {exc.msg} (line {exc.lineno}, "
            f"column {exc.colno})"
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "drift" not in raw:
        raise ConfigError("drift: a drift specification is required")
    kwargs = dict(
        drift_spec=raw["drift"],
        xi=float(raw.get("xi", 0.0)),
        jump_intensity=float(raw.get("lambda", 1.0)),
        scheme=str(raw.get("scheme", "ja-qmilstein")),
        paths=int(raw.get("paths", DEFAULT_PATHS)),
        seed=int(raw.get("seed", DEFAULT_SEED)),
        safety_fraction=float(raw.get("safety_fraction", DEFAULT_SAFETY_FRACTION)),
        output_dir=str(raw.get("output_dir", default_output_dir())),
    )
    if "resolutions" in raw:
        kwargs["resolutions"] = tuple(int(n) for n in raw["resolutions"])
    if "n_ref" in raw:
        kwargs["n_ref"] = int(raw["n_ref"])
    return ExperimentConfig(**kwargs)


def dumps_config(config: ExperimentConfig) -> str:
    """Canonical JSON text; re-parsing it yields an equal config."""
    return json.dumps(config.to_dict(), indent=2, sort_keys=True)


def config_hash(payload: dict) -> str:
    """Short stable hash of an effective run payload (config plus command)."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return sha256(canonical.encode("utf-8")).hexdigest()[:12]
