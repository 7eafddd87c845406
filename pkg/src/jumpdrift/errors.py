"""Exception types shared across the package.

Every error carries a short machine-readable ``category`` that the CLI
prints to stderr, so scripted callers can branch on failure kind without
parsing prose.
"""

from __future__ import annotations


class JumpDriftError(Exception):
    """Base class for all errors raised by this package."""

    category = "internal"


class DomainError(JumpDriftError, ValueError):
    """An argument is outside the mathematical domain of an operation."""

    category = "domain"


class ConstructionError(JumpDriftError, ValueError):
    """Invalid data was supplied when building a model object."""

    category = "construction"


class NumericsError(JumpDriftError, ArithmeticError):
    """An iterative numerical routine failed to converge."""

    category = "numerics"


class CouplingError(JumpDriftError, ValueError):
    """Grids that must share nodes for exact coupling do not."""

    category = "coupling"


class ConfigError(JumpDriftError, ValueError):
    """An experiment configuration violates a documented constraint."""

    category = "config"
