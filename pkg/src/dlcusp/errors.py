"""Exception taxonomy shared across the package.

The split mirrors the command line contract: configuration mistakes, honest
mathematical failures (with a counterexample payload), internal consistency
violations, and resource refusals all exit differently.
"""

from __future__ import annotations


class ConfigError(ValueError):
    """A request the library refuses up front (bad q, unknown group, ...)."""


class ResourceBoundError(RuntimeError):
    """An enumeration would exceed a configured cap."""

    def __init__(self, message: str, required: int | None = None):
        super().__init__(message)
        self.required = required


class ConsistencyError(RuntimeError):
    """Two routes that must agree internally did not."""

    def __init__(self, message: str, detail=None):
        super().__init__(message)
        self.detail = detail


class MethodDisagreement(ConsistencyError):
    """The determinant route and the orbit-product route to epsilon differ."""


class TheoremViolation(ConsistencyError):
    """The two sides of the multiplicity identity differ."""
