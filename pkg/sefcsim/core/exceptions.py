from dataclasses import dataclass
from typing import Any, Tuple


class SefcSimError(Exception):
    """Base exception for errors raised directly by sefcsim."""

    pass


@dataclass(frozen=True)
class ConfigViolation:
    """One violated configuration invariant."""

    field: str
    value: Any
    message: str

    def __str__(self) -> str:
        return f"{self.field}={self.value!r}: {self.message}"


class ConfigurationError(SefcSimError):
    """Raised for invalid simulator configuration or runtime settings."""

    pass


class ConfigFileNotFoundError(ConfigurationError, FileNotFoundError):
    """Raised when a configuration or sweep file does not exist."""

    pass


class ConfigParseError(ConfigurationError):
    """Raised for malformed configuration text or unknown keys."""

    def __init__(self, message: str, key: str | None = None) -> None:
        super().__init__(message)
        self.key = key


class ConfigValidationError(ConfigurationError):
    """Raised when a configuration violates one or more invariants."""

    def __init__(self, violations: Tuple[ConfigViolation, ...]) -> None:
        self.violations = tuple(violations)
        details = "; ".join(str(violation) for violation in self.violations)
        super().__init__(f"Invalid configuration: {details}")


class SimulationError(SefcSimError):
    """Raised when a simulation run cannot complete."""

    pass


class DegenerateStepError(SimulationError, ValueError):
    """Raised for kinematic updates over a non-positive time step."""

    pass


class UnknownNodeError(SimulationError, LookupError):
    """Raised when an operation references a node id that is not alive."""

    pass


class PreconditionError(SefcSimError, ValueError):
    """Raised when an operation is called outside its documented domain."""

    pass


class SweepError(SefcSimError):
    """Raised when a sweep cell fails; the message carries the cell context."""

    pass


class ComparisonError(SefcSimError):
    """Raised when a metrics table lacks the values needed for comparison."""

    pass
