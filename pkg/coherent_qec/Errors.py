# coherent_qec/Errors.py

from typing import Any, Dict, Optional


class CoherentQECError(Exception):
    """Base class for every error raised by the simulator."""


class InvalidArgument(CoherentQECError, ValueError):
    """An argument is outside the domain an operation accepts."""


class ZeroProbabilityOutcome(CoherentQECError):
    """
    The requested Kraus branch has vanishing probability on the given state.

    Raised by the covariance update when det(M - D) falls below the
    zero-probability threshold. Callers must not select such a branch.
    """

    def __init__(self, message: str, det: float = 0.0):
        super().__init__(message)
        self.det = det


class NumericalDegeneracy(CoherentQECError):
    """Every branch of a measurement came out below the zero-probability threshold."""


class InternalInvariantViolation(CoherentQECError):
    """A quantity that must hold by construction did not."""


class FitDiverged(CoherentQECError):
    """The scaling-ansatz fit found no usable crossing in the data."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigurationError(CoherentQECError):
    """An experiment or settings file could not be read or validated."""
