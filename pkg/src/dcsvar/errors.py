"""Exception types shared across the package."""

from __future__ import annotations


class DcsvarError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(DcsvarError, ValueError):
    """An argument is outside its admissible range or inconsistent."""


class DegenerateInputError(DcsvarError, ValueError):
    """Input data is degenerate (constant column, too few rows, NaN/inf)."""


class NotPositiveDefiniteError(DcsvarError):
    """A covariance matrix required to be positive definite is not."""

    def __init__(self, message: str, smallest_eigenvalue: float | None = None):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue


class EstimationError(DcsvarError):
    """A regression design is rank deficient or otherwise unusable."""


class SimulationError(DcsvarError):
    """A simulated path left the representable range."""


class InternalConsistencyError(DcsvarError):
    """An internal numerical identity failed beyond tolerance; report a bug."""


class DataFormatError(DcsvarError, ValueError):
    """A data file could not be parsed; message pinpoints row and column."""
