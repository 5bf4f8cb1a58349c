import typing as tp


class Error(Exception):
    """Base class for exceptions in burgulence."""
    exit_code: tp.ClassVar[int] = 2


class ConfigurationError(Error):
    """Invalid configuration."""


class ResolutionError(Error):
    """Grid too coarse for the requested field."""


class DomainError(Error):
    """Argument outside the domain of the operation."""


class RangeError(Error):
    """Request exceeds the spectral truncation."""


class AlignmentError(Error):
    """Shift or time grid does not line up."""


class CoverageError(Error):
    """Stream does not cover the averaging window."""


class CheckpointError(Error):
    """Checkpoint record cannot be read."""


class FitError(Error):
    """Not enough data for a fit."""
    exit_code = 1


class UnderResolutionError(Error):
    """No dissipation breakpoint inside the resolved range."""
    exit_code = 1


class BlowUpError(Error):
    """Non-finite modes during time stepping."""
    exit_code = 3

    def __init__(self, msg: str, t: float, dt: float) -> None:
        super().__init__(f"{msg} (t={t:.6g}, dt={dt:.3g})")
        self.t = t
        self.dt = dt


class StepSizeError(Error):
    """Time step breaks the CFL condition."""
    exit_code = 3


class OutputError(Error):
    """Report or series cannot be written."""
    exit_code = 4
