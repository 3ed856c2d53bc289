"""Exception hierarchy shared by every module."""


class GkpError(Exception):
    """Base class for all package errors (CLI maps these to exit code 1)."""


class DomainError(GkpError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class AlignmentError(DomainError):
    """A grid operation needs an amount that is a whole number of cells."""


class TruncationError(GkpError):
    """Probability mass would fall outside a finite grid window."""

    def __init__(self, message: str, lost_mass: float):
        super().__init__(f"{message} (lost mass {lost_mass:.3e})")
        self.lost_mass = lost_mass


class DegenerateMeasurementError(GkpError):
    """The selected measurement outcome has zero probability."""


class ScheduleError(GkpError):
    """A pulse schedule cannot be built or emitted."""
