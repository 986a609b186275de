class BellQedError(Exception):
    """Base class for every error raised by the simulator."""


class ConfigurationError(BellQedError, ValueError):
    """Invalid or incomplete device configuration."""


class GateError(BellQedError, ValueError):
    """A gate matrix failed its shape or unitarity check."""


class StateError(BellQedError, ValueError):
    """A state vector failed its shape or normalization check."""


class SingularPointError(BellQedError, ValueError):
    """The closed-form spectrum denominator vanished at a grid point."""

    def __init__(self, delta_r: float, message: str = None):
        self.delta_r = delta_r
        super().__init__(message or f"Closed-form denominator vanishes at delta_r={delta_r!r} rad/ns")


class CutoffError(BellQedError, ValueError):
    """The truncated Fock space is too small for the requested drive."""


class ConvergenceError(BellQedError, ValueError):
    """A stationary-state solve did not reach the requested residual."""


class CoverageError(BellQedError, ValueError):
    """The detuning grid does not cover a required cavity pull."""


class ReadoutError(BellQedError, ValueError):
    """Probabilities could not be extracted from a spectrum."""


class TraceFormatError(BellQedError, ValueError):
    """A trace or report file could not be parsed."""


class UsageError(BellQedError, ValueError):
    """Invalid command-line usage."""
