"""
Exception hierarchy shared by services, CLI and API.
"""


class RelaxometerError(Exception):
    """Base class for all relaxometer errors."""


class InvalidStateError(RelaxometerError, ValueError):
    """Matrix is not a valid density matrix (Hermitian, unit trace, PSD)."""


class BasisMismatchError(RelaxometerError, ValueError):
    """Operation received a density matrix tagged with the wrong basis."""


class UnknownPresetError(RelaxometerError, KeyError):
    """Unknown state or figure preset name."""

    def __str__(self) -> str:
        # KeyError quotes its argument; keep the message readable
        return str(self.args[0]) if self.args else "unknown preset"


class InvalidTimeError(RelaxometerError, ValueError):
    """Negative time or non-increasing time grid."""


class UnstableStepError(RelaxometerError, ValueError):
    """RK4 step larger than the stability bound."""


class ConvergenceError(RelaxometerError, RuntimeError):
    """Iterative routine did not converge."""


class ConfigError(RelaxometerError, ValueError):
    """Scenario configuration problem; `field` names the offending key."""

    def __init__(self, message: str, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field
