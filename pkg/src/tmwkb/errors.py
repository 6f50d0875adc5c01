"""Exception hierarchy.

Configuration problems derive from :class:`ConfigError` (CLI exit code 2);
everything else under :class:`TunnelingError` is a numerical failure (exit 3).
"""


class TunnelingError(Exception):
    """Base class for all package errors."""


class ConfigError(TunnelingError, ValueError):
    """Invalid user input: parameters, sweep definitions, files."""


class UnsupportedReferenceError(ConfigError):
    """No closed-form transmission is known for the requested potential."""


class TurningPointError(TunnelingError, ValueError):
    """A classical turning point sits on (or too close to) a boundary or grid interface."""


class NoTurningPointsError(TunnelingError, ValueError):
    """The energy is above the barrier, so the WKB tunneling formula does not apply."""


class QuadratureError(TunnelingError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ResonanceError(TunnelingError, ZeroDivisionError):
    """The M22 element of the chain product vanished."""


class IntegrationError(TunnelingError, RuntimeError):
    """The polar-form trajectory became invalid (non-finite or r <= 0)."""


class ChainOverflowError(TunnelingError, OverflowError):
    """A transfer-matrix product overflowed even after renormalisation."""

    def __init__(self, message: str, index: int):
        super().__init__(f"{message} (segment index {index})")
        self.index = index
