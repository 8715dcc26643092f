"""Exception types raised by the clband library."""


class ClbandError(Exception):
    """Base class for all library errors."""


class GridError(ClbandError):
    """Invalid channel-plan construction (overlapping bands, bad counts)."""


class ConfigError(ClbandError):
    """Unreadable or schema-violating configuration."""


class PhysicsError(ClbandError):
    """Nonphysical inputs or a failed propagation computation."""


class QuadratureError(ClbandError):
    """NLI quadrature did not converge to the requested tolerance."""


class InfeasibleProblemError(ClbandError):
    """No launch power satisfies the per-channel SNR-threshold constraint.

    Carries the violating (channel_index, format_m) pairs in ``violations``.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class TopologyError(ClbandError):
    """Malformed or disconnected topology."""
