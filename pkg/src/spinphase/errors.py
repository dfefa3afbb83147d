"""Exception types shared across the package."""


class SpinPhaseError(Exception):
    """Base class for all package errors."""


class ConfigError(SpinPhaseError):
    """Invalid user-facing configuration (CLI flags, config file, model spec)."""


class NumericalError(SpinPhaseError):
    """A numerical procedure failed or did not reach its tolerance."""


class PolicyError(NumericalError):
    """A ground-state selection policy could not be applied."""
