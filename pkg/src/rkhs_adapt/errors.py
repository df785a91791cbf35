"""Exception and warning types shared across the package."""

__all__ = [
    "RkhsAdaptError",
    "NotHurwitz",
    "NotSymmetric",
    "NotPositiveDefinite",
    "DuplicateCenters",
    "KernelMismatch",
    "NonFiniteDerivative",
    "UnstableIntegration",
    "WindowOutOfRange",
    "NotApplicable",
    "ParseError",
    "TooFewPoints",
    "ConfigError",
    "IllConditioned",
]


class RkhsAdaptError(Exception):
    """Base class for all package-specific errors."""


class NotHurwitz(RkhsAdaptError):
    """A system matrix has an eigenvalue with real part >= -1e-12."""


class NotSymmetric(RkhsAdaptError):
    """A matrix required to be symmetric is not, beyond tolerance."""


class NotPositiveDefinite(RkhsAdaptError):
    """A matrix required to be positive definite has a nonpositive pivot."""


class DuplicateCenters(RkhsAdaptError):
    """Two expansion centers coincide within tolerance."""


class KernelMismatch(RkhsAdaptError):
    """Two expansions that must share a kernel do not."""


class NonFiniteDerivative(RkhsAdaptError):
    """The system right-hand side evaluated to NaN or infinity."""


class UnstableIntegration(RkhsAdaptError):
    """A state norm exceeded the divergence bound during integration."""


class WindowOutOfRange(RkhsAdaptError):
    """A requested time window is not covered by the recorded trajectory."""


class NotApplicable(RkhsAdaptError):
    """A diagnostic was requested on a run that cannot support it."""


class ParseError(RkhsAdaptError):
    """A text input failed to parse; carries the offending row number."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class TooFewPoints(RkhsAdaptError):
    """An ingested profile has fewer than two usable knots."""


class ConfigError(RkhsAdaptError):
    """An experiment configuration field failed validation."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class IllConditioned(UserWarning):
    """A Grammian is numerically ill-conditioned; results may degrade."""
