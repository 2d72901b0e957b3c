"""Exception types shared across the package."""


class LyapmapError(Exception):
    """Base class for all package-specific errors."""


class DegenerateMap(LyapmapError):
    """Numerator and denominator share a homogeneous root (resultant ~ 0)."""


class BudgetExceeded(LyapmapError):
    """A requested computation would exceed the configured degree budget."""


class RootFindingFailure(LyapmapError):
    """The polynomial solver missed its accuracy target.

    Carries the best-effort root set so callers can report partial results
    instead of fabricating rows.
    """

    def __init__(self, message, best_effort=None, suggested_bits=None):
        super().__init__(message)
        self.best_effort = best_effort
        self.suggested_bits = suggested_bits


class NoConvergence(LyapmapError):
    """Newton refinement diverged; caller should keep the original value."""


class TargetRejected(LyapmapError):
    """Preimage target was flagged by the bad-target scan and not forced."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class UnknownPreset(LyapmapError):
    """Preset name does not match any shipped map family."""


class ConfigError(LyapmapError):
    """Invalid CLI / run configuration."""
