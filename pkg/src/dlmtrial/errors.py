"""Exception types shared across the package."""


class NumericalDomainError(ValueError):
    """A quantity left its numerical domain (non-finite input, negative
    variance, covariance eigenvalue below tolerance, ...)."""


class ProtocolError(RuntimeError):
    """A live-session operation was called in the wrong phase."""


class InsufficientSamples(Exception):
    """Not enough observations per arm yet; the statistic is not evaluable."""


class DegenerateSamples(Exception):
    """Pooled variance is zero; the t statistic is undefined."""


class ReplayMismatch(RuntimeError):
    """An event log does not reproduce the recorded trajectory."""
