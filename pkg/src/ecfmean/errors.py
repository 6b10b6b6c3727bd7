"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class EstimationError(RuntimeError):
    """A numerical routine could not produce a trustworthy result."""


class ScheduleError(InvalidArgumentError):
    """A refinement schedule violates its validity condition."""


class SearchBoundsError(EstimationError):
    """The sublevel-set search bounds do not bracket a transition."""


class ConfigError(InvalidArgumentError):
    """An experiment configuration failed validation.

    The message starts with the dotted path of the offending field.
    """


class BenchError(RuntimeError):
    """A benchmark summary could not be computed (e.g. a degenerate fit)."""
