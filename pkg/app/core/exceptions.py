"""
Errors raised by the simulation apps.
"""


class SimulationError(Exception):
    """Base class for every error raised by the simulation apps."""


class InvalidArgumentError(SimulationError, ValueError):
    """An argument violates an operation's preconditions."""


class ConfigurationError(SimulationError, ValueError):
    """A scenario, preset or experiment config cannot be realized."""


class RankDeficiencyError(SimulationError):
    """A least-squares system is rank deficient."""

    def __init__(self, message, condition):
        super().__init__(message)
        self.condition = condition


class NearSingularError(SimulationError):
    """A Gram matrix stays singular even after regularization."""


class DegenerateChannelError(SimulationError):
    """A channel carries no energy, so it cannot be normalized."""


class EqualizerDesignError(SimulationError):
    """The zero-forcing equalizer could not be designed."""


class InsufficientDataError(SimulationError):
    """Too few samples or records for a stable estimate."""


class DegenerateDistributionError(SimulationError):
    """Samples have no spread, so a shape estimate is undefined."""


class FormatError(SimulationError):
    """A cache or result file is corrupt or of an unknown version."""


class HeaderMismatchError(FormatError):
    """A cache file does not match the parameters it was loaded for."""


class CoverageError(SimulationError):
    """Result summaries miss cells a figure needs."""

    def __init__(self, message, missing):
        super().__init__(message)
        self.missing = list(missing)
