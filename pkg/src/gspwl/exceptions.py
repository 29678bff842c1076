"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`GSPError`,
so callers (the CLI in particular) can separate configuration mistakes from
numerical failures.
"""


class GSPError(Exception):
    """Base class for all library errors."""


class ConfigError(GSPError, ValueError):
    """Invalid user input: shapes, file contents, parameters."""


class NumericalError(GSPError, ArithmeticError):
    """A quantity that must be invertible or finite is not."""


# graph_core
class DisconnectedGraph(ConfigError):
    pass


class NonSymmetric(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


# augmented statistics
class EmptyDataset(ConfigError):
    pass


class NotUnitary(ConfigError):
    pass


class SingularSpectrum(NumericalError):
    """A graph-frequency variance of the observation is (numerically) zero."""


class SingularCovariance(NumericalError):
    pass


class SingularSchur(NumericalError):
    pass


# graph filters
class PoleOnSpectrum(NumericalError):
    pass


class InvalidInterval(ConfigError):
    pass


class IntervalTooSmall(NumericalError):
    pass


# experiments
class InvalidModel(ConfigError):
    pass


class DisconnectionRisk(GSPError):
    pass
