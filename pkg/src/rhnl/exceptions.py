"""Exception hierarchy shared across the package."""


class RHNLError(Exception):
    """Base class for all errors raised by rhnl."""


class ParameterError(RHNLError, ValueError):
    """A map, layout, or hyperparameter value is out of its valid range."""


class DimensionError(RHNLError, ValueError):
    """Array shapes or vector lengths do not agree."""


class DomainError(RHNLError, ValueError):
    """Input data lies outside the normalized [0, 1] domain."""


class TrainingError(RHNLError, ValueError):
    """A classifier cannot be fitted on the given labels."""


class ParseError(RHNLError, ValueError):
    """A CSV file could not be parsed."""


class SplitError(RHNLError, ValueError):
    """Requested split counts are infeasible for the dataset."""


class StratificationError(SplitError):
    """A class has fewer samples than the number of folds."""
