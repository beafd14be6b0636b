"""Exception types shared across the engine."""


class EcorecError(Exception):
    """Base class for all engine errors."""


class ParseError(EcorecError):
    """A data file line could not be parsed."""


class SchemaError(EcorecError):
    """An entity name was used with conflicting kinds."""


class DimensionError(EcorecError):
    """A vector or matrix has an unexpected shape."""


class CompletenessError(EcorecError):
    """A feature file does not cover the expected pattern set."""


class ConfigError(EcorecError):
    """Invalid configuration keys, values or command usage."""


class NumericalError(EcorecError):
    """Non-finite values encountered during training."""


class SamplingError(EcorecError):
    """Negative sampling is impossible for a region."""


class EvaluationError(EcorecError):
    """Evaluation requested on an empty or unusable split."""
