class ExtractError(Exception):
    """Base class for extractor errors."""


class AssetError(ExtractError):
    """An input file could not be decoded."""


class CompletenessError(ExtractError):
    """A listed pattern is missing its text or image asset."""


class EncoderError(ExtractError):
    """The requested encoder is unknown or its weights are unavailable."""
