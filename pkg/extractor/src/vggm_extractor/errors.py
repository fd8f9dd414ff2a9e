"""Error taxonomy for the extractor tool."""


class ExtractorError(Exception):
    """Base class for extractor failures."""


class InvalidArgument(ExtractorError):
    """A caller-supplied argument is outside its documented domain."""


class WeightsError(ExtractorError):
    """Network weights could not be obtained for the requested architecture."""


class DecodeError(ExtractorError):
    """The input image could not be decoded."""
