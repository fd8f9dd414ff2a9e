"""Exception hierarchy shared across the pipeline."""


class S2Error(Exception):
    """Base class for all pipeline errors."""


class DecodeError(S2Error):
    """Malformed or truncated image stream."""


class UnsupportedFormat(S2Error):
    """Image format or bit depth we do not handle."""


class InvalidArgument(S2Error):
    """Caller passed an out-of-contract value."""


class ShapeError(S2Error):
    """Dimension mismatch between operands."""


class AspectError(S2Error):
    """Equirectangular input does not have 2:1 aspect."""


class DepthError(S2Error):
    """Pyramid depth incompatible with image size."""


class ConvergenceError(S2Error):
    """Iterative solver exceeded its iteration budget."""


class DegenerateInput(S2Error):
    """Statistic undefined for constant or too-small input."""


class SchemaError(S2Error):
    """Structured file violates its declared schema."""


class CorruptFile(S2Error):
    """Checksum mismatch in a binary payload."""


class MissingFeature(S2Error):
    """Manifest entry lacks a required feature file."""
