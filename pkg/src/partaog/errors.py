"""Exception types raised by the engine."""


class PartAogError(Exception):
    """Base class for all engine errors."""


class VolumeFormatError(PartAogError):
    """Malformed feature-volume file (bad magic, truncation, negative activation)."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = "%s (byte offset %d)" % (message, offset)
        super().__init__(message)
        self.offset = offset


class GridBoundsError(PartAogError):
    """Grid position outside a slice, or an empty deformation window."""


class MissingSliceError(PartAogError):
    """A pattern references a (layer, channel) the volume does not carry."""


class EmptyModelError(PartAogError):
    """Operation needs at least one part template."""


class DatasetError(PartAogError):
    """Missing volume file, duplicate image id, or empty dataset."""


class AnnotationError(PartAogError):
    """Annotation rejected: degenerate box, out-of-bounds, or off-grid center."""


class SessionStateError(PartAogError):
    """Question/answer protocol violation (double answer, stale step, exhausted pool)."""


class UndefinedDistanceError(PartAogError):
    """Appearance distance between two all-zero descriptors."""


class ConfigError(PartAogError):
    """Rejected configuration value."""
