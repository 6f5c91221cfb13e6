"""Exception hierarchy shared across the package.

Everything raised deliberately by this library derives from MaceError so
callers can catch one base class at CLI or batch-pipeline boundaries.
"""


class MaceError(Exception):
    """Base class for all errors raised by mace_eval."""


class DimensionError(MaceError):
    """Vector dimensions are inconsistent, or a shape is not a 1-D vector."""


class DegenerateVectorError(MaceError):
    """An all-zero vector was passed where a direction is required."""


class InvalidEmbeddingError(MaceError):
    """An embedding contains NaN or infinite values."""


class MissingReferenceError(MaceError):
    """A reference-caption list was empty where at least one is required."""


class RangeError(MaceError):
    """A scalar argument is outside its documented range."""


class VariantInputError(MaceError):
    """A score component required by the selected variant is missing."""


class DecodeError(MaceError):
    """Malformed audio container or truncated payload."""


class UnsupportedFormatError(MaceError):
    """Audio codec or sample layout the decoder does not handle."""


class DuplicateKeyError(MaceError):
    """Two archive entries share the same key."""


class ArchiveIOError(MaceError):
    """Underlying I/O failure while reading or writing an archive."""


class ArchiveFormatError(MaceError):
    """Archive bytes do not conform to the documented layout."""


class KeyNotFoundError(MaceError):
    """Lookup key absent from an archive or score table."""


class ModelLoadError(MaceError):
    """Model directory, manifest, or graph failed to load or validate."""


class InferenceError(MaceError):
    """A loaded graph failed during execution or violated its contract."""


class BackendCapabilityError(MaceError):
    """The selected backend cannot perform the requested operation."""


class DatasetFormatError(MaceError):
    """A dataset line failed schema validation."""
