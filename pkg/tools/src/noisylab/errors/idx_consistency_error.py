from noisylab.errors.idx_format_error import IdxFormatError


class IdxConsistencyError(IdxFormatError):
    """Raised when an image file and its label file disagree on the item count."""
