from noisylab.errors.idx_format_error import IdxFormatError


class IdxLengthError(IdxFormatError):
    """Raised when an IDX payload is shorter than its header announces."""
