class IdxFormatError(ValueError):
    """Raised when a file does not follow the IDX layout it was opened as.

    The base class covers a wrong magic number; the length and consistency
    subclasses narrow it to truncated payloads and image/label count clashes.
    """

    def __init__(self, path: str, reason: str):
        super().__init__(f"malformed IDX file '{path}': {reason}")
        self.path = path
        self.reason = reason
