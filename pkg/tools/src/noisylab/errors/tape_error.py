class TapeError(RuntimeError):
    """Raised when a backward pass is requested that the tape cannot serve."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason
