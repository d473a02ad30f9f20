class CheckpointFormatError(ValueError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"bad checkpoint '{path}': {reason}")
        self.path = path
        self.reason = reason
