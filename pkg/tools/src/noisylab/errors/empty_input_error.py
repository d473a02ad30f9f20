class EmptyInputError(ValueError):
    """Raised when an operation that aggregates over items receives none."""

    def __init__(self, what: str):
        super().__init__(f"{what} is empty")
        self.what = what
