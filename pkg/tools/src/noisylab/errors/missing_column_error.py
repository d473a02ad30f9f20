class MissingColumnError(KeyError):
    def __init__(self, column: str, path: str):
        super().__init__(f"column '{column}' not found in '{path}'")
        self.column = column
        self.path = path

    def __str__(self) -> str:
        return self.args[0]
