class OutOfRangeError(ValueError):
    def __init__(self, name: str, value: object, reason: str):
        super().__init__(f"{name}={value!r} out of range: {reason}")
        self.name = name
        self.value = value
        self.reason = reason
