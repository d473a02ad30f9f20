class TensorError(ValueError):
    """Raised when a tensor operation is handed operands it cannot accept.

    Covers shape/length mismatches at construction, non-finite values, inner
    dimension disagreements, invalid reduction axes and kernels larger than
    their input.
    """

    def __init__(self, op: str, reason: str):
        super().__init__(f"{op}: {reason}")
        self.op = op
        self.reason = reason
