from dataclasses import dataclass
from typing import Tuple

from noisylab.errors.out_of_range_error import OutOfRangeError


@dataclass(frozen=True)
class LrSchedule:
    """Learning rate per epoch.

    ``linear``: ``base`` until ``decay_start * total_epochs``, then a straight
    line down to 0 at ``total_epochs``. ``step``: the epochs are cut into
    ``len(steps)`` equal stages (remainder to the last), stage k runs at
    ``steps[k]``.
    """

    base: float
    total_epochs: int
    decay_start: float = 0.4
    kind: str = "linear"
    steps: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.base < 0:
            raise OutOfRangeError("lr", self.base, "must be >= 0")
        if self.total_epochs < 0:
            raise OutOfRangeError("epochs", self.total_epochs, "must be >= 0")
        if not 0.0 <= self.decay_start <= 1.0:
            raise OutOfRangeError("decay-start", self.decay_start, "must lie in [0, 1]")
        if self.kind not in ("linear", "step"):
            raise OutOfRangeError("lr-schedule", self.kind, "expected 'linear' or 'step'")
        if self.kind == "step" and (not self.steps or any(r < 0 for r in self.steps)):
            raise OutOfRangeError("lr-steps", self.steps, "step schedule needs non-negative rates")

    def lr_at(self, epoch: int) -> float:
        if not 0 <= epoch <= self.total_epochs:
            raise OutOfRangeError("epoch", epoch, f"must lie in [0, {self.total_epochs}]")
        if self.kind == "step":
            stage_length = max(1, self.total_epochs // len(self.steps))
            return float(self.steps[min(epoch // stage_length, len(self.steps) - 1)])

        start = self.decay_start * self.total_epochs
        if epoch < start:
            return self.base
        span = self.total_epochs - start
        if span <= 0:
            return 0.0
        return self.base * ((self.total_epochs - epoch) / span)
