from dataclasses import dataclass
from pathlib import Path
from typing import Union
import math

import numpy as np

from noisylab.data.images import Batch
from noisylab.errors.empty_input_error import EmptyInputError
from noisylab.errors.out_of_range_error import OutOfRangeError
from noisylab.losses import PerSampleLosses


@dataclass(frozen=True)
class SelectionSchedule:
    noise_rate: float
    warmup_epochs: int
    total_epochs: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.noise_rate < 1.0:
            raise OutOfRangeError("noise-rate", self.noise_rate, "must lie in [0, 1)")
        if not 1 <= self.warmup_epochs:
            raise OutOfRangeError("tk", self.warmup_epochs, "must be >= 1")
        if self.total_epochs < 0:
            raise OutOfRangeError("epochs", self.total_epochs, "must be >= 0")


@dataclass(frozen=True)
class SelectedSet:
    """Ascending, unique global indexes kept as clean at ``epoch``."""

    epoch: int
    keep_ratio: float
    indexes: np.ndarray

    def __len__(self) -> int:
        return int(self.indexes.shape[0])

    def dump(self, path: Union[str, Path]) -> Path:
        """One index per line, for auditing the clean rate offline."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("".join(f"{i}\n" for i in self.indexes.tolist()))
        return path


class Selection:
    """Keep-ratio schedule and small-loss selection."""

    @staticmethod
    def keep_ratio(schedule: SelectionSchedule, t: int) -> float:
        """``1 - min(t / T_k * tau, tau)``."""
        if not 0 <= t <= schedule.total_epochs:
            raise OutOfRangeError("epoch", t, f"must lie in [0, {schedule.total_epochs}]")
        tau = schedule.noise_rate
        return 1.0 - min(t / schedule.warmup_epochs * tau, tau)

    @staticmethod
    def select_small_loss(losses: PerSampleLosses, keep_ratio: float, epoch: int = 0) -> SelectedSet:
        """Indexes of the ``floor(R * N)`` smallest losses, ties to the smaller index."""
        if len(losses) == 0:
            raise EmptyInputError("loss vector")
        if not 0.0 < keep_ratio <= 1.0:
            raise OutOfRangeError("keep-ratio", keep_ratio, "must lie in (0, 1]")
        count = math.floor(keep_ratio * len(losses))
        order = Selection.rank(losses.values)
        return SelectedSet(epoch=epoch, keep_ratio=keep_ratio, indexes=np.sort(order[:count]))

    @staticmethod
    def rank(values: np.ndarray) -> np.ndarray:
        """Positions sorted by (value, position)."""
        return np.lexsort((np.arange(values.shape[0]), values))

    @staticmethod
    def batch_selected(selected: SelectedSet, batch: Batch) -> np.ndarray:
        return np.isin(batch.indexes, selected.indexes)
