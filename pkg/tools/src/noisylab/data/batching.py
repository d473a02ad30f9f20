import math
from typing import List, Sequence, Tuple, Union

import numpy as np

from noisylab.data.images import Batch, FlipView, LabeledImageSet, NoisyDataset
from noisylab.errors.out_of_range_error import OutOfRangeError

Indexable = Union[LabeledImageSet, NoisyDataset, FlipView]


class Batching:
    @staticmethod
    def hflip(image: np.ndarray) -> np.ndarray:
        """Reverse the column order (last axis); works on one image or a stack."""
        return np.ascontiguousarray(image[..., ::-1])

    @staticmethod
    def split(dataset: LabeledImageSet, fractions: Sequence[float], seed: int) -> Tuple[LabeledImageSet, LabeledImageSet]:
        """Seeded shuffle, then ``[train | test]``; the test part is floored, the remainder trains."""
        if len(fractions) != 2 or any(f <= 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
            raise OutOfRangeError("fractions", tuple(fractions), "need two positive fractions summing to 1")
        order = np.random.default_rng(seed).permutation(len(dataset))
        test_size = math.floor(fractions[1] * len(dataset))
        train_size = len(dataset) - test_size
        return dataset.subset(order[:train_size]), dataset.subset(order[train_size:])

    @staticmethod
    def batches(dataset: Indexable, batch_size: int, epoch: int, seed: int) -> List[Batch]:
        """One epoch of mini-batches in a permutation fixed by ``(seed, epoch)``."""
        if batch_size < 1:
            raise OutOfRangeError("batch-size", batch_size, "must be >= 1")
        order = np.random.default_rng([seed, epoch]).permutation(len(dataset))
        images, labels = dataset.images, dataset.labels
        result: List[Batch] = []
        for start in range(0, len(order), batch_size):
            indexes = order[start:start + batch_size]
            result.append(Batch(indexes=indexes, images=images[indexes], labels=labels[indexes]))
        return result
