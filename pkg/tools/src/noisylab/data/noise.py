import math

import numpy as np

from noisylab.data.images import LabeledImageSet, NoisyDataset
from noisylab.errors.out_of_range_error import OutOfRangeError


class Noise:
    @staticmethod
    def inject_symmetric(dataset: LabeledImageSet, noise_rate: float, seed: int) -> NoisyDataset:
        """Corrupt exactly ``floor(noise_rate * N)`` labels, chosen without replacement.

        Each chosen label moves to one of the other ``classes - 1`` classes
        uniformly at random.
        """
        if not 0.0 <= noise_rate < 1.0:
            raise OutOfRangeError("noise-rate", noise_rate, "must lie in [0, 1)")
        if dataset.classes < 2:
            raise OutOfRangeError("classes", dataset.classes, "symmetric noise needs at least 2 classes")

        rng = np.random.default_rng(seed)
        count = math.floor(noise_rate * len(dataset))
        chosen = rng.choice(len(dataset), size=count, replace=False)
        shifts = rng.integers(1, dataset.classes, size=count)

        true_labels = dataset.labels.copy()
        noisy = true_labels.copy()
        noisy[chosen] = (true_labels[chosen] + shifts) % dataset.classes
        return NoisyDataset(base=dataset.relabel(noisy), true_labels=true_labels,
                            corruption_mask=noisy != true_labels, noise_rate=noise_rate)
