from __future__ import annotations
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from noisylab.autodiff.tensor import Tensor
from noisylab.errors.out_of_range_error import OutOfRangeError
from noisylab.errors.tensor_error import TensorError


@dataclass(frozen=True)
class LabeledImageSet:
    """``images`` is N x C x H x W in [0, 1]; ``labels`` are class indexes in [0, classes)."""

    images: np.ndarray
    labels: np.ndarray
    classes: int
    provenance: str = "synthetic"

    def __post_init__(self) -> None:
        if self.images.ndim != 4:
            raise TensorError("image set", f"expected N x C x H x W images, got {self.images.shape}")
        if self.labels.shape != (self.images.shape[0],):
            raise TensorError("image set", f"{self.labels.shape} labels for {self.images.shape[0]} images")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.classes):
            raise OutOfRangeError("label", int(self.labels.max()), f"must lie in [0, {self.classes})")
        if self.images.size and (self.images.min() < 0.0 or self.images.max() > 1.0):
            raise OutOfRangeError("pixel", float(self.images.max()), "must lie in [0, 1]")

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def sample_shape(self):
        return tuple(self.images.shape[1:])

    def subset(self, indexes: np.ndarray) -> "LabeledImageSet":
        return LabeledImageSet(images=self.images[indexes], labels=self.labels[indexes],
                               classes=self.classes, provenance=self.provenance)

    def relabel(self, labels: np.ndarray) -> "LabeledImageSet":
        return LabeledImageSet(images=self.images, labels=labels, classes=self.classes,
                               provenance=self.provenance)


@dataclass(frozen=True)
class NoisyDataset:
    """A training set whose ``base.labels`` are the (possibly corrupted) labels in use."""

    base: LabeledImageSet
    true_labels: np.ndarray
    corruption_mask: np.ndarray
    noise_rate: float

    def __post_init__(self) -> None:
        if not np.array_equal(self.corruption_mask, self.base.labels != self.true_labels):
            raise TensorError("noisy dataset", "corruption mask disagrees with labels")

    def __len__(self) -> int:
        return len(self.base)

    @property
    def images(self) -> np.ndarray:
        return self.base.images

    @property
    def labels(self) -> np.ndarray:
        return self.base.labels

    @property
    def classes(self) -> int:
        return self.base.classes

    @staticmethod
    def clean(base: LabeledImageSet) -> "NoisyDataset":
        return NoisyDataset(base=base, true_labels=base.labels.copy(),
                            corruption_mask=np.zeros(len(base), dtype=bool), noise_rate=0.0)


class FlipView:
    """Horizontally flipped counterpart of a dataset, materialized on first use.

    Labels and corruption mask are the source's own objects; flipping a flip
    view gives back the source pixels.
    """

    def __init__(self, source: Union[NoisyDataset, "FlipView"]):
        self.source = source
        self._images: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.source)

    @property
    def images(self) -> np.ndarray:
        if self._images is None:
            self._images = np.ascontiguousarray(self.source.images[..., ::-1])
        return self._images

    @property
    def labels(self) -> np.ndarray:
        return self.source.labels

    @property
    def corruption_mask(self) -> np.ndarray:
        return self.source.corruption_mask

    @property
    def classes(self) -> int:
        return self.source.classes

    def flip(self) -> "FlipView":
        return FlipView(self)


@dataclass(frozen=True)
class Batch:
    indexes: np.ndarray
    images: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return int(self.indexes.shape[0])

    def tensor(self) -> Tensor:
        return Tensor(self.images)
