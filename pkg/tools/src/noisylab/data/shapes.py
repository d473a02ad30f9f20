from typing import Callable, Dict

import numpy as np

from noisylab.data.images import LabeledImageSet
from noisylab.errors.out_of_range_error import OutOfRangeError

_NOISE_SIGMA = 0.1
_MIN_SIDE = 12

Template = Callable[[np.ndarray, np.ndarray, int], np.ndarray]


def _disk(dy: np.ndarray, dx: np.ndarray, side: int) -> np.ndarray:
    return dy ** 2 + dx ** 2 <= (side * 0.28) ** 2


def _ring(dy: np.ndarray, dx: np.ndarray, side: int) -> np.ndarray:
    r2 = dy ** 2 + dx ** 2
    return (r2 <= (side * 0.32) ** 2) & (r2 >= (side * 0.18) ** 2)


def _plus(dy: np.ndarray, dx: np.ndarray, side: int) -> np.ndarray:
    arm, width = side * 0.32, max(1.0, side / 16)
    return ((np.abs(dy) <= width) & (np.abs(dx) <= arm)) | ((np.abs(dx) <= width) & (np.abs(dy) <= arm))


def _box(dy: np.ndarray, dx: np.ndarray, side: int) -> np.ndarray:
    reach = side * 0.32
    return (np.abs(dy) <= reach) & (np.abs(dx) <= reach)


def _period(side: int) -> int:
    return max(2, side // 8)


def _horizontal_bars(dy: np.ndarray, dx: np.ndarray, side: int) -> np.ndarray:
    return _box(dy, dx, side) & ((np.floor(np.abs(dy)) // _period(side)) % 2 == 0)


def _vertical_bars(dy: np.ndarray, dx: np.ndarray, side: int) -> np.ndarray:
    return _box(dy, dx, side) & ((np.floor(np.abs(dx)) // _period(side)) % 2 == 0)


def _checker(dy: np.ndarray, dx: np.ndarray, side: int) -> np.ndarray:
    cells = np.floor(np.abs(dy)) // _period(side) + np.floor(np.abs(dx)) // _period(side)
    return _box(dy, dx, side) & (cells % 2 == 0)


# Every template depends on dx only through |dx|, so a horizontal flip maps a
# shape onto the same class at the mirrored offset.
_TEMPLATES: Dict[str, Template] = {
    "disk": _disk,
    "ring": _ring,
    "plus": _plus,
    "horizontal_bars": _horizontal_bars,
    "vertical_bars": _vertical_bars,
    "checker": _checker,
}


class ShapeGenerator:
    """Seeded desk-scale image sets of flip-invariant shape classes."""

    class_names = tuple(_TEMPLATES)

    @staticmethod
    def gen_symmetric_shapes(n: int, classes: int, side: int, seed: int) -> LabeledImageSet:
        """``n`` single-channel ``side`` x ``side`` images, classes balanced to within one.

        Each image is its class template at a random offset of up to
        ``side // 6`` pixels per axis plus Gaussian pixel noise (sigma 0.1),
        clipped to [0, 1].
        """
        if not 1 <= classes <= len(_TEMPLATES):
            raise OutOfRangeError("classes", classes, f"must lie in [1, {len(_TEMPLATES)}]")
        if side < _MIN_SIDE:
            raise OutOfRangeError("side", side, f"must be >= {_MIN_SIDE}")
        if n < 0:
            raise OutOfRangeError("n", n, "must be >= 0")

        rng = np.random.default_rng(seed)
        labels = np.arange(n, dtype=np.int64) % classes
        rng.shuffle(labels)
        reach = side // 6
        offsets = rng.integers(-reach, reach + 1, size=(n, 2))
        noise = rng.normal(0.0, _NOISE_SIGMA, size=(n, 1, side, side))

        yy, xx = np.mgrid[0:side, 0:side].astype(np.float64)
        centre = (side - 1) / 2.0
        templates = [_TEMPLATES[name] for name in ShapeGenerator.class_names[:classes]]
        images = np.empty((n, 1, side, side), dtype=np.float64)
        for i in range(n):
            dy = yy - (centre + offsets[i, 0])
            dx = xx - (centre + offsets[i, 1])
            images[i, 0] = templates[labels[i]](dy, dx, side)
        images = np.clip(images + noise, 0.0, 1.0)
        return LabeledImageSet(images=images, labels=labels, classes=classes, provenance="synthetic")
