from pathlib import Path
from typing import Optional, Tuple, Union
import struct

import numpy as np

from noisylab.data.images import LabeledImageSet
from noisylab.errors.idx_consistency_error import IdxConsistencyError
from noisylab.errors.idx_format_error import IdxFormatError
from noisylab.errors.idx_length_error import IdxLengthError

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

PathLike = Union[str, Path]


class Idx:
    """IDX (MNIST-style) image/label files: big-endian u32 header, u8 payload."""

    @staticmethod
    def load(image_path: PathLike, label_path: PathLike, classes: Optional[int] = None) -> LabeledImageSet:
        """Images scaled to [0, 1] by /255; ``classes`` defaults to max label + 1."""
        pixels, (count, height, width) = Idx.__read(Path(image_path), IMAGE_MAGIC, 3)
        labels, (label_count,) = Idx.__read(Path(label_path), LABEL_MAGIC, 1)
        if count != label_count:
            raise IdxConsistencyError(str(label_path), f"{label_count} labels for {count} images in '{image_path}'")

        images = pixels.reshape(count, 1, height, width).astype(np.float64) / 255.0
        labels = labels.astype(np.int64)
        if classes is None:
            classes = int(labels.max()) + 1 if labels.size else 1
        return LabeledImageSet(images=images, labels=labels, classes=classes, provenance="idx")

    @staticmethod
    def write(dataset: LabeledImageSet, image_path: PathLike, label_path: PathLike) -> Tuple[Path, Path]:
        count, channels, height, width = dataset.images.shape
        if channels != 1:
            raise IdxFormatError(str(image_path), f"IDX images are single-channel, got {channels} channels")
        if dataset.labels.size and dataset.labels.max() > 255:
            raise IdxFormatError(str(label_path), "labels must fit in one byte")

        image_path, label_path = Path(image_path), Path(label_path)
        pixels = np.rint(dataset.images[:, 0] * 255.0).astype(np.uint8)
        image_path.write_bytes(struct.pack(">IIII", IMAGE_MAGIC, count, height, width) + pixels.tobytes())
        label_path.write_bytes(struct.pack(">II", LABEL_MAGIC, count) + dataset.labels.astype(np.uint8).tobytes())
        return image_path, label_path

    @staticmethod
    def __read(path: Path, magic: int, rank: int):
        data = path.read_bytes()
        header_size = 4 * (1 + rank)
        if len(data) < 4:
            raise IdxLengthError(str(path), "file shorter than its magic number")
        (found,) = struct.unpack_from(">I", data, 0)
        if found != magic:
            raise IdxFormatError(str(path), f"magic 0x{found:08x}, expected 0x{magic:08x}")
        if len(data) < header_size:
            raise IdxLengthError(str(path), "truncated header")
        dims = struct.unpack_from(f">{rank}I", data, 4)
        size = int(np.prod(dims, dtype=np.int64))
        if len(data) < header_size + size:
            raise IdxLengthError(str(path), f"payload has {len(data) - header_size} bytes, header announces {size}")
        payload = np.frombuffer(data, dtype=np.uint8, count=size, offset=header_size)
        return payload, dims
