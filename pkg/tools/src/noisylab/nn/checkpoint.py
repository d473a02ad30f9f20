from pathlib import Path
from typing import List, Union
import struct

import numpy as np

from noisylab.errors.checkpoint_format_error import CheckpointFormatError
from noisylab.errors.tensor_error import TensorError
from noisylab.nn.architecture import Architecture
from noisylab.nn.network import ModelParams

_MAGIC = b"NLAB"
_VERSION = 1


class Checkpoint:
    """Flat binary container for one network.

    Layout (little-endian): ``NLAB``, version u32, descriptor length u32 +
    UTF-8 descriptor (architecture text, then ``seed=N`` when known), then per
    tensor: rank u32, extents u32 x rank, values f64.
    """

    @staticmethod
    def write(params: ModelParams, path: Union[str, Path]) -> Path:
        path = Path(path)
        descriptor = params.arch.describe()
        if params.seed is not None:
            descriptor += f" seed={params.seed}"
        text = descriptor.encode("utf-8")

        chunks: List[bytes] = [_MAGIC, struct.pack("<II", _VERSION, len(text)), text]
        for array in params.arrays:
            chunks.append(struct.pack("<I", array.ndim))
            chunks.append(struct.pack(f"<{array.ndim}I", *array.shape))
            chunks.append(np.ascontiguousarray(array, dtype="<f8").tobytes())
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(b"".join(chunks))
        return path

    @staticmethod
    def read(path: Union[str, Path]) -> ModelParams:
        path = Path(path)
        data = path.read_bytes()
        if data[:4] != _MAGIC:
            raise CheckpointFormatError(str(path), "missing NLAB magic")
        offset = 4
        version, length = Checkpoint.__unpack(data, offset, "<II", path)
        offset += 8
        if version != _VERSION:
            raise CheckpointFormatError(str(path), f"unsupported version {version}")
        if offset + length > len(data):
            raise CheckpointFormatError(str(path), "truncated descriptor")
        descriptor = data[offset:offset + length].decode("utf-8")
        offset += length

        arch_tokens = [t for t in descriptor.split() if not t.startswith("seed=")]
        seeds = [int(t[5:]) for t in descriptor.split() if t.startswith("seed=")]
        try:
            arch = Architecture.parse(" ".join(arch_tokens))
        except TensorError as exc:
            raise CheckpointFormatError(str(path), str(exc)) from exc

        arrays: List[np.ndarray] = []
        while offset < len(data):
            (rank,) = Checkpoint.__unpack(data, offset, "<I", path)
            offset += 4
            extents = Checkpoint.__unpack(data, offset, f"<{rank}I", path)
            offset += 4 * rank
            count = int(np.prod(extents, dtype=np.int64))
            if offset + 8 * count > len(data):
                raise CheckpointFormatError(str(path), "truncated tensor values")
            values = np.frombuffer(data, dtype="<f8", count=count, offset=offset)
            arrays.append(values.astype(np.float64).reshape(extents))
            offset += 8 * count

        try:
            return ModelParams(arch=arch, arrays=tuple(arrays), seed=seeds[0] if seeds else None)
        except TensorError as exc:
            raise CheckpointFormatError(str(path), str(exc)) from exc

    @staticmethod
    def __unpack(data: bytes, offset: int, fmt: str, path: Path) -> tuple:
        size = struct.calcsize(fmt)
        if offset + size > len(data):
            raise CheckpointFormatError(str(path), "truncated header")
        return struct.unpack_from(fmt, data, offset)
