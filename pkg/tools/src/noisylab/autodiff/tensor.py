from __future__ import annotations
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from noisylab.autodiff.tape import Tape
from noisylab.errors.tensor_error import TensorError

ArrayLike = Union[np.ndarray, Sequence[float], float]


class Tensor:
    """Dense 64-bit real array, optionally bound to a node of the active tape.

    ``node`` is ``None`` for constants and for everything computed in
    inference mode; such tensors are never mutated by the library and can be
    shared freely.
    """

    __slots__ = ("data", "node")

    def __init__(self, data: np.ndarray, node: Optional[int] = None):
        self.data = data
        self.node = node

    @staticmethod
    def of(shape: Sequence[int], values: ArrayLike, trainable: bool = False) -> "Tensor":
        """Build a leaf from a shape and row-major values."""
        shape = tuple(int(extent) for extent in shape)
        if any(extent < 0 for extent in shape):
            raise TensorError("tensor", f"negative extent in shape {shape}")
        flat = np.asarray(values, dtype=np.float64).ravel()
        expected = int(np.prod(shape, dtype=np.int64))
        if flat.size != expected:
            raise TensorError("tensor", f"shape {shape} needs {expected} values, got {flat.size}")
        if not np.all(np.isfinite(flat)):
            raise TensorError("tensor", "values must be finite")
        data = flat.reshape(shape).copy()
        return Tensor.parameter(data) if trainable else Tensor(data)

    @staticmethod
    def constant(array: ArrayLike) -> "Tensor":
        return Tensor(np.asarray(array, dtype=np.float64))

    @staticmethod
    def parameter(array: ArrayLike) -> "Tensor":
        """A trainable leaf; registered on the active tape if there is one."""
        data = np.asarray(array, dtype=np.float64)
        tape = Tape.active()
        node = tape.leaf(data.shape) if tape is not None else None
        return Tensor(data, node)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def values(self) -> np.ndarray:
        return self.data.ravel()

    @property
    def taped(self) -> bool:
        return self.node is not None

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        node = f", node={self.node}" if self.node is not None else ""
        return f"Tensor(shape={self.shape}{node})"
