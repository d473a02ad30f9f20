from __future__ import annotations
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple
import threading

import numpy as np

from noisylab.errors.tape_error import TapeError

# grad_out -> one gradient per recorded input (None where the input is a constant)
Backward = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_local = threading.local()


@dataclass
class _Record:
    inputs: Tuple[Optional[int], ...]
    shape: Tuple[int, ...]
    backward: Optional[Backward] = None  # None marks a gradient leaf


class Tape:
    """Define-by-run record of the operations of one forward pass.

    Node ids are positions in the record list, so every operation's inputs
    precede it and a single reverse sweep is a valid topological traversal.
    Entering the tape makes it the active tape of the current thread; tapes
    nest, and :meth:`suspended` pushes an inference-mode frame on top.
    """

    def __init__(self) -> None:
        self._records: List[_Record] = []
        self._leaves: List[int] = []

    def __enter__(self) -> "Tape":
        Tape.__stack().append(self)
        return self

    def __exit__(self, *exc) -> None:
        Tape.__stack().pop()

    @staticmethod
    def active() -> Optional["Tape"]:
        stack = Tape.__stack()
        return stack[-1] if stack else None

    @staticmethod
    @contextmanager
    def suspended() -> Iterator[None]:
        """Run the body in inference mode, whatever tape is active outside."""
        stack = Tape.__stack()
        stack.append(None)
        try:
            yield
        finally:
            stack.pop()

    @staticmethod
    def __stack() -> List[Optional["Tape"]]:
        if not hasattr(_local, "stack"):
            _local.stack = []
        return _local.stack

    # ------------------------------------------------------------- recording

    @property
    def leaves(self) -> List[int]:
        return list(self._leaves)

    def __len__(self) -> int:
        return len(self._records)

    def leaf(self, shape: Tuple[int, ...]) -> int:
        node = len(self._records)
        self._records.append(_Record(inputs=(), shape=tuple(shape)))
        self._leaves.append(node)
        return node

    def record(self, inputs: Tuple[Optional[int], ...], shape: Tuple[int, ...], backward: Backward) -> int:
        node = len(self._records)
        self._records.append(_Record(inputs=inputs, shape=tuple(shape), backward=backward))
        return node

    # --------------------------------------------------------------- reverse

    def gradients(self, loss_node: Optional[int], loss_shape: Tuple[int, ...]) -> Dict[int, np.ndarray]:
        """Reverse sweep from ``loss_node``; returns one gradient per leaf.

        ``loss_node`` is ``None`` for a loss that never touched a leaf, in which
        case every leaf gets zeros.
        """
        if int(np.prod(loss_shape, dtype=np.int64)) != 1:
            raise TapeError(f"backward needs a scalar loss, got shape {tuple(loss_shape)}")

        grads: List[Optional[np.ndarray]] = [None] * len(self._records)
        if loss_node is not None:
            grads[loss_node] = np.ones(loss_shape, dtype=np.float64)
            for node in range(loss_node, -1, -1):
                record = self._records[node]
                grad = grads[node]
                if grad is None or record.backward is None:
                    continue
                for input_node, input_grad in zip(record.inputs, record.backward(grad)):
                    if input_node is None or input_grad is None:
                        continue
                    previous = grads[input_node]
                    grads[input_node] = input_grad if previous is None else previous + input_grad

        result: Dict[int, np.ndarray] = {}
        for leaf in self._leaves:
            grad = grads[leaf]
            result[leaf] = grad if grad is not None else np.zeros(self._records[leaf].shape, dtype=np.float64)
        return result
