from typing import Callable, Dict

import numpy as np

from noisylab.autodiff.tape import Tape
from noisylab.autodiff.tensor import Tensor
from noisylab.errors.tape_error import TapeError

ScalarFn = Callable[[Tensor], Tensor]


class Grad:
    """Reverse-mode gradients off the active tape, plus a finite-difference check."""

    @staticmethod
    def backward(loss: Tensor) -> Dict[int, Tensor]:
        """Gradient of a scalar ``loss`` for every leaf of the active tape.

        Leaves the loss does not reach get zeros, and a loss that never touched
        the tape (a constant) yields all-zero gradients.
        """
        tape = Tape.active()
        if tape is None:
            raise TapeError("backward needs an active tape")
        grads = tape.gradients(loss.node, loss.shape)
        return {leaf: Tensor(grad) for leaf, grad in grads.items()}

    @staticmethod
    def check(f: ScalarFn, point: Tensor, eps: float = 1e-5) -> float:
        """Max relative error between backward() and central differences.

        Per coordinate the error is ``|a - n| / max(1e-8, |a| + |n|)``.
        """
        base = np.array(point.data, dtype=np.float64)
        with Tape():
            x = Tensor.parameter(base.copy())
            analytic = Grad.backward(f(x))[x.node].data.ravel()

        flat = base.ravel()
        numeric = np.empty_like(flat)
        with Tape.suspended():
            for i in range(flat.size):
                plus, minus = flat.copy(), flat.copy()
                plus[i] += eps
                minus[i] -= eps
                high = f(Tensor(plus.reshape(base.shape))).item()
                low = f(Tensor(minus.reshape(base.shape))).item()
                numeric[i] = (high - low) / (2.0 * eps)

        if flat.size == 0:
            return 0.0
        error = np.abs(analytic - numeric) / np.maximum(1e-8, np.abs(analytic) + np.abs(numeric))
        return float(error.max())
