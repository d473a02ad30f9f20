from typing import Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from noisylab.autodiff.tape import Backward, Tape
from noisylab.autodiff.tensor import Tensor
from noisylab.errors.tensor_error import TensorError

Operand = Union[Tensor, float, int]

# Floor applied before logarithms of probabilities.
LOG_FLOOR = 1e-12

_UNARY = ("relu", "square", "exp", "log")
_BINARY = ("add", "sub", "mul")


class Ops:
    """Differentiable primitives over :class:`Tensor`.

    Every primitive computes its value with numpy and, when the active tape
    holds at least one of its inputs, records a backward rule mapping the
    output gradient to one gradient per input. With no active tape the same
    arithmetic runs and nothing is recorded, so taped and inference values
    are identical.
    """

    # ------------------------------------------------------------ recording

    @staticmethod
    def emit(value: np.ndarray, inputs: Sequence[Tensor], backward: Backward) -> Tensor:
        tape = Tape.active()
        if tape is None or all(t.node is None for t in inputs):
            return Tensor(value)
        node = tape.record(tuple(t.node for t in inputs), value.shape, backward)
        return Tensor(value, node)

    # ----------------------------------------------------------- primitives

    @staticmethod
    def affine(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
        if x.data.ndim != 2 or weight.data.ndim != 2 or bias.data.ndim != 1:
            raise TensorError("affine", f"expected [B,I] x [I,O] + [O], got {x.shape}, {weight.shape}, {bias.shape}")
        if x.shape[1] != weight.shape[0] or weight.shape[1] != bias.shape[0]:
            raise TensorError("affine", f"dimension mismatch {x.shape} x {weight.shape} + {bias.shape}")
        xv, wv = x.data, weight.data
        out = xv @ wv + bias.data

        def backward(g: np.ndarray):
            return g @ wv.T, xv.T @ g, g.sum(axis=0)

        return Ops.emit(out, (x, weight, bias), backward)

    @staticmethod
    def elementwise(kind: str, a: Tensor, b: Optional[Operand] = None) -> Tensor:
        """``relu``/``square``/``exp``/``log`` take one operand; ``add``/``sub``/``mul``
        take a same-shaped tensor or a scalar; ``scale`` takes a scalar."""
        if kind in _UNARY:
            return Ops.__unary(kind, a)
        if kind == "scale":
            if isinstance(b, Tensor) or b is None:
                raise TensorError("scale", "needs a scalar factor")
            return Ops.__scalar("mul", a, float(b))
        if kind in _BINARY:
            if b is None:
                raise TensorError(kind, "needs a second operand")
            if not isinstance(b, Tensor):
                return Ops.__scalar(kind, a, float(b))
            return Ops.__binary(kind, a, b)
        raise TensorError("elementwise", f"unknown kind '{kind}'")

    @staticmethod
    def relu(a: Tensor) -> Tensor:
        return Ops.elementwise("relu", a)

    @staticmethod
    def add(a: Tensor, b: Operand) -> Tensor:
        return Ops.elementwise("add", a, b)

    @staticmethod
    def sub(a: Tensor, b: Operand) -> Tensor:
        return Ops.elementwise("sub", a, b)

    @staticmethod
    def mul(a: Tensor, b: Operand) -> Tensor:
        return Ops.elementwise("mul", a, b)

    @staticmethod
    def square(a: Tensor) -> Tensor:
        return Ops.elementwise("square", a)

    @staticmethod
    def scale(a: Tensor, factor: float) -> Tensor:
        return Ops.elementwise("scale", a, factor)

    @staticmethod
    def conv2d(x: Tensor, kernels: Tensor, bias: Tensor) -> Tensor:
        """Valid, stride-1 cross-correlation: [B,C,H,W] * [K,C,kh,kw] + [K]."""
        if x.data.ndim != 4 or kernels.data.ndim != 4 or bias.data.ndim != 1:
            raise TensorError("conv2d", f"expected ranks 4/4/1, got {x.shape}, {kernels.shape}, {bias.shape}")
        _, channels, height, width = x.shape
        count, kchannels, kh, kw = kernels.shape
        if kchannels != channels or bias.shape[0] != count:
            raise TensorError("conv2d", f"channel mismatch {x.shape} * {kernels.shape} + {bias.shape}")
        if kh > height or kw > width:
            raise TensorError("conv2d", f"kernel {kh}x{kw} larger than input {height}x{width}")

        xv, kv = x.data, kernels.data
        out_h, out_w = height - kh + 1, width - kw + 1
        windows = sliding_window_view(xv, (kh, kw), axis=(2, 3))  # B,C,H',W',kh,kw
        out = np.tensordot(windows, kv, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
        out = out + bias.data[None, :, None, None]

        def backward(g: np.ndarray):
            dx = np.zeros_like(xv)
            for i in range(kh):
                for j in range(kw):
                    contrib = np.tensordot(g, kv[:, :, i, j], axes=([1], [0])).transpose(0, 3, 1, 2)
                    dx[:, :, i:i + out_h, j:j + out_w] += contrib
            dk = np.tensordot(g, windows, axes=([0, 2, 3], [0, 2, 3]))
            return dx, dk, g.sum(axis=(0, 2, 3))

        return Ops.emit(np.ascontiguousarray(out), (x, kernels, bias), backward)

    @staticmethod
    def reduce(kind: str, a: Tensor, axis: Optional[int] = None) -> Tensor:
        if kind not in ("sum", "mean"):
            raise TensorError("reduce", f"unknown kind '{kind}'")
        shape = a.shape
        if axis is not None:
            if not -len(shape) <= axis < len(shape):
                raise TensorError("reduce", f"axis {axis} invalid for shape {shape}")
            axis = axis % len(shape)
        count = a.data.size if axis is None else shape[axis]
        if kind == "mean" and count == 0:
            raise TensorError("reduce", "mean over an empty extent")

        out = np.sum(a.data, axis=axis)
        divisor = float(count) if kind == "mean" else 1.0
        out = np.asarray(out / divisor, dtype=np.float64)

        def backward(g: np.ndarray):
            spread = g if axis is None else np.expand_dims(g, axis)
            return (np.broadcast_to(spread / divisor, shape).copy(),)

        return Ops.emit(out, (a,), backward)

    @staticmethod
    def sum(a: Tensor, axis: Optional[int] = None) -> Tensor:
        return Ops.reduce("sum", a, axis)

    @staticmethod
    def mean(a: Tensor, axis: Optional[int] = None) -> Tensor:
        return Ops.reduce("mean", a, axis)

    @staticmethod
    def log_softmax(logits: Tensor) -> Tensor:
        Ops.__require_matrix("log_softmax", logits)
        shifted = logits.data - logits.data.max(axis=1, keepdims=True)
        out = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))

        def backward(g: np.ndarray):
            return (g - np.exp(out) * g.sum(axis=1, keepdims=True),)

        return Ops.emit(out, (logits,), backward)

    @staticmethod
    def softmax(logits: Tensor) -> Tensor:
        Ops.__require_matrix("softmax", logits)
        e = np.exp(logits.data - logits.data.max(axis=1, keepdims=True))
        out = e / e.sum(axis=1, keepdims=True)

        def backward(g: np.ndarray):
            return (out * (g - (g * out).sum(axis=1, keepdims=True)),)

        return Ops.emit(out, (logits,), backward)

    # --------------------------------------------------------- indexing/shape

    @staticmethod
    def gather(a: Tensor, columns: np.ndarray) -> Tensor:
        """Row-wise pick: ``out[b] = a[b, columns[b]]``."""
        Ops.__require_matrix("gather", a)
        columns = np.asarray(columns, dtype=np.int64)
        rows, width = a.shape
        if columns.shape != (rows,):
            raise TensorError("gather", f"need {rows} column indexes, got shape {columns.shape}")
        if columns.size and (columns.min() < 0 or columns.max() >= width):
            raise TensorError("gather", f"column index outside [0, {width})")
        picks = np.arange(rows)
        out = a.data[picks, columns]

        def backward(g: np.ndarray):
            grad = np.zeros((rows, width), dtype=np.float64)
            grad[picks, columns] = g
            return (grad,)

        return Ops.emit(out, (a,), backward)

    @staticmethod
    def take(a: Tensor, positions: np.ndarray) -> Tensor:
        """Select leading-axis entries (e.g. the selected rows of a batch)."""
        positions = np.asarray(positions, dtype=np.int64)
        shape = a.shape
        if positions.size and (positions.min() < 0 or positions.max() >= shape[0]):
            raise TensorError("take", f"position outside [0, {shape[0]})")
        out = a.data[positions]

        def backward(g: np.ndarray):
            grad = np.zeros(shape, dtype=np.float64)
            np.add.at(grad, positions, g)
            return (grad,)

        return Ops.emit(out, (a,), backward)

    @staticmethod
    def reshape(a: Tensor, shape: Tuple[int, ...]) -> Tensor:
        source = a.shape
        try:
            out = a.data.reshape(shape)
        except ValueError as exc:
            raise TensorError("reshape", f"cannot view {source} as {shape}") from exc

        def backward(g: np.ndarray):
            return (g.reshape(source),)

        return Ops.emit(out, (a,), backward)

    # -------------------------------------------------------------- helpers

    @staticmethod
    def __require_matrix(op: str, a: Tensor) -> None:
        if a.data.ndim != 2 or a.shape[1] == 0:
            raise TensorError(op, f"expected a non-empty [B,M] matrix, got {a.shape}")

    @staticmethod
    def __unary(kind: str, a: Tensor) -> Tensor:
        av = a.data
        if kind == "relu":
            out = np.maximum(av, 0.0)

            def backward(g: np.ndarray):
                return (g * (av > 0.0),)
        elif kind == "square":
            out = av * av

            def backward(g: np.ndarray):
                return (2.0 * av * g,)
        elif kind == "exp":
            out = np.exp(av)

            def backward(g: np.ndarray):
                return (g * out,)
        else:
            clamped = np.maximum(av, LOG_FLOOR)
            out = np.log(clamped)

            def backward(g: np.ndarray):
                return (np.where(av > LOG_FLOOR, g / clamped, 0.0),)

        return Ops.emit(out, (a,), backward)

    @staticmethod
    def __scalar(kind: str, a: Tensor, c: float) -> Tensor:
        av = a.data
        if kind == "add":
            out, rule = av + c, (lambda g: (g,))
        elif kind == "sub":
            out, rule = av - c, (lambda g: (g,))
        else:
            out, rule = av * c, (lambda g: (g * c,))
        return Ops.emit(out, (a,), rule)

    @staticmethod
    def __binary(kind: str, a: Tensor, b: Tensor) -> Tensor:
        if a.shape != b.shape:
            raise TensorError(kind, f"shape mismatch {a.shape} vs {b.shape}")
        av, bv = a.data, b.data
        if kind == "add":
            out, rule = av + bv, (lambda g: (g, g))
        elif kind == "sub":
            out, rule = av - bv, (lambda g: (g, -g))
        else:
            out, rule = av * bv, (lambda g: (g * bv, g * av))
        return Ops.emit(out, (a, b), rule)
