from __future__ import annotations
from dataclasses import dataclass, replace
from typing import Sequence, Tuple

import numpy as np

from noisylab.errors.out_of_range_error import OutOfRangeError
from noisylab.errors.tensor_error import TensorError
from noisylab.nn.network import ModelParams


@dataclass(frozen=True)
class AdamState:
    m: Tuple[np.ndarray, ...]
    v: Tuple[np.ndarray, ...]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 1e-4

    @staticmethod
    def fresh(params: ModelParams, weight_decay: float = 1e-4, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        zeros = tuple(np.zeros_like(a) for a in params.arrays)
        return AdamState(m=zeros, v=tuple(np.zeros_like(a) for a in params.arrays), step=0,
                         beta1=beta1, beta2=beta2, eps=eps, weight_decay=weight_decay)


class Adam:
    """Adam with bias correction and coupled L2 (``g += wd * param`` before the moments)."""

    @staticmethod
    def step(params: ModelParams, grads: Sequence[np.ndarray], state: AdamState,
             lr: float) -> Tuple[ModelParams, AdamState]:
        if lr < 0:
            raise OutOfRangeError("lr", lr, "learning rate must be >= 0")
        if len(grads) != len(params.arrays):
            raise TensorError("adam", f"{len(grads)} gradients for {len(params.arrays)} parameters")

        t = state.step + 1
        correct1 = 1.0 - state.beta1 ** t
        correct2 = 1.0 - state.beta2 ** t
        arrays, ms, vs = [], [], []
        for param, grad, m, v in zip(params.arrays, grads, state.m, state.v):
            if grad.shape != param.shape:
                raise TensorError("adam", f"gradient {grad.shape} for parameter {param.shape}")
            g = grad + state.weight_decay * param if state.weight_decay else grad
            m = state.beta1 * m + (1.0 - state.beta1) * g
            v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
            update = (m / correct1) / (np.sqrt(v / correct2) + state.eps)
            arrays.append(param - lr * update)
            ms.append(m)
            vs.append(v)
        return params.with_arrays(arrays), replace(state, m=tuple(ms), v=tuple(vs), step=t)
