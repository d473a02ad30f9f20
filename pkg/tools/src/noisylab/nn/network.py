from __future__ import annotations
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from noisylab.autodiff.ops import Ops
from noisylab.autodiff.tensor import Tensor
from noisylab.errors.tensor_error import TensorError
from noisylab.nn.architecture import Architecture, LayerShape


@dataclass(frozen=True)
class ModelParams:
    """One network's parameters: ``arrays`` holds weight, bias, weight, bias, ...

    in the order of :meth:`Architecture.layer_shapes`.
    """

    arch: Architecture
    arrays: Tuple[np.ndarray, ...]
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        shapes = self.arch.layer_shapes()
        if len(self.arrays) != 2 * len(shapes):
            raise TensorError("model", f"expected {2 * len(shapes)} arrays, got {len(self.arrays)}")
        for layer, weight, bias in zip(shapes, self.arrays[0::2], self.arrays[1::2]):
            if weight.shape != layer.weight or bias.shape != layer.bias:
                raise TensorError("model", f"layer {layer.kind} expects {layer.weight}/{layer.bias}, "
                                           f"got {weight.shape}/{bias.shape}")

    @property
    def layers(self) -> List[Tuple[LayerShape, np.ndarray, np.ndarray]]:
        return list(zip(self.arch.layer_shapes(), self.arrays[0::2], self.arrays[1::2]))

    def leaves(self) -> List[Tensor]:
        """Parameter tensors for one forward pass (gradient leaves when taped)."""
        return [Tensor.parameter(array) for array in self.arrays]

    def with_arrays(self, arrays: Sequence[np.ndarray]) -> "ModelParams":
        return ModelParams(arch=self.arch, arrays=tuple(arrays), seed=self.seed)

    def equals(self, other: "ModelParams") -> bool:
        return (self.arch == other.arch and len(self.arrays) == len(other.arrays)
                and all(np.array_equal(a, b) for a, b in zip(self.arrays, other.arrays)))


class Network:
    @staticmethod
    def init_model(arch: Architecture, seed: int) -> ModelParams:
        """He-normal weights (std = sqrt(2 / fan_in)), zero biases."""
        rng = np.random.default_rng(seed)
        arrays: List[np.ndarray] = []
        for layer in arch.layer_shapes():
            arrays.append(rng.standard_normal(layer.weight) * np.sqrt(2.0 / layer.fan_in))
            arrays.append(np.zeros(layer.bias, dtype=np.float64))
        return ModelParams(arch=arch, arrays=tuple(arrays), seed=seed)

    @staticmethod
    def forward(params: ModelParams, batch: Tensor, leaves: Optional[Sequence[Tensor]] = None) -> Tensor:
        """Logits for ``batch`` ([B, *input_shape]); taped iff a tape is active.

        Pass ``leaves`` (from :meth:`ModelParams.leaves`) to read gradients
        back by node id after the backward pass.
        """
        arch = params.arch
        if tuple(batch.shape[1:]) != tuple(arch.input_shape):
            raise TensorError("forward", f"batch {batch.shape} does not match input {arch.input_shape}")
        if leaves is None:
            leaves = params.leaves()

        x = batch
        shapes = arch.layer_shapes()
        last = len(shapes) - 1
        flat = False
        for i, layer in enumerate(shapes):
            weight, bias = leaves[2 * i], leaves[2 * i + 1]
            if layer.kind == "conv":
                x = Ops.relu(Ops.conv2d(x, weight, bias))
                continue
            if not flat:
                x = Ops.reshape(x, (batch.shape[0], layer.weight[0]))
                flat = True
            x = Ops.affine(x, weight, bias)
            if i != last:
                x = Ops.relu(x)
        return x
