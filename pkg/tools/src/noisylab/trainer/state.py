from __future__ import annotations
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

from noisylab.data.images import LabeledImageSet
from noisylab.errors.tensor_error import TensorError
from noisylab.nn.adam import AdamState
from noisylab.nn.architecture import Architecture
from noisylab.nn.network import ModelParams, Network


@dataclass(frozen=True)
class ModelState:
    params: ModelParams
    adam: AdamState

    @staticmethod
    def fresh(arch: Architecture, seed: int, weight_decay: float = 1e-4) -> "ModelState":
        params = Network.init_model(arch, seed)
        return ModelState(params=params, adam=AdamState.fresh(params, weight_decay=weight_decay))


@dataclass(frozen=True)
class DualModelState:
    """Both networks of a two-model regime, each with its own Adam moments."""

    params1: ModelParams
    params2: ModelParams
    adam1: AdamState
    adam2: AdamState

    def __post_init__(self) -> None:
        if self.params1.arch != self.params2.arch:
            raise TensorError("dual model", "both models need the same architecture")

    @staticmethod
    def fresh(arch: Architecture, seeds: Tuple[int, int], weight_decay: float = 1e-4) -> "DualModelState":
        if seeds[0] == seeds[1]:
            raise TensorError("dual model", f"init seeds must differ, got {seeds}")
        first, second = (ModelState.fresh(arch, seed, weight_decay) for seed in seeds)
        return DualModelState.of(first, second)

    @staticmethod
    def of(first: ModelState, second: ModelState) -> "DualModelState":
        return DualModelState(params1=first.params, params2=second.params, adam1=first.adam, adam2=second.adam)

    @property
    def first(self) -> ModelState:
        return ModelState(self.params1, self.adam1)

    @property
    def second(self) -> ModelState:
        return ModelState(self.params2, self.adam2)


@dataclass(frozen=True)
class EpochOptions:
    """Per-run knobs every regime shares besides the schedule and loss weights.

    ``test`` is scored after each epoch (accuracies are 0 without it).
    ``dump_dir`` receives one selected-index file per epoch when set.
    """

    batch_size: int = 128
    test: Optional[LabeledImageSet] = None
    chunk: int = 1000
    workers: int = 1
    select_on: str = "flip"
    flip_augment: bool = False
    dump_dir: Optional[Path] = None
