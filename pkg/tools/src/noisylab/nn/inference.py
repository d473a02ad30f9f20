from concurrent.futures import ThreadPoolExecutor
from typing import List

import numpy as np

from noisylab.autodiff.ops import Ops
from noisylab.autodiff.tape import Tape
from noisylab.autodiff.tensor import Tensor
from noisylab.nn.network import ModelParams, Network


class Inference:
    """Untaped forward passes over whole image stacks.

    Images are cut into fixed ``chunk``-sized slices, so each sample's logits
    come from the same arithmetic no matter how many workers share the slices.
    """

    @staticmethod
    def logits(params: ModelParams, images: np.ndarray, chunk: int = 1000, workers: int = 1) -> np.ndarray:
        starts = list(range(0, images.shape[0], max(1, chunk)))
        if not starts:
            return np.zeros((0, params.arch.classes), dtype=np.float64)

        def run(start: int) -> np.ndarray:
            # The active tape is thread-local, so every worker suspends its own.
            with Tape.suspended():
                return Network.forward(params, Tensor(images[start:start + chunk])).data

        if workers <= 1 or len(starts) == 1:
            parts: List[np.ndarray] = [run(start) for start in starts]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(run, starts))
        return np.concatenate(parts, axis=0)

    @staticmethod
    def probabilities(params: ModelParams, images: np.ndarray, chunk: int = 1000, workers: int = 1) -> np.ndarray:
        with Tape.suspended():
            return Ops.softmax(Tensor(Inference.logits(params, images, chunk, workers))).data
