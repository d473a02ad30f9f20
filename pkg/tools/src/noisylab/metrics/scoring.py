from typing import Union

import numpy as np

from noisylab.errors.empty_input_error import EmptyInputError
from noisylab.nn.inference import Inference
from noisylab.nn.network import ModelParams
from noisylab.selection import SelectedSet


class Scoring:
    """Accuracy and clean-rate measurements, all in [0, 1]."""

    @staticmethod
    def accuracy(params: ModelParams, dataset, chunk: int = 1000, workers: int = 1) -> float:
        """Argmax match rate; ``np.argmax`` breaks ties toward the smallest class index."""
        if len(dataset) == 0:
            raise EmptyInputError("dataset")
        logits = Inference.logits(params, dataset.images, chunk, workers)
        return Scoring.match_rate(logits, dataset.labels)

    @staticmethod
    def ensemble_accuracy(params1: ModelParams, params2: ModelParams, dataset,
                          chunk: int = 1000, workers: int = 1) -> float:
        """Accuracy of the mean of both models' predicted distributions."""
        if len(dataset) == 0:
            raise EmptyInputError("dataset")
        mean = 0.5 * (Inference.probabilities(params1, dataset.images, chunk, workers)
                      + Inference.probabilities(params2, dataset.images, chunk, workers))
        return Scoring.match_rate(mean, dataset.labels)

    @staticmethod
    def match_rate(scores: np.ndarray, labels: np.ndarray) -> float:
        if labels.shape[0] == 0:
            raise EmptyInputError("dataset")
        return float(np.mean(np.argmax(scores, axis=1) == labels))

    @staticmethod
    def selected_clean_rate(selected: Union[SelectedSet, np.ndarray], corruption_mask: np.ndarray) -> float:
        indexes = selected.indexes if isinstance(selected, SelectedSet) else np.asarray(selected, dtype=np.int64)
        if indexes.size == 0:
            raise EmptyInputError("selection")
        return float(np.count_nonzero(~corruption_mask[indexes]) / indexes.size)
