from dataclasses import dataclass
from typing import Tuple

import numpy as np

from noisylab.autodiff.ops import Ops
from noisylab.autodiff.tape import Tape
from noisylab.autodiff.tensor import Tensor
from noisylab.errors.out_of_range_error import OutOfRangeError
from noisylab.errors.tensor_error import TensorError

# Row sums of probability inputs must be within this of 1.
_NORMALIZATION_TOLERANCE = 1e-8


@dataclass(frozen=True)
class LossWeights:
    """``lam`` weighs agreement in the selection loss, ``gamma`` the ensemble term in training."""

    lam: float = 0.65
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise OutOfRangeError("lambda", self.lam, "must be >= 0")
        if self.gamma < 0:
            raise OutOfRangeError("gamma", self.gamma, "must be >= 0")


@dataclass(frozen=True)
class PerSampleLosses:
    """One selection loss per dataset index, aligned with the dataset order."""

    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.ndim != 1:
            raise TensorError("per-sample losses", f"expected a vector, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise TensorError("per-sample losses", "entries must be finite")

    def __len__(self) -> int:
        return int(self.values.shape[0])


class Losses:
    """Classification, agreement, selection, ensemble and training losses.

    Per-sample forms return ``[B]`` tensors; aggregated forms are batch means
    so that ``lam`` and ``gamma`` do not depend on the batch size. All of them
    are taped when a tape is active.
    """

    @staticmethod
    def cross_entropy_per_sample(logits: Tensor, labels: np.ndarray) -> Tensor:
        labels = Losses.__check_labels(logits, labels)
        return Ops.scale(Ops.gather(Ops.log_softmax(logits), labels), -1.0)

    @staticmethod
    def classification_loss(logits1: Tensor, logits2: Tensor, labels: np.ndarray) -> Tuple[Tensor, Tensor]:
        """``(CE1_i + CE2_i, mean CE1 + mean CE2)``."""
        if logits1.shape != logits2.shape:
            raise TensorError("classification_loss", f"logit shapes differ: {logits1.shape} vs {logits2.shape}")
        ce1 = Losses.cross_entropy_per_sample(logits1, labels)
        ce2 = Losses.cross_entropy_per_sample(logits2, labels)
        return Ops.add(ce1, ce2), Ops.add(Ops.mean(ce1), Ops.mean(ce2))

    @staticmethod
    def symmetric_kl_per_sample(p1: Tensor, p2: Tensor) -> Tensor:
        """``KL(p1||p2) + KL(p2||p1)`` per row, written as ``sum (p1-p2)(ln p1 - ln p2)``.

        The ``log`` op clamps entries at ``noisylab.autodiff.ops.LOG_FLOOR``; every term
        of the sum is a product of two same-signed factors, so the result is
        non-negative and exactly 0 for identical rows.
        """
        Losses.__check_probabilities("symmetric_kl", p1, p2)
        gap = Ops.sub(Ops.elementwise("log", p1), Ops.elementwise("log", p2))
        return Ops.sum(Ops.mul(Ops.sub(p1, p2), gap), axis=1)

    @staticmethod
    def selection_loss(logits1: Tensor, logits2: Tensor, labels: np.ndarray, weights: LossWeights) -> PerSampleLosses:
        """``(CE1_i + CE2_i) + lam * symKL_i``, always evaluated in inference mode."""
        with Tape.suspended():
            logits1, logits2 = logits1.detach(), logits2.detach()
            classification, _ = Losses.classification_loss(logits1, logits2, labels)
            agreement = Losses.symmetric_kl_per_sample(Ops.softmax(logits1), Ops.softmax(logits2))
            total = Ops.add(classification, Ops.scale(agreement, weights.lam))
        return PerSampleLosses(values=total.data.copy())

    @staticmethod
    def joint_loss_per_sample(logits1: Tensor, logits2: Tensor, labels: np.ndarray, lam: float) -> Tensor:
        """Co-regularized per-sample loss ``(1 - lam)(CE1 + CE2) + lam * symKL``.

        Gradients reach both models through both KL arguments.
        """
        classification, _ = Losses.classification_loss(logits1, logits2, labels)
        agreement = Losses.symmetric_kl_per_sample(Ops.softmax(logits1), Ops.softmax(logits2))
        return Ops.add(Ops.scale(classification, 1.0 - lam), Ops.scale(agreement, lam))

    @staticmethod
    def mean_point_ensemble(p1: Tensor, p2: Tensor) -> Tensor:
        """``mean_i ||p1_i - f_i||^2 + ||p2_i - f_i||^2`` with ``f = (p1 + p2) / 2``.

        Algebraically half the mean squared distance between the two rows.
        """
        if p1.shape != p2.shape or p1.data.ndim != 2:
            raise TensorError("mean_point_ensemble", f"need matching [B,M] inputs, got {p1.shape} vs {p2.shape}")
        center = Ops.scale(Ops.add(p1, p2), 0.5)
        spread = Ops.add(Ops.square(Ops.sub(p1, center)), Ops.square(Ops.sub(p2, center)))
        return Ops.mean(Ops.sum(spread, axis=1))

    @staticmethod
    def training_loss(cls_mean_selected: Tensor, ens_all: Tensor, weights: LossWeights) -> Tensor:
        return Ops.add(cls_mean_selected, Ops.scale(ens_all, weights.gamma))

    # -------------------------------------------------------------- checks

    @staticmethod
    def __check_labels(logits: Tensor, labels: np.ndarray) -> np.ndarray:
        labels = np.asarray(labels, dtype=np.int64)
        if logits.data.ndim != 2:
            raise TensorError("cross_entropy", f"expected [B,M] logits, got {logits.shape}")
        batch, classes = logits.shape
        if labels.shape != (batch,):
            raise TensorError("cross_entropy", f"{labels.shape[0] if labels.ndim else 0} labels for {batch} rows")
        if labels.size and (labels.min() < 0 or labels.max() >= classes):
            bad = labels[(labels < 0) | (labels >= classes)][0]
            raise OutOfRangeError("label", int(bad), f"must lie in [0, {classes})")
        return labels

    @staticmethod
    def __check_probabilities(op: str, p1: Tensor, p2: Tensor) -> None:
        if p1.shape != p2.shape or p1.data.ndim != 2:
            raise TensorError(op, f"need matching [B,M] inputs, got {p1.shape} vs {p2.shape}")
        for p in (p1, p2):
            if p.data.size and np.max(np.abs(p.data.sum(axis=1) - 1.0)) > _NORMALIZATION_TOLERANCE:
                raise TensorError(op, "probability rows must sum to 1")
