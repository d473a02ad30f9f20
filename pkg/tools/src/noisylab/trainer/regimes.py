from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np

from noisylab.autodiff.grad import Grad
from noisylab.autodiff.ops import Ops
from noisylab.autodiff.tape import Tape
from noisylab.autodiff.tensor import Tensor
from noisylab.data.batching import Batching
from noisylab.data.images import Batch, FlipView, NoisyDataset
from noisylab.losses import Losses, LossWeights, PerSampleLosses
from noisylab.metrics.history import EpochRecord
from noisylab.metrics.scoring import Scoring
from noisylab.nn.adam import Adam
from noisylab.nn.inference import Inference
from noisylab.nn.network import ModelParams, Network
from noisylab.selection import SelectedSet, Selection, SelectionSchedule
from noisylab.trainer.state import DualModelState, EpochOptions, ModelState

logger = logging.getLogger(__name__)

_DEFAULTS = EpochOptions()


@dataclass
class _Tally:
    """Per-epoch running sums behind one :class:`EpochRecord`."""

    cls: List[float] = field(default_factory=list)
    ag: List[float] = field(default_factory=list)
    ens: List[float] = field(default_factory=list)
    picked: List[np.ndarray] = field(default_factory=list)

    @staticmethod
    def mean(values: Sequence[float]) -> float:
        return float(np.mean(values)) if len(values) else 0.0

    def selected(self) -> np.ndarray:
        if not self.picked:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate(self.picked))

    def clean_rate(self, corruption_mask: np.ndarray) -> float:
        """Pooled over every per-batch pick (the corruption-weighted mean of the batch rates)."""
        picked = self.selected()
        return Scoring.selected_clean_rate(picked, corruption_mask) if picked.size else 0.0


class Regimes:
    """One epoch of each training regime.

    Every ``run_*_epoch`` is a pure function of its arguments: the batch order
    comes from ``(seed, t)``, the models from ``state``, and nothing is kept
    between calls. Epochs are numbered from 1; ``t`` also indexes the keep
    ratio ``R(t)``.
    """

    # ------------------------------------------------------------- single

    @staticmethod
    def run_baseline_epoch(state: ModelState, noisy: NoisyDataset, lr: float, t: int, seed: int,
                           options: EpochOptions = _DEFAULTS) -> Tuple[ModelState, EpochRecord]:
        """Plain cross-entropy on every (noisy) sample, one model."""
        state, loss = Regimes.__baseline_pass(state, noisy, lr, t, seed, options)
        acc = Regimes.__evaluate(state.params, None, options)
        record = EpochRecord(epoch=t, keep_ratio=1.0, lr=lr, loss_cls=loss, loss_ag=0.0, loss_ens=0.0,
                             acc_m1=acc[0], acc_m2=acc[1], acc_ens=acc[2],
                             clean_rate=Regimes.__whole_set_clean_rate(noisy))
        return state, record

    @staticmethod
    def run_independent_epoch(state: DualModelState, noisy: NoisyDataset, lr: float, t: int, seed: int,
                              options: EpochOptions = _DEFAULTS) -> Tuple[DualModelState, EpochRecord]:
        """Two baseline updates over the same batch order; the models never interact."""
        first, loss1 = Regimes.__baseline_pass(state.first, noisy, lr, t, seed, options)
        second, loss2 = Regimes.__baseline_pass(state.second, noisy, lr, t, seed, options)
        state = DualModelState.of(first, second)
        acc = Regimes.__evaluate(state.params1, state.params2, options)
        record = EpochRecord(epoch=t, keep_ratio=1.0, lr=lr, loss_cls=loss1 + loss2, loss_ag=0.0,
                             loss_ens=0.0, acc_m1=acc[0], acc_m2=acc[1], acc_ens=acc[2],
                             clean_rate=Regimes.__whole_set_clean_rate(noisy))
        return state, record

    # ---------------------------------------------------------------- mda

    @staticmethod
    def run_mda_epoch(state: DualModelState, noisy: NoisyDataset, flip: FlipView, schedule: SelectionSchedule,
                      weights: LossWeights, lr: float, t: int, seed: int,
                      options: EpochOptions = _DEFAULTS) -> Tuple[DualModelState, EpochRecord]:
        """Whole-set selection on the flip view, then joint updates on the original images.

        The classification term averages each model's cross-entropy over the
        batch samples in the selected set (0 when none is); the ensemble term
        covers the whole batch and reaches both models.
        """
        keep = Selection.keep_ratio(schedule, t)
        source = flip if options.select_on == "flip" else noisy
        losses, agreement = Regimes.__selection_losses(state, source, noisy.labels, weights, options)
        selected = Selection.select_small_loss(losses, keep, epoch=t)
        Regimes.__dump(selected, options)
        logger.debug("epoch %d: kept %d of %d (R=%.4f)", t, len(selected), len(noisy), keep)

        first, second = state.first, state.second
        tally = _Tally()
        for batch in Batching.batches(noisy, options.batch_size, t, seed):
            positions = np.flatnonzero(Selection.batch_selected(selected, batch))
            with Tape():
                leaves1, leaves2 = first.params.leaves(), second.params.leaves()
                images = batch.tensor()
                logits1 = Network.forward(first.params, images, leaves1)
                logits2 = Network.forward(second.params, images, leaves2)
                ce1 = Losses.cross_entropy_per_sample(logits1, batch.labels)
                ce2 = Losses.cross_entropy_per_sample(logits2, batch.labels)
                cls = Regimes.__peer_cls(ce1, ce2, positions, positions)
                ens = Losses.mean_point_ensemble(Ops.softmax(logits1), Ops.softmax(logits2))
                grads = Grad.backward(Losses.training_loss(cls, ens, weights))
            first = Regimes.__step(first, leaves1, grads, lr)
            second = Regimes.__step(second, leaves2, grads, lr)
            tally.cls.append(cls.item())
            tally.ens.append(ens.item())

        state = DualModelState.of(first, second)
        clean = Scoring.selected_clean_rate(selected, noisy.corruption_mask) if len(selected) else 0.0
        return state, Regimes.__record(t, keep, lr, tally, agreement, state, options, clean)

    # --------------------------------------------------------- co-teaching

    @staticmethod
    def run_coteaching_epoch(state: DualModelState, noisy: NoisyDataset, schedule: SelectionSchedule, lr: float,
                             t: int, seed: int,
                             options: EpochOptions = _DEFAULTS) -> Tuple[DualModelState, EpochRecord]:
        """Per batch, each model keeps its ``floor(R(t) * b)`` smallest CE losses and the peer learns from them."""
        return Regimes.__cross_epoch(state, noisy, schedule, None, lr, t, seed, options, rank_on_flip=False)

    @staticmethod
    def run_coteaching_mda_epoch(state: DualModelState, noisy: NoisyDataset, flip: FlipView,
                                 schedule: SelectionSchedule, weights: LossWeights, lr: float, t: int, seed: int,
                                 options: EpochOptions = _DEFAULTS) -> Tuple[DualModelState, EpochRecord]:
        """Co-teaching ranked on the batch's flipped images, plus ``gamma`` times the ensemble term.

        ``flip`` is the view the flipped batch pixels come from; with
        ``select_on="original"`` the ranking uses the training images instead.
        """
        return Regimes.__cross_epoch(state, noisy, schedule, weights, lr, t, seed, options,
                                     rank_on_flip=options.select_on == "flip", flip=flip)

    @staticmethod
    def __cross_epoch(state: DualModelState, noisy: NoisyDataset, schedule: SelectionSchedule,
                      weights: Optional[LossWeights], lr: float, t: int, seed: int, options: EpochOptions,
                      rank_on_flip: bool, flip: Optional[FlipView] = None) -> Tuple[DualModelState, EpochRecord]:
        keep = Selection.keep_ratio(schedule, t)
        first, second = state.first, state.second
        tally = _Tally()
        for batch in Batching.batches(noisy, options.batch_size, t, seed):
            with Tape():
                leaves1, leaves2 = first.params.leaves(), second.params.leaves()
                images = batch.tensor()
                logits1 = Network.forward(first.params, images, leaves1)
                logits2 = Network.forward(second.params, images, leaves2)
                ce1 = Losses.cross_entropy_per_sample(logits1, batch.labels)
                ce2 = Losses.cross_entropy_per_sample(logits2, batch.labels)
                if rank_on_flip:
                    rank1, rank2 = Regimes.__flipped_ce(first.params, second.params, flip, batch)
                else:
                    rank1, rank2 = ce1.data, ce2.data
                own1 = Selection.select_small_loss(PerSampleLosses(rank1.copy()), keep).indexes
                own2 = Selection.select_small_loss(PerSampleLosses(rank2.copy()), keep).indexes
                # Each model learns from what its peer kept.
                loss = cls = Regimes.__peer_cls(ce1, ce2, own2, own1)
                if weights is not None:
                    ens = Losses.mean_point_ensemble(Ops.softmax(logits1), Ops.softmax(logits2))
                    loss = Losses.training_loss(cls, ens, weights)
                    tally.ens.append(ens.item())
                grads = Grad.backward(loss)
            first = Regimes.__step(first, leaves1, grads, lr)
            second = Regimes.__step(second, leaves2, grads, lr)
            tally.cls.append(cls.item())
            tally.picked.append(batch.indexes[own1])

        state = DualModelState.of(first, second)
        Regimes.__dump(SelectedSet(epoch=t, keep_ratio=keep, indexes=tally.selected()), options)
        return state, Regimes.__record(t, keep, lr, tally, 0.0, state, options,
                                       tally.clean_rate(noisy.corruption_mask))

    # --------------------------------------------------------------- jocor

    @staticmethod
    def run_jocor_epoch(state: DualModelState, noisy: NoisyDataset, schedule: SelectionSchedule,
                        weights: LossWeights, lr: float, t: int, seed: int,
                        options: EpochOptions = _DEFAULTS) -> Tuple[DualModelState, EpochRecord]:
        """Per batch, rank by ``(1 - lam)(CE1 + CE2) + lam * symKL`` on the original images and train
        both models on the mean joint loss of the kept samples."""
        keep = Selection.keep_ratio(schedule, t)
        first, second = state.first, state.second
        tally = _Tally()
        for number, batch in enumerate(Batching.batches(noisy, options.batch_size, t, seed)):
            batch = Regimes.__augment(batch, options, seed, t, number)
            with Tape():
                leaves1, leaves2 = first.params.leaves(), second.params.leaves()
                images = batch.tensor()
                logits1 = Network.forward(first.params, images, leaves1)
                logits2 = Network.forward(second.params, images, leaves2)
                joint = Losses.joint_loss_per_sample(logits1, logits2, batch.labels, weights.lam)
                kept = Selection.select_small_loss(PerSampleLosses(joint.data.copy()), keep).indexes
                grads = Grad.backward(Regimes.__selected_mean(joint, kept))
            first = Regimes.__step(first, leaves1, grads, lr)
            second = Regimes.__step(second, leaves2, grads, lr)

            with Tape.suspended():
                detached1, detached2 = logits1.detach(), logits2.detach()
                cls, _ = Losses.classification_loss(detached1, detached2, batch.labels)
                ag = Losses.symmetric_kl_per_sample(Ops.softmax(detached1), Ops.softmax(detached2))
            if kept.size:
                tally.cls.append(float(np.mean(cls.data[kept])))
                tally.ag.append(float(np.mean(ag.data[kept])))
            tally.picked.append(batch.indexes[kept])

        state = DualModelState.of(first, second)
        Regimes.__dump(SelectedSet(epoch=t, keep_ratio=keep, indexes=tally.selected()), options)
        return state, Regimes.__record(t, keep, lr, tally, _Tally.mean(tally.ag), state, options,
                                       tally.clean_rate(noisy.corruption_mask))

    # ------------------------------------------------------------- helpers

    @staticmethod
    def __baseline_pass(state: ModelState, noisy: NoisyDataset, lr: float, t: int, seed: int,
                        options: EpochOptions) -> Tuple[ModelState, float]:
        losses: List[float] = []
        for number, batch in enumerate(Batching.batches(noisy, options.batch_size, t, seed)):
            batch = Regimes.__augment(batch, options, seed, t, number)
            with Tape():
                leaves = state.params.leaves()
                logits = Network.forward(state.params, batch.tensor(), leaves)
                per_sample = Losses.cross_entropy_per_sample(logits, batch.labels)
                loss = Regimes.__selected_mean(per_sample, np.arange(len(batch)))
                grads = Grad.backward(loss)
            state = Regimes.__step(state, leaves, grads, lr)
            losses.append(loss.item())
        return state, _Tally.mean(losses)

    @staticmethod
    def __selection_losses(state: DualModelState, source, labels: np.ndarray, weights: LossWeights,
                           options: EpochOptions) -> Tuple[PerSampleLosses, float]:
        logits1 = Tensor(Inference.logits(state.params1, source.images, options.chunk, options.workers))
        logits2 = Tensor(Inference.logits(state.params2, source.images, options.chunk, options.workers))
        losses = Losses.selection_loss(logits1, logits2, labels, weights)
        with Tape.suspended():
            agreement = Losses.symmetric_kl_per_sample(Ops.softmax(logits1), Ops.softmax(logits2))
        return losses, _Tally.mean(agreement.data)

    @staticmethod
    def __flipped_ce(params1: ModelParams, params2: ModelParams, flip: Optional[FlipView],
                     batch: Batch) -> Tuple[np.ndarray, np.ndarray]:
        pixels = flip.images[batch.indexes] if flip is not None else Batching.hflip(batch.images)
        with Tape.suspended():
            flipped = Tensor(pixels)
            rank1 = Losses.cross_entropy_per_sample(Network.forward(params1, flipped), batch.labels)
            rank2 = Losses.cross_entropy_per_sample(Network.forward(params2, flipped), batch.labels)
        return rank1.data, rank2.data

    @staticmethod
    def __peer_cls(ce1: Tensor, ce2: Tensor, positions1: np.ndarray, positions2: np.ndarray) -> Tensor:
        """Model 1's mean CE over ``positions1`` plus model 2's over ``positions2``."""
        return Ops.add(Regimes.__selected_mean(ce1, positions1), Regimes.__selected_mean(ce2, positions2))

    @staticmethod
    def __selected_mean(per_sample: Tensor, positions: np.ndarray) -> Tensor:
        if positions.size == 0:
            return Tensor.constant(0.0)
        return Ops.mean(Ops.take(per_sample, positions))

    @staticmethod
    def __step(state: ModelState, leaves: Sequence[Tensor], grads, lr: float) -> ModelState:
        params, adam = Adam.step(state.params, [grads[leaf.node].data for leaf in leaves], state.adam, lr)
        return ModelState(params=params, adam=adam)

    @staticmethod
    def __augment(batch: Batch, options: EpochOptions, seed: int, t: int, number: int) -> Batch:
        """Flip each sample with probability 1/2, drawn from ``(seed, t, batch number)``."""
        if not options.flip_augment:
            return batch
        coin = np.random.default_rng([seed, t, number]).random(len(batch)) < 0.5
        coin = coin.reshape((-1,) + (1,) * (batch.images.ndim - 1))
        images = np.where(coin, Batching.hflip(batch.images), batch.images)
        return Batch(indexes=batch.indexes, images=images, labels=batch.labels)

    @staticmethod
    def __evaluate(params1: ModelParams, params2: Optional[ModelParams],
                   options: EpochOptions) -> Tuple[float, float, float]:
        test = options.test
        if test is None or len(test) == 0:
            return 0.0, 0.0, 0.0
        acc1 = Scoring.accuracy(params1, test, options.chunk, options.workers)
        if params2 is None:
            return acc1, acc1, acc1
        acc2 = Scoring.accuracy(params2, test, options.chunk, options.workers)
        return acc1, acc2, Scoring.ensemble_accuracy(params1, params2, test, options.chunk, options.workers)

    @staticmethod
    def __record(t: int, keep: float, lr: float, tally: _Tally, agreement: float, state: DualModelState,
                 options: EpochOptions, clean_rate: float) -> EpochRecord:
        acc = Regimes.__evaluate(state.params1, state.params2, options)
        return EpochRecord(epoch=t, keep_ratio=keep, lr=lr, loss_cls=_Tally.mean(tally.cls), loss_ag=agreement,
                           loss_ens=_Tally.mean(tally.ens), acc_m1=acc[0], acc_m2=acc[1], acc_ens=acc[2],
                           clean_rate=clean_rate)

    @staticmethod
    def __whole_set_clean_rate(noisy: NoisyDataset) -> float:
        if len(noisy) == 0:
            return 0.0
        return float(np.count_nonzero(~noisy.corruption_mask) / len(noisy))

    @staticmethod
    def __dump(selected: SelectedSet, options: EpochOptions) -> None:
        if options.dump_dir is not None:
            selected.dump(options.dump_dir / f"selected_{selected.epoch:04d}.txt")
