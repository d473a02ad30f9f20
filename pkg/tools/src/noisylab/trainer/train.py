from __future__ import annotations
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union
import logging
import time

import numpy as np
from tqdm import tqdm

from noisylab.config.experiment_config import ExperimentConfig
from noisylab.config.method_kind import MethodKind
from noisylab.data.batching import Batching
from noisylab.data.idx import Idx
from noisylab.data.images import FlipView, LabeledImageSet, NoisyDataset
from noisylab.data.noise import Noise
from noisylab.data.shapes import ShapeGenerator
from noisylab.losses import LossWeights
from noisylab.metrics.history import EpochRecord, History, MetricsHistory
from noisylab.nn.architecture import Architecture
from noisylab.nn.checkpoint import Checkpoint
from noisylab.nn.schedule import LrSchedule
from noisylab.selection import SelectionSchedule
from noisylab.trainer.regimes import Regimes
from noisylab.trainer.state import DualModelState, EpochOptions, ModelState

logger = logging.getLogger(__name__)

HISTORY_FILE = "history.csv"
CONFIG_FILE = "config.txt"

State = Union[ModelState, DualModelState]


@dataclass(frozen=True)
class Experiment:
    """Everything a run derives from its config before the first epoch."""

    noisy: NoisyDataset
    flip: FlipView
    test: LabeledImageSet
    arch: Architecture
    schedule: SelectionSchedule
    lr_schedule: LrSchedule
    weights: LossWeights


class Trainer:
    """Drives ``T_max`` epochs of the configured regime.

    Datasets come from ``data_seed`` (synthetic train and test sets from two
    seeds derived from it, or an IDX split), the corruption from a third
    derived seed; the two models from ``model_seeds``; batch order from
    ``shuffle_seed`` and the epoch number.
    """

    @staticmethod
    def prepare(config: ExperimentConfig) -> Experiment:
        train, test = Trainer.load_data(config)
        _, _, noise_seed = Trainer.__data_seeds(config)
        noisy = Noise.inject_symmetric(train, config.noise_rate, noise_seed)
        return Experiment(
            noisy=noisy,
            flip=FlipView(noisy),
            test=test,
            arch=config.architecture(train.sample_shape, train.classes),
            schedule=SelectionSchedule(config.noise_rate, config.tk, config.epochs),
            lr_schedule=LrSchedule(config.lr, config.epochs, config.decay_start, config.lr_schedule,
                                   tuple(config.lr_steps)),
            weights=LossWeights(lam=config.lam, gamma=config.gamma),
        )

    @staticmethod
    def load_data(config: ExperimentConfig) -> Tuple[LabeledImageSet, LabeledImageSet]:
        train_seed, test_seed, _ = Trainer.__data_seeds(config)
        if config.dataset == "idx":
            full = Idx.load(config.idx_images, config.idx_labels)
            return Batching.split(full, (1.0 - config.test_fraction, config.test_fraction), train_seed)
        train = ShapeGenerator.gen_symmetric_shapes(config.n_train, config.classes, config.side, train_seed)
        test = ShapeGenerator.gen_symmetric_shapes(config.n_test, config.classes, config.side, test_seed)
        return train, test

    @staticmethod
    def initial_state(config: ExperimentConfig, arch: Architecture) -> State:
        if config.method.uses_two_models:
            return DualModelState.fresh(arch, tuple(config.model_seeds), config.weight_decay)
        return ModelState.fresh(arch, config.model_seeds[0], config.weight_decay)

    @staticmethod
    def train(config: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None) -> MetricsHistory:
        return Trainer.fit(config, out_dir)[1]

    @staticmethod
    def fit(config: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None) -> Tuple[State, MetricsHistory]:
        """Train and return the final models with their history.

        With ``out_dir``, periodic checkpoints and (under ``debug_selection``)
        per-epoch selected-index files are written there.
        """
        config.validate()
        experiment = Trainer.prepare(config)
        out = Path(out_dir) if out_dir is not None else None
        options = EpochOptions(
            batch_size=config.batch_size,
            test=experiment.test,
            chunk=config.eval_batch_size,
            workers=config.workers,
            select_on=config.select_on,
            flip_augment=config.flip_augment,
            dump_dir=out / "selected" if out is not None and config.debug_selection else None,
        )
        state = Trainer.initial_state(config, experiment.arch)
        history = MetricsHistory(fingerprint=config.fingerprint(), method=config.method.value)
        logger.info("%s: %d training samples (%d corrupted), %d test samples, %s",
                    config.method.value, len(experiment.noisy), int(experiment.noisy.corruption_mask.sum()),
                    len(experiment.test), experiment.arch.describe())

        epochs = tqdm(range(1, config.epochs + 1), desc=config.method.value, unit="epoch",
                      disable=not config.progress)
        for t in epochs:
            lr = experiment.lr_schedule.lr_at(t - 1)
            started = time.perf_counter()
            state, record = Trainer.run_epoch(config.method, state, experiment, options, lr, t,
                                              config.shuffle_seed)
            history.append(record, time.perf_counter() - started)
            logger.info("%s epoch %d/%d: R=%.4f lr=%.6f cls=%.4f ag=%.4f ens=%.4f acc=%.4f/%.4f/%.4f clean=%.4f",
                        config.method.value, t, config.epochs, record.keep_ratio, record.lr, record.loss_cls,
                        record.loss_ag, record.loss_ens, record.acc_m1, record.acc_m2, record.acc_ens,
                        record.clean_rate)
            if out is not None and config.checkpoint_every and t % config.checkpoint_every == 0:
                Trainer.__checkpoint(state, out, t)
        return state, history

    @staticmethod
    def run_epoch(method: MethodKind, state: State, experiment: Experiment, options: EpochOptions, lr: float,
                  t: int, seed: int) -> Tuple[State, EpochRecord]:
        noisy, flip, schedule, weights = experiment.noisy, experiment.flip, experiment.schedule, experiment.weights
        if method is MethodKind.BASELINE:
            return Regimes.run_baseline_epoch(state, noisy, lr, t, seed, options)
        if method is MethodKind.MDA:
            return Regimes.run_mda_epoch(state, noisy, flip, schedule, weights, lr, t, seed, options)
        if method is MethodKind.COTEACHING:
            return Regimes.run_coteaching_epoch(state, noisy, schedule, lr, t, seed, options)
        if method is MethodKind.JOCOR:
            return Regimes.run_jocor_epoch(state, noisy, schedule, weights, lr, t, seed, options)
        return Regimes.run_coteaching_mda_epoch(state, noisy, flip, schedule, weights, lr, t, seed, options)

    @staticmethod
    def run(config: ExperimentConfig) -> MetricsHistory:
        """Train into ``config.out``: ``config.txt``, ``history.csv``, ``summary.txt`` and checkpoints."""
        config.validate()
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / CONFIG_FILE).write_text(config.canonical_text(), encoding="utf-8")
        history = Trainer.train(config, out)
        History.write(history, out / HISTORY_FILE, extra={"seed": config.seed})
        logger.info("wrote %s", out / HISTORY_FILE)
        return history

    # ------------------------------------------------------------- helpers

    @staticmethod
    def __data_seeds(config: ExperimentConfig) -> Tuple[int, int, int]:
        """(train/split, test, noise) seeds, all from ``data_seed``."""
        state = np.random.SeedSequence(config.data_seed).generate_state(3)
        return int(state[0]), int(state[1]), int(state[2])

    @staticmethod
    def __checkpoint(state: State, out: Path, t: int) -> None:
        folder = out / "checkpoints"
        if isinstance(state, DualModelState):
            Checkpoint.write(state.params1, folder / f"epoch_{t:04d}_m1.nlab")
            Checkpoint.write(state.params2, folder / f"epoch_{t:04d}_m2.nlab")
        else:
            Checkpoint.write(state.params, folder / f"epoch_{t:04d}_m1.nlab")
        logger.debug("checkpointed epoch %d into %s", t, folder)
