from __future__ import annotations
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Dict, Union
import logging

import numpy as np
import yaml

from noisylab.autodiff.tape import Tape
from noisylab.autodiff.tensor import Tensor
from noisylab.config.experiment_config import ExperimentConfig
from noisylab.config.method_kind import MethodKind
from noisylab.errors.out_of_range_error import OutOfRangeError
from noisylab.losses import Losses, PerSampleLosses
from noisylab.metrics.scoring import Scoring
from noisylab.nn.inference import Inference
from noisylab.nn.network import ModelParams
from noisylab.selection import Selection
from noisylab.trainer.regimes import Regimes
from noisylab.trainer.state import EpochOptions, ModelState
from noisylab.trainer.train import Trainer

logger = logging.getLogger(__name__)

PROBE_FILE = "probe.txt"


@dataclass(frozen=True)
class ProbeResult:
    epochs: int
    keep: float
    kept: int
    noise_rate: float
    clean_rate_original: float
    clean_rate_flip: float

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(yaml.safe_dump(self.to_dict(), sort_keys=False), encoding="utf-8")
        return path


class FlipProbe:
    """How clean is the small-loss set when ranked on originals vs. on their flips?

    One baseline model is trained on the noisy set for ``epochs`` epochs (so it
    has seen, and partly memorized, the original images but never their
    flips); then the ``keep`` fraction of the training set with the smallest
    per-sample cross-entropy is taken twice, once per image source.
    """

    @staticmethod
    def run(config: ExperimentConfig, epochs: int = 20, keep: float = 0.8) -> ProbeResult:
        if epochs < 1:
            raise OutOfRangeError("probe-epochs", epochs, "must be >= 1")
        if not 0.0 < keep <= 1.0:
            raise OutOfRangeError("keep", keep, "must lie in (0, 1]")
        config = replace(config, method=MethodKind.BASELINE, epochs=epochs, tk=min(config.tk, epochs),
                         flip_augment=False).validate()
        experiment = Trainer.prepare(config)
        options = EpochOptions(batch_size=config.batch_size, chunk=config.eval_batch_size, workers=config.workers)

        state = ModelState.fresh(experiment.arch, config.model_seeds[0], config.weight_decay)
        for t in range(1, epochs + 1):
            state, _ = Regimes.run_baseline_epoch(state, experiment.noisy, experiment.lr_schedule.lr_at(t - 1), t,
                                                  config.shuffle_seed, options)

        noisy = experiment.noisy
        original = FlipProbe.__small_loss_clean_rate(state.params, noisy.images, noisy, keep, options)
        flipped = FlipProbe.__small_loss_clean_rate(state.params, experiment.flip.images, noisy, keep, options)
        result = ProbeResult(epochs=epochs, keep=keep, kept=original[1], noise_rate=config.noise_rate,
                             clean_rate_original=original[0], clean_rate_flip=flipped[0])
        logger.info("probe after %d epochs: clean rate %.4f on originals, %.4f on flips (keep %d)",
                    epochs, result.clean_rate_original, result.clean_rate_flip, result.kept)
        return result

    @staticmethod
    def __small_loss_clean_rate(params: ModelParams, images: np.ndarray, noisy, keep: float,
                                options: EpochOptions):
        logits = Inference.logits(params, images, options.chunk, options.workers)
        with Tape.suspended():
            per_sample = Losses.cross_entropy_per_sample(Tensor(logits), noisy.labels)
        selected = Selection.select_small_loss(PerSampleLosses(per_sample.data.copy()), keep)
        if len(selected) == 0:
            return 0.0, 0
        return Scoring.selected_clean_rate(selected, noisy.corruption_mask), len(selected)


def flip_detection_probe(config: ExperimentConfig, epochs: int = 20, keep: float = 0.8) -> ProbeResult:
    return FlipProbe.run(config, epochs, keep)
