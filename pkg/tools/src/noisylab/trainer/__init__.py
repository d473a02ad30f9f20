from .state import DualModelState, EpochOptions, ModelState
from .regimes import Regimes
from .train import Experiment, Trainer, HISTORY_FILE, CONFIG_FILE
from .probe import FlipProbe, ProbeResult, flip_detection_probe, PROBE_FILE
from noisylab.config.method_kind import MethodKind
from noisylab.metrics.history import EpochRecord
