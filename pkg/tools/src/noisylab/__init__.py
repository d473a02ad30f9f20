from .autodiff import Grad, Ops, Tape, Tensor
from .nn import Adam, AdamState, Architecture, Checkpoint, Inference, LrSchedule, ModelParams, Network
from .losses import Losses, LossWeights, PerSampleLosses
from .data import Batch, Batching, FlipView, Idx, LabeledImageSet, Noise, NoisyDataset, ShapeGenerator
from .selection import SelectedSet, Selection, SelectionSchedule
from .metrics import EpochRecord, History, MetricsHistory, RunSummary, Scoring
from .config import ExperimentConfig, ExperimentConfigParser, MethodKind, parse_config
from .trainer import DualModelState, FlipProbe, ModelState, Regimes, Trainer, flip_detection_probe
from .report import SvgChart, Sweep, emit_plot
