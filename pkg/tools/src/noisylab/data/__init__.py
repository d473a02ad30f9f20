from .images import LabeledImageSet, NoisyDataset, FlipView, Batch
from .shapes import ShapeGenerator
from .idx import Idx
from .noise import Noise
from .batching import Batching
