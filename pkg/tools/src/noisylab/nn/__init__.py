from .architecture import Architecture, LayerShape
from .network import ModelParams, Network
from .adam import Adam, AdamState
from .schedule import LrSchedule
from .checkpoint import Checkpoint
from .inference import Inference
