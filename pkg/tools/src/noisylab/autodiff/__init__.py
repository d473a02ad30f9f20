from .tape import Tape
from .tensor import Tensor
from .ops import Ops, LOG_FLOOR
from .grad import Grad
