from .tensor_error import TensorError
from .tape_error import TapeError
from .out_of_range_error import OutOfRangeError
from .empty_input_error import EmptyInputError
from .idx_format_error import IdxFormatError
from .idx_length_error import IdxLengthError
from .idx_consistency_error import IdxConsistencyError
from .checkpoint_format_error import CheckpointFormatError
from .config_error import ConfigError
from .missing_column_error import MissingColumnError
