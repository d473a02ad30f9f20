from .method_kind import MethodKind
from .experiment_config import ExperimentConfig, ExperimentConfigParser, UsageParser, parse_config, OUT_ENV
