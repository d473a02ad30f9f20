from .scoring import Scoring
from .history import (
    COLUMNS,
    ColumnSummary,
    EpochRecord,
    History,
    MetricsHistory,
    RunSummary,
)
