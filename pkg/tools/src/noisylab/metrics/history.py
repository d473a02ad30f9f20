from __future__ import annotations
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Union
import csv
import logging

import yaml

from noisylab.errors.empty_input_error import EmptyInputError
from noisylab.errors.missing_column_error import MissingColumnError
from noisylab.errors.out_of_range_error import OutOfRangeError

logger = logging.getLogger(__name__)

COLUMNS = ("epoch", "keep_ratio", "lr", "loss_cls", "loss_ag", "loss_ens",
           "acc_m1", "acc_m2", "acc_ens", "clean_rate")
ACCURACY_COLUMNS = ("acc_m1", "acc_m2", "acc_ens")
SUMMARY_FILE = "summary.txt"

# Window of trailing epochs averaged into the headline accuracy.
_LAST_WINDOW = 10


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    keep_ratio: float
    lr: float
    loss_cls: float
    loss_ag: float
    loss_ens: float
    acc_m1: float
    acc_m2: float
    acc_ens: float
    clean_rate: float

    def __post_init__(self) -> None:
        for name in (*ACCURACY_COLUMNS, "clean_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise OutOfRangeError(name, value, "must lie in [0, 1]")

    def row(self) -> List[str]:
        return [str(self.epoch)] + [f"{getattr(self, name):.6f}" for name in COLUMNS[1:]]


@dataclass
class MetricsHistory:
    """Epoch records in order (epochs 1, 2, ...), plus run identity and timing."""

    fingerprint: str = ""
    method: str = ""
    records: List[EpochRecord] = field(default_factory=list)
    wall_clock: List[float] = field(default_factory=list)

    def append(self, record: EpochRecord, seconds: float = 0.0) -> None:
        expected = len(self.records) + 1
        if record.epoch != expected:
            raise OutOfRangeError("epoch", record.epoch, f"history expects epoch {expected} next")
        self.records.append(record)
        self.wall_clock.append(seconds)

    def column(self, name: str) -> List[float]:
        if name not in COLUMNS:
            raise MissingColumnError(name, "<history>")
        return [float(getattr(r, name)) for r in self.records]

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class ColumnSummary:
    best: float
    last: float
    last10_mean: float


@dataclass(frozen=True)
class RunSummary:
    m1: ColumnSummary
    m2: ColumnSummary
    ens: ColumnSummary
    final_clean_rate: float

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


class History:
    """Summaries and on-disk form of a :class:`MetricsHistory`.

    ``history.csv`` has the fixed :data:`COLUMNS` header and 6-decimal reals;
    the sibling ``summary.txt`` is a YAML document with the run summary and
    the config fingerprint.
    """

    @staticmethod
    def summarize(history: MetricsHistory) -> RunSummary:
        if not history.records:
            raise EmptyInputError("history")
        return RunSummary(
            m1=History.summarize_column(history.column("acc_m1")),
            m2=History.summarize_column(history.column("acc_m2")),
            ens=History.summarize_column(history.column("acc_ens")),
            final_clean_rate=history.records[-1].clean_rate,
        )

    @staticmethod
    def summarize_column(values: List[float]) -> ColumnSummary:
        if not values:
            raise EmptyInputError("accuracy column")
        window = values[-_LAST_WINDOW:]
        return ColumnSummary(best=max(values), last=values[-1], last10_mean=sum(window) / len(window))

    # ------------------------------------------------------------ writing

    @staticmethod
    def write(history: MetricsHistory, path: Union[str, Path], extra: Optional[Dict[str, object]] = None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(COLUMNS)
            for record in history.records:
                writer.writerow(record.row())

        document: Dict[str, object] = {"fingerprint": history.fingerprint, "method": history.method,
                                       "epochs": len(history.records)}
        if history.records:
            document["summary"] = History.summarize(history).to_dict()
        document["wall_clock_seconds"] = round(sum(history.wall_clock), 3)
        if extra:
            document.update(extra)
        summary_path = path.parent / SUMMARY_FILE
        summary_path.write_text(yaml.safe_dump(document, sort_keys=False), encoding="utf-8")
        logger.debug("wrote %s and %s", path, summary_path)
        return path

    # ------------------------------------------------------------ reading

    @staticmethod
    def read(path: Union[str, Path]) -> MetricsHistory:
        path = Path(path)
        with path.open(newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            for name in COLUMNS:
                if name not in header:
                    raise MissingColumnError(name, str(path))
            rows = list(reader)

        history = MetricsHistory()
        summary_path = path.parent / SUMMARY_FILE
        if summary_path.exists():
            document = yaml.safe_load(summary_path.read_text(encoding="utf-8")) or {}
            history.fingerprint = str(document.get("fingerprint", ""))
            history.method = str(document.get("method", ""))

        for row in rows:
            values = {f.name: (int(row[f.name]) if f.name == "epoch" else float(row[f.name]))
                      for f in fields(EpochRecord)}
            history.append(EpochRecord(**values))
        return history

    @staticmethod
    def read_summary(path: Union[str, Path]) -> Dict[str, object]:
        """Load a ``summary.txt`` (or the one next to a ``history.csv``)."""
        path = Path(path)
        if path.suffix == ".csv":
            path = path.parent / SUMMARY_FILE
        return yaml.safe_load(path.read_text(encoding="utf-8")) or {}
