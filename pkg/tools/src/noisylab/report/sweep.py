from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple
import csv
import logging

import numpy as np

from noisylab.config.experiment_config import ExperimentConfig
from noisylab.config.method_kind import MethodKind
from noisylab.errors.empty_input_error import EmptyInputError
from noisylab.errors.out_of_range_error import OutOfRangeError
from noisylab.metrics.history import SUMMARY_FILE, History
from noisylab.trainer.train import HISTORY_FILE, Trainer

logger = logging.getLogger(__name__)

AGGREGATE_FILE = "aggregate.csv"
AGGREGATE_COLUMNS = ("method", "metric", "runs", "mean", "std")
# (row name, path into summary.txt)
METRICS: Tuple[Tuple[str, Tuple[str, ...]], ...] = tuple(
    [(f"{model}.{stat}", ("summary", model, stat))
     for model in ("m1", "m2", "ens") for stat in ("last10_mean", "best", "last")]
    + [("final_clean_rate", ("summary", "final_clean_rate"))]
)


@dataclass(frozen=True)
class RunOutcome:
    method: MethodKind
    seed: int
    out: Path
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class AggregateRow:
    method: str
    metric: str
    runs: int
    mean: float
    std: float

    def row(self) -> List[str]:
        return [self.method, self.metric, str(self.runs), f"{self.mean:.6f}", f"{self.std:.6f}"]


@dataclass(frozen=True)
class SweepReport:
    outcomes: Tuple[RunOutcome, ...]
    rows: Tuple[AggregateRow, ...]
    aggregate_path: Path

    @property
    def failed(self) -> List[RunOutcome]:
        return [o for o in self.outcomes if not o.ok]


class Sweep:
    """Every (method, seed) pair of a base config, each in its own folder under ``base.out``.

    Run folders are ``<method>_seed<seed>``. A failing run is logged and
    reported; the others still finish and are aggregated. Aggregates read the
    per-run ``summary.txt`` files back, so they always agree with them.
    """

    @staticmethod
    def plan(base: ExperimentConfig, methods: Sequence[MethodKind], seeds: Sequence[int]) -> List[ExperimentConfig]:
        if not methods:
            raise EmptyInputError("method list")
        if not seeds:
            raise EmptyInputError("seed list")
        root = Path(base.out)
        configs = []
        for method in methods:
            for seed in seeds:
                config = replace(base.reseeded(seed), method=method, out=str(root / f"{method.value}_seed{seed}"))
                configs.append(config.validate())
        return configs

    @staticmethod
    def run(base: ExperimentConfig, methods: Sequence[MethodKind], seeds: Sequence[int], jobs: int = 1) -> SweepReport:
        if jobs < 1:
            raise OutOfRangeError("jobs", jobs, "must be >= 1")
        configs = Sweep.plan(base, methods, seeds)
        logger.info("sweep: %d runs (%d methods x %d seeds), %d at a time", len(configs), len(methods),
                    len(seeds), jobs)
        if jobs == 1:
            outcomes = [Sweep.__run_one(config) for config in configs]
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                outcomes = list(pool.map(Sweep.__run_one, configs))

        rows = Sweep.aggregate([o for o in outcomes if o.ok])
        path = Sweep.write_aggregate(rows, Path(base.out) / AGGREGATE_FILE)
        return SweepReport(outcomes=tuple(outcomes), rows=tuple(rows), aggregate_path=path)

    @staticmethod
    def aggregate(outcomes: Sequence[RunOutcome]) -> List[AggregateRow]:
        """Mean and population std of each summary metric, per method in first-seen order."""
        by_method: Dict[str, List[Dict[str, object]]] = {}
        for outcome in outcomes:
            document = History.read_summary(outcome.out / SUMMARY_FILE)
            if "summary" not in document:
                logger.warning("%s has no epochs to aggregate", outcome.out)
                continue
            by_method.setdefault(outcome.method.value, []).append(document)

        rows: List[AggregateRow] = []
        for method, documents in by_method.items():
            for name, keys in METRICS:
                values = np.array([float(Sweep.__lookup(doc, keys)) for doc in documents], dtype=np.float64)
                rows.append(AggregateRow(method=method, metric=name, runs=int(values.size),
                                         mean=float(np.mean(values)), std=float(np.std(values))))
        return rows

    @staticmethod
    def write_aggregate(rows: Sequence[AggregateRow], path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(AGGREGATE_COLUMNS)
            for row in rows:
                writer.writerow(row.row())
        logger.info("wrote %s", path)
        return path

    @staticmethod
    def __run_one(config: ExperimentConfig) -> RunOutcome:
        out = Path(config.out)
        try:
            Trainer.run(config)
        except Exception as exc:  # reported per run, the sweep goes on
            logger.error("%s seed %d failed: %s", config.method.value, config.seed, exc)
            return RunOutcome(method=config.method, seed=config.seed, out=out, error=str(exc))
        logger.info("%s seed %d done: %s", config.method.value, config.seed, out / HISTORY_FILE)
        return RunOutcome(method=config.method, seed=config.seed, out=out)

    @staticmethod
    def __lookup(document: Dict[str, object], keys: Tuple[str, ...]) -> object:
        value: object = document
        for key in keys:
            value = value[key]  # type: ignore[index]
        return value
