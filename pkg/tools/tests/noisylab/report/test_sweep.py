# tools/tests/noisylab/report/test_sweep.py
# SPDX-License-Identifier: MIT
# -*- coding: utf-8 -*-

import csv

import numpy as np
import pytest

from noisylab.config import ExperimentConfig, MethodKind
from noisylab.metrics import History
from noisylab.report import AGGREGATE_FILE, Sweep
from noisylab.trainer import Trainer


# -----------------------
# Helpers
# -----------------------

def base(tmp_path, **overrides):
    values = dict(n_train=48, n_test=24, classes=3, side=12, hidden=(8,), epochs=2, tk=1, batch_size=16,
                  eval_batch_size=50, noise_rate=0.25, out=str(tmp_path))
    values.update(overrides)
    return ExperimentConfig(**values).validate()


def aggregate_rows(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


# -----------------------
# Planning
# -----------------------

def test_plan_gives_each_run_a_folder_and_seed(tmp_path):
    configs = Sweep.plan(base(tmp_path), [MethodKind.MDA, MethodKind.BASELINE], [0, 1])
    assert [(c.method, c.seed) for c in configs] == [(MethodKind.MDA, 0), (MethodKind.MDA, 1),
                                                     (MethodKind.BASELINE, 0), (MethodKind.BASELINE, 1)]
    assert configs[1].out == str(tmp_path / "mda_seed1")
    assert configs[0].data_seed != configs[1].data_seed


def test_plan_needs_methods_and_seeds(tmp_path):
    with pytest.raises(ValueError):
        Sweep.plan(base(tmp_path), [], [0])
    with pytest.raises(ValueError):
        Sweep.plan(base(tmp_path), [MethodKind.MDA], [])


# -----------------------
# Running
# -----------------------

def test_two_methods_three_seeds(tmp_path):
    report = Sweep.run(base(tmp_path), [MethodKind.MDA, MethodKind.COTEACHING], [0, 1, 2])
    assert not report.failed
    histories = sorted(tmp_path.glob("*/history.csv"))
    assert len(histories) == 6
    assert report.aggregate_path == tmp_path / AGGREGATE_FILE

    rows = aggregate_rows(report.aggregate_path)
    assert {row["method"] for row in rows} == {"mda", "coteaching"}
    for method in ("mda", "coteaching"):
        summaries = [History.read_summary(tmp_path / f"{method}_seed{seed}" / "summary.txt") for seed in range(3)]
        values = [s["summary"]["ens"]["last10_mean"] for s in summaries]
        row = next(r for r in rows if r["method"] == method and r["metric"] == "ens.last10_mean")
        assert row["runs"] == "3"
        assert float(row["mean"]) == pytest.approx(np.mean(values), abs=1e-6)
        assert float(row["std"]) == pytest.approx(np.std(values), abs=1e-6)
        match = next(r for r in report.rows if r.method == method and r.metric == "ens.last10_mean")
        assert abs(match.mean - np.mean(values)) <= 1e-9


def test_single_run_has_zero_spread(tmp_path):
    report = Sweep.run(base(tmp_path), [MethodKind.BASELINE], [4])
    summary = History.read_summary(tmp_path / "baseline_seed4" / "summary.txt")["summary"]
    rows = {row.metric: row for row in report.rows}
    assert rows["m1.best"].mean == summary["m1"]["best"]
    assert rows["final_clean_rate"].mean == summary["final_clean_rate"]
    assert all(row.std == 0.0 and row.runs == 1 for row in report.rows)


def test_parallel_jobs_match_serial(tmp_path):
    serial = Sweep.run(base(tmp_path / "serial"), [MethodKind.MDA], [0, 1])
    parallel = Sweep.run(base(tmp_path / "parallel"), [MethodKind.MDA], [0, 1], jobs=2)
    assert serial.rows == parallel.rows


def test_failed_run_is_reported_and_skipped(tmp_path, monkeypatch):
    train = Trainer.run

    def flaky(config):
        if config.method is MethodKind.JOCOR:
            raise RuntimeError("diverged")
        return train(config)

    monkeypatch.setattr(Trainer, "run", flaky)
    report = Sweep.run(base(tmp_path), [MethodKind.JOCOR, MethodKind.BASELINE], [0])
    assert [(o.method, o.error) for o in report.failed] == [(MethodKind.JOCOR, "diverged")]
    assert {row.method for row in report.rows} == {"baseline"}
