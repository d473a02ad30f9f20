# tools/tests/noisylab/test_cli.py
# SPDX-License-Identifier: MIT
# -*- coding: utf-8 -*-

import pytest
import yaml

from noisylab.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main
from noisylab.config import OUT_ENV, MethodKind
from noisylab.trainer import Trainer

SMALL = ["--n-train", "48", "--n-test", "24", "--classes", "3", "--side", "12", "--hidden", "8",
         "--epochs", "2", "--tk", "1", "--batch-size", "16"]


# -----------------------
# run
# -----------------------

def test_run_writes_the_run_folder(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", "--method", "baseline", *SMALL, "--out", str(out)]) == EXIT_OK
    for name in ("config.txt", "history.csv", "summary.txt"):
        assert (out / name).exists()
    assert "baseline: 2 epochs" in capsys.readouterr().out


def test_run_reads_a_config_file(tmp_path):
    config = tmp_path / "exp.yaml"
    config.write_text("method: jocor\nnoise-rate: 0.4\n")
    out = tmp_path / "run"
    assert main(["run", "--config", str(config), *SMALL, "--out", str(out)]) == EXIT_OK
    assert "method = jocor" in (out / "config.txt").read_text()
    assert "noise-rate = 0.4" in (out / "config.txt").read_text()


def test_out_defaults_to_the_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env-out"))
    assert main(["run", *SMALL]) == EXIT_OK
    assert (tmp_path / "env-out" / "history.csv").exists()


def test_range_error_is_a_usage_error(tmp_path, capsys):
    assert main(["run", "--noise-rate", "1.5", "--out", str(tmp_path)]) == EXIT_USAGE
    assert "noise-rate" in capsys.readouterr().err


def test_unknown_flag_is_a_usage_error(tmp_path, capsys):
    assert main(["run", "--momentum", "0.9", "--out", str(tmp_path)]) == EXIT_USAGE
    assert "momentum" in capsys.readouterr().err


def test_missing_command_is_a_usage_error(capsys):
    assert main([]) == EXIT_USAGE


def test_unwritable_out_fails_with_the_path(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a folder")
    assert main(["run", *SMALL, "--out", str(blocker / "run")]) == EXIT_FAILURE
    assert "blocker" in capsys.readouterr().err


# -----------------------
# sweep / probe / plot
# -----------------------

def test_sweep(tmp_path, capsys):
    code = main(["sweep", *SMALL, "--methods", "mda,baseline", "--seeds", "0,1", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert len(list(tmp_path.glob("*/history.csv"))) == 4
    assert (tmp_path / "aggregate.csv").exists()
    assert "(2 runs)" in capsys.readouterr().out


def test_sweep_with_a_failed_run(tmp_path, monkeypatch):
    train = Trainer.run

    def flaky(config):
        if config.method is MethodKind.BASELINE:
            raise RuntimeError("diverged")
        return train(config)

    monkeypatch.setattr(Trainer, "run", flaky)
    assert main(["sweep", *SMALL, "--methods", "mda,baseline", "--out", str(tmp_path)]) == EXIT_FAILURE


def test_sweep_rejects_unknown_methods(tmp_path):
    assert main(["sweep", *SMALL, "--methods", "mda,mixup", "--out", str(tmp_path)]) == EXIT_USAGE


def test_probe(tmp_path):
    assert main(["probe", *SMALL, "--probe-epochs", "1", "--keep", "0.5", "--out", str(tmp_path)]) == EXIT_OK
    assert yaml.safe_load((tmp_path / "probe.txt").read_text())["kept"] == 24


def test_plot(tmp_path):
    assert main(["run", *SMALL, "--out", str(tmp_path / "run")]) == EXIT_OK
    svg = tmp_path / "chart.svg"
    code = main(["plot", str(tmp_path / "run" / "history.csv"), "--out", str(svg), "--columns", "acc_m1,acc_ens"])
    assert code == EXIT_OK
    assert svg.read_text().count("<polyline") == 2


def test_plot_missing_column_fails(tmp_path):
    assert main(["run", *SMALL, "--out", str(tmp_path / "run")]) == EXIT_OK
    code = main(["plot", str(tmp_path / "run" / "history.csv"), "--out", str(tmp_path / "c.svg"),
                 "--columns", "accuracy"])
    assert code == EXIT_FAILURE


@pytest.mark.parametrize("argv", [["run", "--help"], ["--help"]])
def test_help_exits_cleanly(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 0
