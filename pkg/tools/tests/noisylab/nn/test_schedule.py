# tools/tests/noisylab/nn/test_schedule.py
# SPDX-License-Identifier: MIT
# -*- coding: utf-8 -*-

import pytest

from noisylab.errors import OutOfRangeError
from noisylab.nn import LrSchedule


def test_linear_holds_before_decay():
    assert LrSchedule(0.001, 200, 0.4).lr_at(50) == 0.001


def test_linear_reaches_zero_at_the_end():
    assert LrSchedule(0.001, 200, 0.4).lr_at(200) == 0.0


def test_linear_interpolates():
    assert LrSchedule(0.001, 200, 0.4).lr_at(140) == pytest.approx(0.0005, abs=1e-15)


def test_linear_is_monotone():
    schedule = LrSchedule(0.01, 30, 0.5)
    rates = [schedule.lr_at(e) for e in range(31)]
    assert all(a >= b for a, b in zip(rates, rates[1:]))


def test_step_stages():
    schedule = LrSchedule(0.1, 10, kind="step", steps=(0.1, 0.01))
    assert [schedule.lr_at(e) for e in (0, 4, 5, 9, 10)] == [0.1, 0.1, 0.01, 0.01, 0.01]


def test_step_needs_rates():
    with pytest.raises(OutOfRangeError):
        LrSchedule(0.1, 10, kind="step")


def test_epoch_out_of_range():
    with pytest.raises(OutOfRangeError):
        LrSchedule(0.001, 10).lr_at(11)


def test_zero_epochs():
    assert LrSchedule(0.001, 0, 0.4).lr_at(0) == 0.0
