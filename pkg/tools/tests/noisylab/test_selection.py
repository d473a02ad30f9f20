# tools/tests/noisylab/test_selection.py
# SPDX-License-Identifier: MIT
# -*- coding: utf-8 -*-

import math

import numpy as np
import pytest

from noisylab.data import Batch
from noisylab.errors import EmptyInputError, OutOfRangeError
from noisylab.losses import PerSampleLosses
from noisylab.selection import SelectedSet, Selection, SelectionSchedule


# -----------------------
# Helpers
# -----------------------

def losses(*values):
    return PerSampleLosses(np.asarray(values, dtype=np.float64))


def batch(indexes):
    indexes = np.asarray(indexes)
    return Batch(indexes=indexes, images=np.zeros((len(indexes), 1, 1, 1)), labels=np.zeros(len(indexes), dtype=int))


# -----------------------
# Keep ratio
# -----------------------

def test_keep_ratio_examples():
    schedule = SelectionSchedule(noise_rate=0.5, warmup_epochs=10, total_epochs=20)
    assert Selection.keep_ratio(schedule, 0) == 1.0
    assert Selection.keep_ratio(schedule, 10) == 0.5
    assert Selection.keep_ratio(schedule, 5) == 0.75


@pytest.mark.parametrize("tau", [0.2, 0.5, 0.8])
def test_keep_ratio_grid_and_counts(tau):
    schedule = SelectionSchedule(noise_rate=tau, warmup_epochs=10, total_epochs=20)
    values = np.random.default_rng(0).random(997)
    for t in range(21):
        ratio = Selection.keep_ratio(schedule, t)
        assert ratio == 1.0 - min(t / 10 * tau, tau)
        assert len(Selection.select_small_loss(PerSampleLosses(values), ratio)) == math.floor(ratio * 997)


def test_keep_ratio_epoch_out_of_range():
    schedule = SelectionSchedule(noise_rate=0.5, warmup_epochs=10, total_epochs=20)
    with pytest.raises(OutOfRangeError):
        Selection.keep_ratio(schedule, 21)


def test_schedule_ranges():
    with pytest.raises(OutOfRangeError):
        SelectionSchedule(noise_rate=1.0, warmup_epochs=10, total_epochs=20)
    with pytest.raises(OutOfRangeError):
        SelectionSchedule(noise_rate=0.2, warmup_epochs=0, total_epochs=20)


# -----------------------
# Small-loss selection
# -----------------------

def test_select_smallest():
    assert Selection.select_small_loss(losses(0.9, 0.1, 0.5, 0.3), 0.5).indexes.tolist() == [1, 3]


def test_full_keep_selects_everything():
    assert Selection.select_small_loss(losses(3, 1, 2), 1.0).indexes.tolist() == [0, 1, 2]


def test_ties_go_to_the_smaller_index():
    assert Selection.select_small_loss(losses(1, 1, 1, 1), 0.5).indexes.tolist() == [0, 1]


def test_selection_is_sorted_and_unique():
    values = np.random.default_rng(1).random(100)
    indexes = Selection.select_small_loss(PerSampleLosses(values), 0.37, epoch=4).indexes
    assert np.array_equal(indexes, np.unique(indexes))
    assert np.max(values[indexes]) <= np.min(np.delete(values, indexes))


def test_empty_losses():
    with pytest.raises(EmptyInputError):
        Selection.select_small_loss(PerSampleLosses(np.zeros(0)), 0.5)


def test_keep_ratio_out_of_range():
    with pytest.raises(OutOfRangeError):
        Selection.select_small_loss(losses(1, 2), 0.0)


# -----------------------
# Batch membership
# -----------------------

def test_batch_mask():
    selected = SelectedSet(epoch=1, keep_ratio=0.5, indexes=np.array([1, 3]))
    assert Selection.batch_selected(selected, batch([0, 1, 2, 3])).tolist() == [False, True, False, True]


def test_batch_mask_full_and_disjoint():
    everything = SelectedSet(epoch=1, keep_ratio=1.0, indexes=np.arange(6))
    assert Selection.batch_selected(everything, batch([5, 0, 3])).all()
    some = SelectedSet(epoch=1, keep_ratio=0.5, indexes=np.array([0, 1]))
    assert not Selection.batch_selected(some, batch([4, 5])).any()


def test_dump_writes_one_index_per_line(tmp_path):
    selected = SelectedSet(epoch=2, keep_ratio=0.5, indexes=np.array([1, 4, 7]))
    path = selected.dump(tmp_path / "selected" / "e.txt")
    assert path.read_text() == "1\n4\n7\n"
