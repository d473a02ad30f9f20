# tools/tests/noisylab/data/test_batching.py
# SPDX-License-Identifier: MIT
# -*- coding: utf-8 -*-

import numpy as np
import pytest

from noisylab.data import Batching, LabeledImageSet
from noisylab.errors import OutOfRangeError


def numbered_set(n):
    """Each image holds its own index, so samples can be traced through shuffles."""
    images = (np.arange(n, dtype=np.float64) / max(1, n)).reshape(n, 1, 1, 1)
    return LabeledImageSet(images=images, labels=np.arange(n) % 3, classes=3)


# -----------------------
# Flip
# -----------------------

def test_hflip_reverses_columns():
    assert Batching.hflip(np.array([[1, 2, 3]])).tolist() == [[3, 2, 1]]


def test_hflip_is_an_involution():
    x = np.random.default_rng(0).random((4, 1, 5, 6))
    assert np.array_equal(Batching.hflip(Batching.hflip(x)), x)


def test_hflip_fixes_symmetric_images():
    row = np.array([0.1, 0.5, 0.9, 0.5, 0.1])
    image = np.tile(row, (5, 1))
    assert np.array_equal(Batching.hflip(image), image)


# -----------------------
# Split
# -----------------------

def test_split_sizes_and_disjointness():
    data = numbered_set(100)
    train, test = Batching.split(data, (0.8, 0.2), seed=0)
    assert (len(train), len(test)) == (80, 20)
    assert not set(train.images.ravel()) & set(test.images.ravel())


def test_split_keeps_the_multiset():
    data = numbered_set(57)
    train, test = Batching.split(data, (0.7, 0.3), seed=4)
    merged = np.sort(np.concatenate([train.images.ravel(), test.images.ravel()]))
    assert np.array_equal(merged, np.sort(data.images.ravel()))


def test_split_is_deterministic():
    data = numbered_set(30)
    first, second = Batching.split(data, (0.5, 0.5), 7), Batching.split(data, (0.5, 0.5), 7)
    assert np.array_equal(first[0].images, second[0].images)


def test_split_fractions_must_sum_to_one():
    with pytest.raises(OutOfRangeError):
        Batching.split(numbered_set(10), (0.5, 0.6), 0)


# -----------------------
# Batches
# -----------------------

def test_batch_sizes():
    assert [len(b) for b in Batching.batches(numbered_set(10), 4, epoch=1, seed=0)] == [4, 4, 2]


def test_one_epoch_is_a_permutation():
    batches = Batching.batches(numbered_set(23), 5, epoch=3, seed=1)
    indexes = np.concatenate([b.indexes for b in batches])
    assert sorted(indexes.tolist()) == list(range(23))
    for b in batches:
        assert np.array_equal(b.labels, np.arange(23)[b.indexes] % 3)


def test_order_depends_on_seed_and_epoch():
    data = numbered_set(40)

    def order(epoch, seed):
        return np.concatenate([b.indexes for b in Batching.batches(data, 8, epoch, seed)])

    assert np.array_equal(order(2, 5), order(2, 5))
    assert not np.array_equal(order(2, 5), order(3, 5))
    assert not np.array_equal(order(2, 5), order(2, 6))


def test_batch_size_must_be_positive():
    with pytest.raises(OutOfRangeError):
        Batching.batches(numbered_set(5), 0, 1, 0)
