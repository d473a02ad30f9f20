# tools/tests/noisylab/data/test_shapes.py
# SPDX-License-Identifier: MIT
# -*- coding: utf-8 -*-

import numpy as np
import pytest

from noisylab.data import ShapeGenerator
from noisylab.errors import OutOfRangeError


def test_same_seed_same_set():
    first = ShapeGenerator.gen_symmetric_shapes(50, 4, 16, seed=3)
    second = ShapeGenerator.gen_symmetric_shapes(50, 4, 16, seed=3)
    assert np.array_equal(first.images, second.images)
    assert np.array_equal(first.labels, second.labels)


def test_classes_are_balanced():
    data = ShapeGenerator.gen_symmetric_shapes(100, 4, 16, seed=0)
    assert np.bincount(data.labels).tolist() == [25, 25, 25, 25]


def test_uneven_counts_differ_by_at_most_one():
    counts = np.bincount(ShapeGenerator.gen_symmetric_shapes(101, 6, 12, seed=1).labels)
    assert counts.max() - counts.min() <= 1


def test_layout_and_range():
    data = ShapeGenerator.gen_symmetric_shapes(20, 3, 14, seed=2)
    assert data.images.shape == (20, 1, 14, 14)
    assert data.images.min() >= 0.0 and data.images.max() <= 1.0
    assert data.classes == 3


def test_side_and_class_limits():
    with pytest.raises(OutOfRangeError):
        ShapeGenerator.gen_symmetric_shapes(10, 4, 11, seed=0)
    with pytest.raises(OutOfRangeError):
        ShapeGenerator.gen_symmetric_shapes(10, 7, 16, seed=0)
