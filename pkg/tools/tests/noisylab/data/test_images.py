# tools/tests/noisylab/data/test_images.py
# SPDX-License-Identifier: MIT
# -*- coding: utf-8 -*-

import numpy as np
import pytest

from noisylab.data import Batching, FlipView, LabeledImageSet, Noise, NoisyDataset, ShapeGenerator
from noisylab.errors import OutOfRangeError, TensorError


# -----------------------
# Image sets
# -----------------------

def test_image_set_checks_labels():
    with pytest.raises(OutOfRangeError):
        LabeledImageSet(images=np.zeros((2, 1, 2, 2)), labels=np.array([0, 3]), classes=3)


def test_image_set_checks_pixel_range():
    with pytest.raises(OutOfRangeError):
        LabeledImageSet(images=np.full((1, 1, 2, 2), 1.5), labels=np.array([0]), classes=2)


def test_image_set_checks_rank():
    with pytest.raises(TensorError):
        LabeledImageSet(images=np.zeros((2, 4)), labels=np.array([0, 1]), classes=2)


def test_noisy_dataset_mask_must_match():
    base = LabeledImageSet(images=np.zeros((2, 1, 1, 1)), labels=np.array([0, 1]), classes=2)
    with pytest.raises(TensorError):
        NoisyDataset(base=base, true_labels=np.array([0, 0]), corruption_mask=np.array([False, False]),
                     noise_rate=0.5)


# -----------------------
# Flip view
# -----------------------

def test_flip_view_mirrors_pixels_and_shares_labels():
    noisy = Noise.inject_symmetric(ShapeGenerator.gen_symmetric_shapes(12, 3, 12, seed=0), 0.25, seed=1)
    flip = FlipView(noisy)
    assert np.array_equal(flip.images, Batching.hflip(noisy.images))
    assert flip.labels is noisy.labels
    assert flip.corruption_mask is noisy.corruption_mask
    assert len(flip) == len(noisy) and flip.classes == noisy.classes


def test_flip_of_flip_is_the_source():
    noisy = NoisyDataset.clean(ShapeGenerator.gen_symmetric_shapes(6, 2, 12, seed=3))
    assert np.array_equal(FlipView(noisy).flip().images, noisy.images)


def test_flip_view_materializes_once():
    flip = FlipView(NoisyDataset.clean(ShapeGenerator.gen_symmetric_shapes(4, 2, 12, seed=0)))
    assert flip.images is flip.images
