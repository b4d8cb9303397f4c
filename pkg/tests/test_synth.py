# -*- coding: utf-8 -*-
#
# Testing for synthetic data generation.
#
# ------------------------------------------------


# imports
# -------
import os
import pytest
import numpy as np

from boundary_cf import synth
from boundary_cf.exceptions import InputError
from boundary_cf.track import read_ground_truth, list_frames

from . import SANDBOX


# helpers
# -------
def box(image, center, size):
    top, left = center[0] - size[0] // 2, center[1] - size[1] // 2
    return image[top:top + size[0], left:left + size[1]]


# session
# -------
class TestLocalizationSet(object):

    def test_annotations_mark_the_target(self):
        rng = np.random.default_rng(21)
        template = synth.texture(rng, (16, 16))
        data = synth.localization_set(6, seed=21, noise=0.0)
        for image, ann in zip(data.images, data.annotations):
            assert np.allclose(box(image, ann.right, (16, 16)), template)
            assert abs(ann.right[0] - 40) <= 4 and abs(ann.right[1] - 96) <= 4
            assert abs(ann.left[0] - 40) <= 4 and abs(ann.left[1] - 32) <= 4
        return

    def test_zero_contrast_distractors(self):
        rng = np.random.default_rng(22)
        template = synth.texture(rng, (16, 16))
        background = synth.clutter(rng, (128, 128), 0.3)
        data = synth.localization_set(1, seed=22, noise=0.0, distractor_contrast=0.0)
        ann = data.annotations[0]
        expected = background.copy()
        box(expected, ann.right, (16, 16))[...] = template
        assert np.allclose(data.images[0], expected)
        return

    def test_deterministic(self):
        a = synth.localization_set(4, seed=5)
        b = synth.localization_set(4, seed=5)
        assert all(np.array_equal(x, y) for x, y in zip(a.images, b.images))
        assert a.annotations == b.annotations
        return

    def test_points_must_fit(self):
        with pytest.raises(InputError):
            synth.localization_set(1, shape=(32, 32))
        return

    def test_directory_round_trip(self):
        directory = os.path.join(SANDBOX, 'synth_localization')
        data = synth.localization_set(3, seed=6)
        synth.write_localization_set(directory, data)
        back = synth.read_localization_set(directory)
        assert back.annotations == data.annotations
        assert np.abs(back.images[0] - data.images[0]).max() <= 0.5 / 255 + 1e-12
        with pytest.raises(InputError):
            synth.read_localization_set(os.path.join(SANDBOX, 'nowhere'))
        return


class TestSequence(object):

    def test_centres_follow_velocity(self):
        seq = synth.tracking_sequence(5, seed=1, velocity=(1.0, 2.0))
        assert seq.centers == [(64 + i, 30 + 2 * i) for i in range(5)]
        assert seq.bbox == (52, 18, 24, 24)
        return

    def test_target_planted(self):
        seq = synth.tracking_sequence(3, seed=2, noise=0.0)
        first = box(seq.frames[0], seq.centers[0], (24, 24))
        for frame, c in zip(seq.frames, seq.centers):
            assert np.allclose(box(frame, c, (24, 24)), first)
        return

    def test_path_leaves_frame(self):
        with pytest.raises(InputError):
            synth.tracking_sequence(200, seed=0)
        return

    def test_written_layout(self):
        directory = os.path.join(SANDBOX, 'synth_tracking')
        seq = synth.tracking_sequence(4, seed=3)
        synth.write_sequence(directory, seq)
        assert len(list_frames(directory)) == 4
        truth = read_ground_truth(os.path.join(directory, synth.GROUND_TRUTH))
        assert [(t.row, t.col) for t in truth] == [tuple(float(v) for v in c) for c in seq.centers]
        assert truth[0].width == 24.0
        return
