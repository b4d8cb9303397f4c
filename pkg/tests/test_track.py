# -*- coding: utf-8 -*-
#
# Testing for the online tracker and its metrics.
#
# ------------------------------------------------


# imports
# -------
import os
import pytest
import numpy as np

from boundary_cf.exceptions import DegenerateInputError, InputError, ParameterError
from boundary_cf.detect import locate
from boundary_cf.track import (
    TrackerParams, TrackRecord, init_tracker, track_step, run_sequence,
    precision_curve, read_ground_truth, list_frames, clamp_bbox,
)
from boundary_cf.signal import write_pgm

from . import SANDBOX


# helpers
# -------
def record_with(errors):
    rec = TrackRecord()
    for err in errors:
        rec.append((0, err), 10.0, 0.01, truth=(0, 0))
    return rec


# session
# -------
class TestInit(object):

    def test_deterministic(self, sequence):
        a = init_tracker(sequence.frames[0], sequence.bbox, TrackerParams(seed=5))
        b = init_tracker(sequence.frames[0], sequence.bbox, TrackerParams(seed=5))
        assert np.array_equal(a.model.h, b.model.h)
        assert np.array_equal(a.model.energies.s_xy, b.model.energies.s_xy)
        return

    def test_single_exemplar(self, sequence):
        state = init_tracker(sequence.frames[0], sequence.bbox, TrackerParams(init_perturbations=0))
        assert state.model.energies.count == 1
        assert init_tracker(sequence.frames[0], sequence.bbox).model.energies.count == 9
        return

    def test_geometry(self, sequence):
        state = init_tracker(sequence.frames[0], sequence.bbox)
        assert state.model.mask.inner == (24, 24)
        assert state.model.mask.outer == (48, 48)
        assert state.sigma == pytest.approx(24.0 / 16.0)
        assert state.center == sequence.centers[0]
        return

    def test_peaks_on_target(self, sequence):
        state = init_tracker(sequence.frames[0], sequence.bbox)
        assert locate(state.response, state.model) == (24, 24)
        assert state.last_psr > 0
        return

    def test_bad_boxes(self, sequence):
        frame = sequence.frames[0]
        with pytest.raises(DegenerateInputError):
            init_tracker(frame, (10, 10, 4, 24))
        with pytest.raises(DegenerateInputError):
            init_tracker(frame, (120, 10, 24, 24))
        with pytest.raises(DegenerateInputError):
            init_tracker(frame, (-1, 10, 24, 24))
        return

    def test_params(self):
        with pytest.raises(ParameterError):
            TrackerParams(eta=1.5)
        with pytest.raises(ParameterError):
            TrackerParams(search_scale=0.5)
        assert TrackerParams().admm.max_iters == 4
        assert TrackerParams(solver='mosse').to_dict()['solver'] == 'mosse'
        with pytest.raises(ParameterError):
            TrackerParams(solver='kcf')
        return


class TestSteps(object):

    def test_static_target(self, static_sequence):
        rec = run_sequence(static_sequence.frames, static_sequence.bbox, ground_truth=static_sequence.centers)
        assert len(rec) == 10
        assert all(c == static_sequence.centers[0] for c in rec.centers)
        assert max(rec.errors) == 0.0
        return

    def test_translating_target(self, sequence):
        rec = run_sequence(sequence.frames[:30], sequence.bbox, ground_truth=sequence.centers[:30])
        assert max(rec.errors) <= 1.0
        return

    def test_frozen_adaptation(self, static_sequence):
        params = TrackerParams(eta=0.0)
        state = init_tracker(static_sequence.frames[0], static_sequence.bbox, params)
        h = state.model.h.copy()
        for frame in static_sequence.frames[:4]:
            state, center, score = track_step(state, frame)
            assert np.abs(state.model.h - h).max() <= 1e-10
        assert state.frame_index == 4
        return

    def test_uniform_frame(self, static_sequence):
        state = init_tracker(static_sequence.frames[0], static_sequence.bbox)
        blank = np.full(static_sequence.frames[0].shape, 0.5)
        held, center, score = track_step(state, blank)
        assert score == 0.0
        assert center == state.center
        assert held.bbox == state.bbox
        assert held.model is state.model
        assert held.frame_index == 1

        after, center, score = track_step(held, static_sequence.frames[1])
        assert center == static_sequence.centers[1]
        assert after.frame_index == 2
        return

    def test_closed_form_solver(self, static_sequence):
        params = TrackerParams(solver='mosse')
        state = init_tracker(static_sequence.frames[0], static_sequence.bbox, params)
        assert state.model.mask.is_identity
        assert state.model.mask.outer == (48, 48)
        assert state.admm is None

        state, center, score = track_step(state, static_sequence.frames[1])
        assert state.admm is None
        assert state.model.energies.count == pytest.approx(0.025 + 0.975 * 9)
        rec = run_sequence(static_sequence.frames, static_sequence.bbox, params, ground_truth=static_sequence.centers)
        assert len(rec) == 10
        assert all(np.isfinite(e) for e in rec.errors)
        return

    def test_bbox_clamped(self):
        assert clamp_bbox((-5, 190, 24, 24), (128, 192)) == (0, 168, 24, 24)
        assert clamp_bbox((110, 10, 24, 24), (128, 192)) == (104, 10, 24, 24)
        return

    def test_deterministic_record(self, sequence):
        a = run_sequence(sequence.frames[:15], sequence.bbox, ground_truth=sequence.centers[:15])
        b = run_sequence(sequence.frames[:15], sequence.bbox, ground_truth=sequence.centers[:15])
        assert a.centers == b.centers
        assert a.errors == b.errors
        assert a.psrs == b.psrs
        return

    def test_ground_truth_mismatch(self, sequence):
        with pytest.raises(InputError):
            run_sequence(sequence.frames[:5], sequence.bbox, ground_truth=sequence.centers[:3])
        with pytest.raises(InputError):
            run_sequence(sequence.frames[:3], sequence.bbox, ground_truth=sequence.centers[:5])
        return


class TestSequenceQuality(object):

    def test_precision(self, sequence):
        rec = run_sequence(sequence.frames, sequence.bbox, TrackerParams(), ground_truth=sequence.centers)
        curve = precision_curve(rec, [20.0])
        assert curve.points == [(20.0, 1.0)]
        assert curve.mean_error <= 1.0
        assert curve.fps == pytest.approx(len(rec) / sum(rec.times), rel=1e-2)
        return

    def test_iteration_budget(self, sequence):
        errors = {}
        for iters in (1, 4):
            rec = run_sequence(sequence.frames, sequence.bbox, TrackerParams(admm_iters=iters),
                               ground_truth=sequence.centers)
            errors[iters] = np.mean(rec.errors)
        assert errors[4] <= errors[1]
        return


class TestMetrics(object):

    def test_perfect(self):
        curve = precision_curve(record_with([0.0] * 5), [1.0, 5.0, 20.0])
        assert [f for _, f in curve.points] == [1.0, 1.0, 1.0]
        assert curve.mean_error == 0.0
        return

    def test_constant_offset(self):
        curve = precision_curve(record_with([25.0] * 8), [20.0, 30.0])
        assert curve.points == [(20.0, 0.0), (30.0, 1.0)]
        assert curve.mean_error == 25.0
        return

    def test_histogram(self):
        errors = list(np.random.default_rng(8).uniform(0, 50, 40))
        curve = precision_curve(record_with(errors), [10.0, 25.0, 40.0])
        for t, frac in curve.points:
            assert frac == sum(1 for e in errors if e <= t) / 40.0
        return

    def test_missing_truth(self):
        rec = TrackRecord()
        rec.append((1, 1), 5.0, 0.01)
        with pytest.raises(InputError):
            precision_curve(rec, [20.0])
        with pytest.raises(InputError):
            precision_curve(TrackRecord(), [20.0])
        return

    def test_rows(self):
        rows = record_with([3.0, 4.0]).to_rows()
        assert [r['frame'] for r in rows] == [0, 1]
        assert rows[1]['error'] == 4.0
        return


class TestFiles(object):

    def test_ground_truth(self):
        path = os.path.join(SANDBOX, 'gt.txt')
        with open(path, 'w') as fi:
            fi.write('# frame,row,col\n0,10,12,24,24\n1,11,14,24,24\n2,12,16,24,24\n')
        rows = read_ground_truth(path)
        assert len(rows) == 3
        assert (rows[2].row, rows[2].col) == (12.0, 16.0)
        assert rows[0].height == 24.0
        return

    def test_ground_truth_gaps(self):
        path = os.path.join(SANDBOX, 'gt_gap.txt')
        with open(path, 'w') as fi:
            fi.write('0,10,12\n2,11,14\n')
        with pytest.raises(InputError):
            read_ground_truth(path)
        with pytest.raises(InputError):
            read_ground_truth(os.path.join(SANDBOX, 'missing.txt'))
        return

    def test_numeric_frame_order(self):
        directory = os.path.join(SANDBOX, 'ordering')
        if not os.path.exists(directory):
            os.makedirs(directory)
        for idx in (10, 2, 1):
            write_pgm(os.path.join(directory, 'frame_{}.pgm'.format(idx)), np.zeros((4, 4)))
        names = [os.path.basename(p) for p in list_frames(directory)]
        assert names == ['frame_1.pgm', 'frame_2.pgm', 'frame_10.pgm']
        with pytest.raises(InputError):
            list_frames(os.path.join(SANDBOX, 'nowhere'))
        return
