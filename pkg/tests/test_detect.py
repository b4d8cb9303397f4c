# -*- coding: utf-8 -*-
#
# Testing for response maps and localisation scores.
#
# ------------------------------------------------


# imports
# -------
import math
import pytest
import numpy as np

from boundary_cf.exceptions import ShapeError, DegenerateInputError
from boundary_cf.signal import MaskSpec, pad, circular_shift, power_normalize
from boundary_cf.spectral import naive_correlation
from boundary_cf.solvers import FilterModel
from boundary_cf.detect import ResponseMap, correlate, locate, psr, normalized_distance


# helpers
# -------
def model_for(h, shape, offset=(0, 0)):
    return FilterModel(h, None, MaskSpec(shape, h.shape, offset), 0.1)


# session
# -------
class TestCorrelate(object):

    def test_impulse_filter(self):
        h = np.zeros((8, 8))
        h[0, 0] = 1.0
        image = np.random.default_rng(0).standard_normal((8, 8))
        r = correlate(model_for(h, (8, 8)), image)
        assert np.allclose(r.response, image)
        return

    def test_matched_peak(self):
        h = power_normalize(np.random.default_rng(1).standard_normal((5, 5)))
        mask = MaskSpec((16, 16), (5, 5), (0, 0))
        for d in [(0, 0), (3, 7), (15, 1)]:
            image = circular_shift(pad(h, mask), d)
            r = correlate(model_for(h, (16, 16)), image)
            assert r.peak_loc == d
        return

    def test_matches_direct_sum(self):
        rng = np.random.default_rng(2)
        h, image = rng.standard_normal((8, 8)), rng.standard_normal((8, 8))
        r = correlate(model_for(h, (8, 8)), image)
        assert np.abs(r.response - naive_correlation(image, h)).max() <= 1e-8
        return

    def test_shift_equivariance(self):
        rng = np.random.default_rng(3)
        model = model_for(rng.standard_normal((4, 4)), (12, 10), (2, 3))
        image = rng.standard_normal((12, 10))
        base = correlate(model, image).peak_loc
        for d in [(1, 0), (5, 9), (-3, 4)]:
            moved = correlate(model, circular_shift(image, d)).peak_loc
            assert moved == ((base[0] + d[0]) % 12, (base[1] + d[1]) % 10)
        return

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            correlate(model_for(np.ones((4, 4)), (8, 8)), np.ones((8, 9)))
        return


class TestLocate(object):

    def test_first_maximum(self):
        r = ResponseMap(np.array([[0.0, 2.0], [2.0, 1.0]]))
        assert r.peak_loc == (0, 1)
        assert r.peak_value == 2.0
        return

    def test_anchor_mapping(self):
        rng = np.random.default_rng(4)
        h = power_normalize(rng.standard_normal((6, 6)))
        model = model_for(h, (20, 20), (7, 7))
        image = np.zeros((20, 20))
        image[9:15, 4:10] = h
        found = locate(correlate(model, image), model)
        assert found == (12, 7)
        return


class TestScores(object):

    def test_psr_delta(self):
        field = np.zeros((64, 64))
        field[::7, ::5] = 0.1
        field[30, 30] = 1.0
        r = ResponseMap(field)
        keep = np.ones(field.shape, dtype=bool)
        keep[25:36, 25:36] = False
        side = field[keep]
        assert psr(r, 5) == pytest.approx((1.0 - side.mean()) / side.std())
        return

    def test_psr_constant(self):
        with pytest.raises(DegenerateInputError):
            psr(ResponseMap(np.ones((16, 16))))
        return

    def test_psr_affine_invariance(self):
        field = np.random.default_rng(5).standard_normal((32, 32))
        base = psr(ResponseMap(field))
        assert psr(ResponseMap(3.0 * field + 7.0)) == pytest.approx(base)
        return

    def test_psr_decreases_with_noise(self):
        rng = np.random.default_rng(6)
        noise = rng.standard_normal((64, 64))
        field = np.zeros((64, 64))
        field[32, 32] = 1.0
        values = [psr(ResponseMap(field + a * noise)) for a in [0.01, 0.02, 0.05, 0.1]]
        assert all(a > b for a, b in zip(values, values[1:]))
        return

    def test_normalized_distance(self):
        right, left = (40, 96), (40, 32)
        assert normalized_distance(right, right, left) == 0.0
        assert normalized_distance(left, right, left) == 1.0
        assert normalized_distance((40, 64), right, left) == 0.5
        with pytest.raises(DegenerateInputError):
            normalized_distance((0, 0), right, right)
        return

    def test_distance_invariance(self):
        pred, right, left = (10.0, 4.0), (3.0, 2.0), (7.0, 9.0)
        base = normalized_distance(pred, right, left)
        theta, scale, shift = 0.7, 2.5, np.array([11.0, -4.0])
        rot = scale * np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        moved = [tuple(rot.dot(p) + shift) for p in (pred, right, left)]
        assert normalized_distance(*moved) == pytest.approx(base)
        return
