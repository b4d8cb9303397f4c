# -*- coding: utf-8 -*-
#
# Testing for signal preprocessing and mask geometry.
#
# ------------------------------------------------


# imports
# -------
import os
import pytest
import numpy as np
from fractions import Fraction

from boundary_cf.exceptions import DegenerateInputError, ShapeError, ParameterError, InputError
from boundary_cf.signal import (
    MaskSpec, circular_shift, crop, pad, unaffected_shift_count, boundary_fraction,
    power_normalize, cosine_window, preprocess, gaussian_response, desired_response,
    tracking_sigma, affine_warp, extract_window, read_image, write_pgm,
)

from . import SANDBOX


# session
# -------
class TestShifts(object):

    def test_shift_moves_samples(self):
        s = np.arange(12.0).reshape(3, 4)
        out = circular_shift(s, (1, 2))
        assert out[1, 2] == s[0, 0]
        assert out[0, 0] == s[2, 2]
        return

    def test_shift_by_shape_is_identity(self):
        s = np.random.default_rng(0).standard_normal((5, 7))
        assert np.array_equal(circular_shift(s, (5, 7)), s)
        assert np.array_equal(circular_shift(s, (-10, 14)), s)
        return

    def test_shifts_compose(self):
        s = np.random.default_rng(1).standard_normal((6, 6))
        once = circular_shift(circular_shift(s, (2, -1)), (-3, 4))
        assert np.array_equal(once, circular_shift(s, (-1, 3)))
        return

    def test_unaffected_count_matches_formula(self):
        for T in range(1, 65):
            for D in range(1, T + 1):
                assert unaffected_shift_count(T, D) == T - D + 1
        return

    def test_boundary_fraction(self):
        assert boundary_fraction(4, 2) == Fraction(3, 4)
        assert boundary_fraction(64, 64) == Fraction(1, 64)
        assert boundary_fraction(128, 64) == Fraction(65, 128)
        with pytest.raises(ParameterError):
            boundary_fraction(4, 5)
        return


class TestMask(object):

    def test_centred_default(self):
        mask = MaskSpec((16, 16), (8, 8))
        assert mask.offset == (4, 4)
        assert mask.anchor == (8, 8)
        assert not mask.is_identity
        assert MaskSpec.identity((5, 3)).is_identity
        assert MaskSpec.centered((9, 7), (3, 3)).offset == (3, 2)
        return

    def test_crop_pad(self):
        mask = MaskSpec((6, 8), (2, 3), (1, 4))
        h = np.arange(6.0).reshape(2, 3)
        padded = pad(h, mask)
        assert padded.shape == (6, 8)
        assert padded.sum() == h.sum()
        assert padded[1, 4] == 0 and padded[2, 6] == 5
        assert np.array_equal(crop(padded, mask), h)
        return

    def test_crop_pad_adjoint(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            outer = tuple(int(v) for v in rng.integers(3, 20, size=2))
            inner = tuple(int(rng.integers(1, t + 1)) for t in outer)
            offset = tuple(int(rng.integers(0, t - d + 1)) for t, d in zip(outer, inner))
            mask = MaskSpec(outer, inner, offset)
            x = rng.standard_normal(outer)
            h = rng.standard_normal(inner)
            lhs = float(np.sum(crop(x, mask) * h))
            rhs = float(np.sum(x * pad(h, mask)))
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))
            assert np.array_equal(crop(pad(h, mask), mask), h)
        return

    def test_crop_pad_small(self):
        rng = np.random.default_rng(8)
        for outer in [(3, 3), (5, 4), (9, 9)]:
            mask = MaskSpec(outer, (3, 3))
            h = rng.standard_normal((3, 3))
            assert np.array_equal(crop(pad(h, mask), mask), h)
        return

    def test_invalid_geometry(self):
        with pytest.raises(ShapeError):
            MaskSpec((4, 4), (5, 4))
        with pytest.raises(ShapeError):
            MaskSpec((4, 4), (2, 2), (3, 0))
        with pytest.raises(ShapeError):
            crop(np.zeros((3, 3)), MaskSpec((4, 4), (2, 2)))
        with pytest.raises(ShapeError):
            pad(np.zeros((3, 3)), MaskSpec((4, 4), (2, 2)))
        return

    def test_equality(self):
        assert MaskSpec((8, 8), (4, 4)) == MaskSpec((8, 8), (4, 4), (2, 2))
        assert MaskSpec((8, 8), (4, 4)) != MaskSpec((8, 8), (4, 4), (0, 0))
        assert len({MaskSpec((8, 8), (4, 4)), MaskSpec((8, 8), (4, 4), (2, 2))}) == 1
        return


class TestPreprocessing(object):

    def test_power_normalize(self):
        s = np.random.default_rng(2).uniform(3, 9, (10, 12))
        out = power_normalize(s)
        assert abs(out.mean()) < 1e-12
        assert abs(out.std() - 1.0) < 1e-12
        assert np.allclose(power_normalize(5.0 * s - 2.0), out)
        return

    def test_power_normalize_idempotent(self):
        rng = np.random.default_rng(9)
        for shape in [(2, 2), (6, 11), (32, 32)]:
            once = power_normalize(rng.uniform(-4, 7, shape))
            assert np.abs(power_normalize(once) - once).max() <= 1e-12
        return

    def test_power_normalize_constant(self):
        with pytest.raises(DegenerateInputError):
            power_normalize(np.full((4, 4), 3.0))
        return

    def test_non_finite(self):
        s = np.zeros((3, 3))
        s[1, 1] = np.nan
        with pytest.raises(DegenerateInputError):
            power_normalize(s)
        return

    def test_cosine_window(self):
        w = cosine_window(9, 5)
        assert w.shape == (9, 5)
        assert w[0].max() == 0 and w[:, -1].max() == 0
        assert w[4, 2] == pytest.approx(1.0)
        assert np.allclose(w, w[::-1, ::-1])
        with pytest.raises(ParameterError):
            cosine_window(1, 5)
        return

    def test_preprocess_zero_border(self):
        out = preprocess(np.random.default_rng(3).standard_normal((8, 8)))
        assert np.all(out[0] == 0) and np.all(out[:, 0] == 0)
        return


class TestResponses(object):

    def test_gaussian_peak(self):
        g = gaussian_response(11, 9, (5, 4), 2.0)
        assert g.max() == g[5, 4] == 1.0
        assert g.min() > 0
        assert g[5, 6] == pytest.approx(np.exp(-0.5))
        return

    def test_gaussian_errors(self):
        with pytest.raises(ParameterError):
            gaussian_response(8, 8, (8, 0), 1.0)
        with pytest.raises(ParameterError):
            gaussian_response(8, 8, (4, 4), 0.0)
        return

    def test_desired_response_anchor(self):
        mask = MaskSpec((16, 16), (8, 8))
        y = desired_response(mask, (10, 6), 1.5)
        peak = np.unravel_index(np.argmax(y), y.shape)
        assert peak == ((10 - 8) % 16, (6 - 8) % 16)
        return

    def test_tracking_sigma(self):
        assert tracking_sigma(16, 16) == 1.0
        assert tracking_sigma(32, 8) == 1.0
        return


class TestGeometry(object):

    def test_identity_warp(self):
        s = np.random.default_rng(4).standard_normal((12, 10))
        assert np.allclose(affine_warp(s), s)
        return

    def test_translation_warp(self):
        s = np.zeros((9, 9))
        s[4, 4] = 1.0
        out = affine_warp(s, shift=(2, -1))
        assert out[6, 3] == pytest.approx(1.0)
        return

    def test_extract_window(self):
        frame = np.arange(25.0).reshape(5, 5)
        win = extract_window(frame, (2, 2), (3, 3))
        assert np.array_equal(win, frame[1:4, 1:4])
        edge = extract_window(frame, (0, 0), (4, 4))
        assert edge.shape == (4, 4)
        assert edge[0, 0] == frame[0, 0] and edge[3, 3] == frame[1, 1]
        return


class TestImages(object):

    def test_pgm_round_trip(self):
        path = os.path.join(SANDBOX, 'roundtrip.pgm')
        s = np.random.default_rng(5).uniform(0, 1, (7, 9))
        write_pgm(path, s)
        with open(path, 'rb') as fi:
            assert fi.read(2) == b'P5'
        back = read_image(path)
        assert back.shape == s.shape
        assert np.abs(back - s).max() <= 0.5 / 255 + 1e-12
        return

    def test_missing_image(self):
        with pytest.raises(InputError):
            read_image(os.path.join(SANDBOX, 'missing.pgm'))
        return
