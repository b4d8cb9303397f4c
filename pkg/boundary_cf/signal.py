# -*- coding: utf-8 -*-
#
# Real 2D signals: preprocessing, shifting, masking
#
# ------------------------------------------------


# imports
# -------
import math
from fractions import Fraction

import numpy as np
from PIL import Image
from scipy import ndimage

from .exceptions import DegenerateInputError, ShapeError, ParameterError, InputError


# helpers
# -------
def as_signal(s, name='signal'):
    """
    Coerce input into a finite, C-ordered float64 2D array. Every
    operation in the package funnels user input through here.
    """
    arr = np.ascontiguousarray(s, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ShapeError('`{}` must be a non-empty 2D array, got shape {}.'.format(name, arr.shape))
    if not np.all(np.isfinite(arr)):
        raise DegenerateInputError('`{}` contains non-finite samples.'.format(name))
    return arr


def as_shape(shape, name='shape'):
    try:
        h, w = (int(x) for x in shape)
    except (TypeError, ValueError):
        raise ShapeError('`{}` must be a (height, width) pair.'.format(name))
    if h <= 0 or w <= 0:
        raise ShapeError('`{}` must be positive, got {}.'.format(name, (h, w)))
    return h, w


# mask geometry
# -------------
class MaskSpec(object):
    """
    Placement of the D-sized filter support inside the T-sized
    training window. This is the masking matrix P stored as a
    rectangle: ``crop`` applies P and ``pad`` applies its transpose.

    Arguments:
        outer (tuple): Window shape ``(T_h, T_w)``.
        inner (tuple): Filter support shape ``(D_h, D_w)``.
        offset (tuple): Row/column of the support's top-left corner.
            Defaults to centering the support in the window.
    """

    def __init__(self, outer, inner=None, offset=None):
        self.outer = as_shape(outer, 'outer')
        self.inner = as_shape(inner if inner is not None else outer, 'inner')
        if offset is None:
            offset = ((self.outer[0] - self.inner[0]) // 2,
                      (self.outer[1] - self.inner[1]) // 2)
        self.offset = tuple(int(x) for x in offset)

        for T, D, o in zip(self.outer, self.inner, self.offset):
            if D > T:
                raise ShapeError('Filter support {} does not fit in window {}.'.format(self.inner, self.outer))
            if o < 0 or o + D > T:
                raise ShapeError('Support at offset {} leaves window {}.'.format(self.offset, self.outer))
        return

    @classmethod
    def identity(cls, shape):
        """
        Mask with support equal to the window (P = I).
        """
        return cls(shape, shape, (0, 0))

    @classmethod
    def centered(cls, outer, inner):
        return cls(outer, inner)

    @property
    def anchor(self):
        """
        Window coordinates of the filter centre. A pattern centred
        at window location p yields a raw correlation peak at lag
        p - anchor.
        """
        return (self.offset[0] + self.inner[0] // 2,
                self.offset[1] + self.inner[1] // 2)

    @property
    def outer_size(self):
        return self.outer[0] * self.outer[1]

    @property
    def inner_size(self):
        return self.inner[0] * self.inner[1]

    @property
    def is_identity(self):
        return self.inner == self.outer

    def slices(self):
        return (slice(self.offset[0], self.offset[0] + self.inner[0]),
                slice(self.offset[1], self.offset[1] + self.inner[1]))

    def __eq__(self, other):
        if not isinstance(other, MaskSpec):
            return NotImplemented
        return (self.outer, self.inner, self.offset) == (other.outer, other.inner, other.offset)

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash((self.outer, self.inner, self.offset))

    def __repr__(self):
        return 'MaskSpec(outer={}, inner={}, offset={})'.format(self.outer, self.inner, self.offset)


def crop(s, mask):
    """
    Extract the filter support from a window-sized signal (P x).
    """
    s = as_signal(s)
    if s.shape != mask.outer:
        raise ShapeError('crop expects shape {}, got {}.'.format(mask.outer, s.shape))
    return s[mask.slices()].copy()


def pad(s, mask):
    """
    Zero-pad a support-sized signal into the window (P^T h).
    """
    s = as_signal(s)
    if s.shape != mask.inner:
        raise ShapeError('pad expects shape {}, got {}.'.format(mask.inner, s.shape))
    out = np.zeros(mask.outer, dtype=np.float64)
    out[mask.slices()] = s
    return out


# shifts
# ------
def circular_shift(s, d):
    """
    Circularly shift a signal so that ``out[i, j] = s[i - dy, j - dx]``
    with indices taken modulo the signal shape.

    Arguments:
        s (array): Signal to shift.
        d (tuple): Shift ``(dy, dx)``; any integers are valid.
    """
    s = as_signal(s)
    dy, dx = (int(x) for x in d)
    return np.roll(s, (dy, dx), axis=(0, 1))


def unaffected_shift_count(T, D, offset=None):
    """
    Count the circular shifts of a length-T window whose cropped
    length-D support contains no wrapped-around sample. The count is
    T - D + 1 for every placement of the support.

    Arguments:
        T (int): Window length.
        D (int): Support length, ``1 <= D <= T``.
        offset (int): Support start; centred by default.
    """
    if not 1 <= D <= T:
        raise ParameterError('Need 1 <= D <= T, got D={}, T={}.'.format(D, T))
    if offset is None:
        offset = (T - D) // 2
    index = np.arange(T)
    count = 0
    for tau in range(T):
        taken = np.roll(index, -tau)[offset:offset + D]
        if np.all(np.diff(taken) == 1):
            count += 1
    if count != T - D + 1:
        raise AssertionError('Boundary count {} disagrees with T - D + 1 = {}.'.format(count, T - D + 1))
    return count


def boundary_fraction(T, D):
    """
    Exact proportion of training shifts unaffected by boundary effects.
    """
    return Fraction(unaffected_shift_count(T, D), T)


# preprocessing
# -------------
def power_normalize(s):
    """
    Rescale a signal to zero mean and unit (population) standard deviation.
    """
    s = as_signal(s)
    mean = s.mean()
    std = s.std()
    if std <= 1e-12 * max(1.0, abs(mean)):
        raise DegenerateInputError('Cannot power-normalize a constant signal.')
    return (s - mean) / std


def cosine_window(h, w):
    """
    Separable Hann window with zero-valued endpoints.
    """
    if int(h) < 2 or int(w) < 2:
        raise ParameterError('Cosine window needs both dimensions >= 2, got {}.'.format((h, w)))
    return np.outer(np.hanning(int(h)), np.hanning(int(w)))


def preprocess(s):
    """
    Power normalisation followed by the cosine window, applied to
    every training window and search image.
    """
    s = power_normalize(s)
    return s * cosine_window(*s.shape)


# responses
# ---------
def gaussian_response(h, w, center, sigma):
    """
    Gaussian bump ``exp(-d^2 / (2 sigma^2))`` peaking at ``center``.

    Arguments:
        h (int): Height in pixels.
        w (int): Width in pixels.
        center (tuple): Peak position ``(row, col)`` inside the grid.
        sigma (float): Standard deviation in pixels.
    """
    h, w = as_shape((h, w))
    r, c = (float(x) for x in center)
    if not (0 <= r <= h - 1 and 0 <= c <= w - 1):
        raise ParameterError('Response centre {} lies outside a {}x{} grid.'.format(center, h, w))
    if not sigma > 0:
        raise ParameterError('Response sigma must be positive, got {}.'.format(sigma))
    rows = (np.arange(h) - r) ** 2
    cols = (np.arange(w) - c) ** 2
    out = np.exp(-(rows[:, None] + cols[None, :]) / (2.0 * sigma ** 2))
    return np.maximum(out, np.finfo(np.float64).tiny)


def tracking_sigma(height, width):
    """
    Response width for an ``height x width`` target: sqrt(mn) / 16.
    """
    return math.sqrt(height * width) / 16.0


def desired_response(mask, target, sigma):
    """
    Training response for a target centred at window location
    ``target``: the Gaussian moved so it peaks at the lag the
    filter anchor will produce for that target.
    """
    out = gaussian_response(mask.outer[0], mask.outer[1], target, sigma)
    ar, ac = mask.anchor
    return circular_shift(out, (-ar, -ac))


# warping
# -------
def affine_warp(s, angle=0.0, scale=1.0, shift=(0.0, 0.0)):
    """
    Rotate (degrees), scale and translate a signal about its centre
    with bilinear resampling. Samples falling outside are taken from
    the nearest edge.
    """
    s = as_signal(s)
    theta = math.radians(angle)
    cos, sin = math.cos(theta), math.sin(theta)
    # output -> input mapping
    matrix = np.array([[cos, sin], [-sin, cos]]) / float(scale)
    center = (np.array(s.shape, dtype=np.float64) - 1.0) / 2.0
    offset = center - matrix.dot(center + np.asarray(shift, dtype=np.float64))
    return ndimage.affine_transform(s, matrix, offset=offset, order=1, mode='nearest')


def extract_window(frame, center, shape):
    """
    Cut a ``shape`` window centred on ``center`` out of a frame,
    replicating edge pixels where the window leaves the frame.
    """
    frame = as_signal(frame, 'frame')
    h, w = as_shape(shape)
    top = int(round(center[0])) - h // 2
    left = int(round(center[1])) - w // 2
    rows = np.clip(np.arange(top, top + h), 0, frame.shape[0] - 1)
    cols = np.clip(np.arange(left, left + w), 0, frame.shape[1] - 1)
    return frame[np.ix_(rows, cols)]


# io
# --
def read_image(path):
    """
    Read an 8-bit grayscale PGM (P5) or PNG image as samples in [0, 1].
    Colour inputs are converted to luminance.
    """
    try:
        with Image.open(path) as img:
            data = np.asarray(img.convert('L'), dtype=np.float64)
    except (IOError, OSError) as exc:
        raise InputError('Could not read image `{}`: {}'.format(path, exc))
    return data / 255.0


def write_pgm(path, s):
    """
    Write samples in [0, 1] as an 8-bit binary PGM.
    """
    s = as_signal(s)
    data = np.round(np.clip(s, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(data).save(path, format='PPM')
    return
