# -*- coding: utf-8 -*-
#
# DFT contract and spectral energies
#
# ------------------------------------------------


# imports
# -------
import numpy as np
from concurrent.futures import ThreadPoolExecutor

from .exceptions import DegenerateInputError, ShapeError, ParameterError, SymmetryError
from .signal import as_signal


# constants
# ---------
IMAG_TOLERANCE = 1e-8


# helpers
# -------
def as_spectrum(S, name='spectrum'):
    arr = np.ascontiguousarray(S, dtype=np.complex128)
    if arr.ndim != 2 or arr.size == 0:
        raise ShapeError('`{}` must be a non-empty 2D array, got shape {}.'.format(name, arr.shape))
    if not np.all(np.isfinite(arr)):
        raise DegenerateInputError('`{}` contains non-finite coefficients.'.format(name))
    return arr


# transforms
# ----------
def dft2(s):
    """
    Unnormalised forward 2D DFT. This equals the sqrt(D)-scaled
    orthonormal transform, so Parseval reads ``x.x = |X|^2 / D``.
    """
    return np.fft.fft2(as_signal(s))


def idft2(S, real=True):
    """
    Inverse of :func:`dft2` (carries the 1/D factor).

    Arguments:
        S (array): Spectrum to invert.
        real (bool): Return the real part, checking that the imaginary
            residual is below 1e-8 relative to the signal scale.
    """
    S = as_spectrum(S)
    out = np.fft.ifft2(S)
    if not real:
        return out
    scale = max(1.0, float(np.abs(out.real).max()))
    residual = float(np.abs(out.imag).max())
    if residual > IMAG_TOLERANCE * scale:
        raise SymmetryError(
            'Inverse transform has imaginary residual {:.3g}; '
            'the spectrum is not conjugate-symmetric.'.format(residual))
    return np.ascontiguousarray(out.real)


def naive_dft2(s):
    """
    Direct-summation DFT used as an independent reference in tests.
    """
    s = as_signal(s)
    h, w = s.shape
    rows = np.exp(-2j * np.pi * np.outer(np.arange(h), np.arange(h)) / h)
    cols = np.exp(-2j * np.pi * np.outer(np.arange(w), np.arange(w)) / w)
    return rows.dot(s).dot(cols)


def naive_correlation(x, h):
    """
    Circular cross-correlation ``r[t] = sum_k h[k] x[k + t]`` by
    explicit enumeration of every lag.
    """
    x = as_signal(x, 'x')
    h = as_signal(h, 'h')
    if x.shape != h.shape:
        raise ShapeError('Correlation operands differ in shape: {} vs {}.'.format(x.shape, h.shape))
    out = np.empty_like(x)
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            out[i, j] = np.sum(h * np.roll(x, (-i, -j), axis=(0, 1)))
    return out


def correlation_spectrum(x, h_padded):
    """
    Spectrum of the circular correlation of ``x`` with a window-sized
    filter: ``X o conj(H)``.
    """
    return dft2(x) * np.conj(dft2(h_padded))


# energies
# --------
class SpectralEnergies(object):
    """
    Accumulated auto- and cross-spectral energies of a training set,
    the sufficient statistics every solver consumes.

    Arguments:
        s_xx (array): Auto-spectral energy, real and non-negative.
        s_xy (array): Cross-spectral energy.
        count (float): Number of accumulated pairs. Online blending
            keeps this as an effective count.
        s_yy (float): Total response energy ``sum_i |Y_i|^2``, used to
            evaluate the training objective without the data.
    """

    def __init__(self, s_xx, s_xy, count, s_yy=0.0):
        s_xx = as_spectrum(s_xx, 's_xx')
        s_xy = as_spectrum(s_xy, 's_xy')
        if s_xx.shape != s_xy.shape:
            raise ShapeError('Energy spectra differ in shape: {} vs {}.'.format(s_xx.shape, s_xy.shape))
        scale = max(1.0, float(np.abs(s_xx.real).max()))
        if np.abs(s_xx.imag).max() > 1e-10 * scale or s_xx.real.min() < -1e-10 * scale:
            raise ParameterError('Auto-spectral energy must be real and non-negative.')
        self.s_xx = np.maximum(s_xx.real, 0.0).astype(np.complex128)
        self.s_xy = s_xy
        self.count = float(count)
        self.s_yy = float(s_yy)
        return

    @property
    def shape(self):
        return self.s_xx.shape

    def __add__(self, other):
        if self.shape != other.shape:
            raise ShapeError('Cannot merge energies of shape {} and {}.'.format(self.shape, other.shape))
        return SpectralEnergies(
            self.s_xx + other.s_xx,
            self.s_xy + other.s_xy,
            self.count + other.count,
            self.s_yy + other.s_yy,
        )

    def copy(self):
        return SpectralEnergies(self.s_xx.copy(), self.s_xy.copy(), self.count, self.s_yy)


def _pair_spectra(pair):
    x, y = pair
    xf = dft2(x)
    yf = dft2(y)
    return xf * np.conj(xf), yf * np.conj(xf), float(np.sum(np.abs(yf) ** 2))


def spectral_energies(xs, ys, workers=None):
    """
    Accumulate the auto- and cross-spectral energies of a training set.

    Per-pair transforms may run on a thread pool; the sums are always
    taken in input order so results are bit-reproducible.

    Arguments:
        xs (list): Training signals.
        ys (list): Desired responses, one per signal, same shape.
        workers (int): Threads used for the per-pair transforms.

    Returns:
        SpectralEnergies: ``s_xx = sum X o conj(X)``,
        ``s_xy = sum Y o conj(X)``.
    """
    xs, ys = list(xs), list(ys)
    if not xs:
        raise DegenerateInputError('Spectral energies need at least one training pair.')
    if len(xs) != len(ys):
        raise ShapeError('Got {} signals but {} responses.'.format(len(xs), len(ys)))
    xs = [as_signal(x, 'x') for x in xs]
    ys = [as_signal(y, 'y') for y in ys]
    shape = xs[0].shape
    for x, y in zip(xs, ys):
        if x.shape != shape or y.shape != shape:
            raise ShapeError('Training pairs must share shape {}.'.format(shape))

    pairs = list(zip(xs, ys))
    if workers and workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = list(pool.map(_pair_spectra, pairs))
    else:
        spectra = [_pair_spectra(p) for p in pairs]

    s_xx = np.zeros(shape, dtype=np.complex128)
    s_xy = np.zeros(shape, dtype=np.complex128)
    s_yy = 0.0
    for xx, xy, yy in spectra:
        s_xx += xx
        s_xy += xy
        s_yy += yy
    return SpectralEnergies(s_xx, s_xy, len(pairs), s_yy)


def online_update(energies, x, y, eta):
    """
    Exponential moving average of the energies with a new frame:
    ``s <- eta * s_new + (1 - eta) * s``.
    """
    if not 0.0 <= eta <= 1.0:
        raise ParameterError('Adaptation rate must lie in [0, 1], got {}.'.format(eta))
    frame = spectral_energies([x], [y])
    if frame.shape != energies.shape:
        raise ShapeError('Frame shape {} does not match energies {}.'.format(frame.shape, energies.shape))
    keep = 1.0 - eta
    return SpectralEnergies(
        eta * frame.s_xx + keep * energies.s_xx,
        eta * frame.s_xy + keep * energies.s_xy,
        eta + keep * energies.count,
        eta * frame.s_yy + keep * energies.s_yy,
    )
