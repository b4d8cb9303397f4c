# -*- coding: utf-8 -*-
#
# Filter estimators: closed form, spatial oracles, ADMM
#
# ------------------------------------------------


# imports
# -------
import io
import time
import struct
import logging
from collections import namedtuple

import numpy as np
from scipy import linalg

from .exceptions import (
    ParameterError, ShapeError, SizeGuardError, SingularProblemError,
    NonFiniteError, DivergenceError, DegenerateInputError, InputError,
)
from .signal import MaskSpec, as_signal, crop, pad
from .spectral import SpectralEnergies, spectral_energies, idft2


# config
# ------
logger = logging.getLogger(__name__)

ORACLE_MAX_ELEMENTS = 4096
DIVERGENCE_FACTOR = 10.0

# mean auto-spectral energy the ADMM iterations run at; the penalty
# schedule is read relative to it
ENERGY_LEVEL = 2e-2

MODEL_MAGIC = b'BCFM'
MODEL_VERSION = 1
MODEL_HEADER = struct.Struct('<4sHH6I3d')
FLAG_ENERGIES = 0x1


# spectral helpers
# ----------------
def filter_spectrum(h_padded):
    """
    Correlation-domain spectrum of a window-sized filter, conj(DFT(h)).
    Multiplying a signal spectrum by it yields the correlation output.
    """
    return np.conj(np.fft.fft2(h_padded))


def filter_from_spectrum(S):
    """
    Inverse of :func:`filter_spectrum`.
    """
    return idft2(np.conj(S))


def energy_scale(energies):
    """
    Divisor that brings the mean of ``s_xx`` to ``ENERGY_LEVEL``. The
    minimiser is unchanged when the energies and the ridge weight are
    divided by the same positive number, so the penalty schedule works
    the same for any data scale, window size or sample count.
    """
    level = float(np.mean(energies.s_xx.real))
    if not level > 0:
        return 1.0
    return level / ENERGY_LEVEL


def _check_finite(arr, subproblem):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError('Non-finite values produced by `{}`.'.format(subproblem), subproblem=subproblem)
    return arr


def _scaled(energies, kappa):
    return SpectralEnergies(
        energies.s_xx / kappa,
        energies.s_xy / kappa,
        energies.count,
        energies.s_yy / kappa,
    )


# types
# -----
class RegularizedProblem(object):
    """
    Masked ridge problem: training windows, desired responses,
    ridge weight and filter support.

    Arguments:
        xs (list): Training windows, all of the mask's outer shape.
        ys (list): Desired responses, same shape as the windows.
        lam (float): Ridge weight, strictly positive.
        mask (MaskSpec): Filter support; defaults to the full window.
    """

    def __init__(self, xs, ys, lam, mask=None):
        self.xs = [as_signal(x, 'x') for x in xs]
        self.ys = [as_signal(y, 'y') for y in ys]
        if not self.xs:
            raise DegenerateInputError('A training problem needs at least one pair.')
        if len(self.xs) != len(self.ys):
            raise ShapeError('Got {} signals but {} responses.'.format(len(self.xs), len(self.ys)))
        if mask is None:
            mask = MaskSpec.identity(self.xs[0].shape)
        for x, y in zip(self.xs, self.ys):
            if x.shape != mask.outer or y.shape != mask.outer:
                raise ShapeError('Training pairs must have the window shape {}.'.format(mask.outer))
        if not lam > 0:
            raise ParameterError('Ridge weight must be positive, got {}.'.format(lam))
        self.lam = float(lam)
        self.mask = mask
        self._energies = None
        return

    @property
    def count(self):
        return len(self.xs)

    def energies(self, workers=None):
        if self._energies is None:
            self._energies = spectral_energies(self.xs, self.ys, workers=workers)
        return self._energies


class AdmmParams(object):
    """
    Penalty schedule and stopping rule for the ADMM solver.

    Arguments:
        mu0 (float): Initial penalty.
        beta (float): Penalty growth factor, ``> 1``.
        mu_max (float): Penalty cap.
        max_iters (int): Iteration budget.
        rel_tol (float): Relative primal residual that ends the run.
    """

    def __init__(self, mu0=1e-2, beta=1.1, mu_max=20.0, max_iters=20, rel_tol=1e-3):
        self.mu0 = float(mu0)
        self.beta = float(beta)
        self.mu_max = float(mu_max)
        self.max_iters = int(max_iters)
        self.rel_tol = float(rel_tol)
        if not self.mu0 > 0 or not self.mu_max > 0:
            raise ParameterError('Penalties must be positive.')
        if self.mu0 > self.mu_max:
            raise ParameterError('mu0 ({}) exceeds mu_max ({}).'.format(self.mu0, self.mu_max))
        if not self.beta > 1:
            raise ParameterError('Penalty growth beta must exceed 1, got {}.'.format(self.beta))
        if self.max_iters < 1:
            raise ParameterError('max_iters must be positive.')
        if self.rel_tol < 0:
            raise ParameterError('rel_tol must be non-negative.')
        return

    @classmethod
    def tracking(cls, iters=4, **kwargs):
        """
        Fixed small budget used per frame by the tracker.
        """
        kwargs.setdefault('rel_tol', 0.0)
        return cls(max_iters=iters, **kwargs)

    def to_dict(self):
        return dict(mu0=self.mu0, beta=self.beta, mu_max=self.mu_max,
                    max_iters=self.max_iters, rel_tol=self.rel_tol)


IterationRecord = namedtuple('IterationRecord', ['iter', 'objective', 'residual', 'mu', 'time'])


class AdmmState(object):
    """
    Solver state after a run. ``zeta_hat`` is stored in unscaled
    energy units so it can warm-start a run on different energies.
    """

    def __init__(self, g_hat, h, zeta_hat, mu, trace=None, converged=False, precompute_time=0.0):
        self.g_hat = g_hat
        self.h = h
        self.zeta_hat = zeta_hat
        self.mu = mu
        self.trace = list(trace or [])
        self.converged = converged
        self.precompute_time = precompute_time
        return

    @property
    def iter(self):
        return len(self.trace)

    @property
    def residual(self):
        return self.trace[-1].residual if self.trace else float('inf')

    @property
    def objective(self):
        return self.trace[-1].objective if self.trace else float('nan')

    @property
    def iteration_time(self):
        if not self.trace:
            return 0.0
        return sum(r.time for r in self.trace) / len(self.trace)


class FilterModel(object):
    """
    Trained spatial filter with its padded spectrum and the energies
    needed for online adaptation.

    Arguments:
        h (array): Spatial filter of the mask's inner shape.
        energies (SpectralEnergies): Training energies over the window,
            or ``None`` for detection-only models.
        mask (MaskSpec): Support placement inside the window.
        lam (float): Ridge weight used in training.
    """

    def __init__(self, h, energies, mask, lam):
        h = as_signal(h, 'h')
        if h.shape != mask.inner:
            raise ShapeError('Filter shape {} does not match support {}.'.format(h.shape, mask.inner))
        if energies is not None and energies.shape != mask.outer:
            raise ShapeError('Energies shape {} does not match window {}.'.format(energies.shape, mask.outer))
        self.h = h
        self.mask = mask
        self.energies = energies
        self.lam = float(lam)
        self.h_hat_padded = np.fft.fft2(pad(h, mask))
        return

    @property
    def anchor(self):
        return self.mask.anchor

    def embed(self, shape, offset=None):
        """
        Re-pad the filter into a larger search image. The returned
        model has no energies and is only used for detection.
        """
        return FilterModel(self.h, None, MaskSpec(shape, self.mask.inner, offset), self.lam)

    def __repr__(self):
        return 'FilterModel(mask={}, lam={})'.format(self.mask, self.lam)


# objective
# ---------
def _objective_from_spectrum(energies, h_plain, h, size, lam):
    data = (energies.s_yy
            - 2.0 * float(np.sum(energies.s_xy * h_plain).real)
            + float(np.sum(energies.s_xx.real * np.abs(h_plain) ** 2)))
    return 0.5 * data / size + 0.5 * lam * float(np.sum(h ** 2))


def objective(energies, h, mask, lam):
    """
    Masked ridge objective

    .. math::

        E(h) = 1/2 \\sum_i \\sum_j (y_i(j) - h^T P x_i[\\tau_j])^2 + \\lambda/2 \\|h\\|^2

    evaluated from the energies in O(T log T), without the training data.
    """
    h = as_signal(h, 'h')
    h_plain = np.fft.fft2(pad(h, mask))
    return _objective_from_spectrum(energies, h_plain, h, mask.outer_size, lam)


def _shift_rows(x, mask, row):
    """
    Cropped circular shifts ``P x[tau]`` for every lag in one row of
    lags, as a ``(T_w, D)`` matrix.
    """
    Th, Tw = mask.outer
    Dh, Dw = mask.inner
    oy, ox = mask.offset
    rows = (np.arange(Dh)[None, :, None] + oy + row) % Th
    cols = (np.arange(Dw)[None, None, :] + ox + np.arange(Tw)[:, None, None]) % Tw
    rows = np.broadcast_to(rows, (Tw, Dh, Dw))
    return x[rows, cols].reshape(Tw, Dh * Dw)


def objective_by_enumeration(problem, h):
    """
    Masked ridge objective by explicit enumeration of every shift.
    """
    h = as_signal(h, 'h').ravel()
    total = 0.0
    for x, y in zip(problem.xs, problem.ys):
        for row in range(problem.mask.outer[0]):
            Z = _shift_rows(x, problem.mask, row)
            total += float(np.sum((y[row] - Z.dot(h)) ** 2))
    return 0.5 * total + 0.5 * problem.lam * float(h.dot(h))


def gradient(energies, h, mask, lam):
    """
    Gradient of :func:`objective` with respect to the spatial filter.
    """
    h = as_signal(h, 'h')
    h_plain = np.fft.fft2(pad(h, mask))
    full = idft2(energies.s_xx * h_plain - np.conj(energies.s_xy))
    return crop(full, mask) + lam * h


# closed form
# -----------
def mosse_train(xs, ys, lam, workers=None):
    """
    Closed-form frequency-domain ridge solution (T = D).

    Arguments:
        xs (list): Training signals.
        ys (list): Desired responses.
        lam (float): Ridge weight, strictly positive.

    Returns:
        FilterModel: Filter whose spectrum is
        ``conj(s_xy / (s_xx + lam))``.
    """
    if not lam > 0:
        raise ParameterError('Ridge weight must be positive, got {}.'.format(lam))
    return mosse_from_energies(spectral_energies(xs, ys, workers=workers), lam)


def mosse_from_energies(energies, lam):
    """
    Closed-form filter from accumulated energies, used when the
    support covers the whole window.
    """
    if not lam > 0:
        raise ParameterError('Ridge weight must be positive, got {}.'.format(lam))
    quotient = energies.s_xy / (energies.s_xx + lam)
    h = _check_finite(filter_from_spectrum(quotient), 'mosse')
    return FilterModel(h, energies, MaskSpec.identity(energies.shape), lam)


# oracles
# -------
def _solve_normal_equations(xs, ys, mask, lam):
    size = mask.inner_size
    if size > ORACLE_MAX_ELEMENTS:
        raise SizeGuardError('Spatial oracle limited to {} filter elements, got {}.'.format(ORACLE_MAX_ELEMENTS, size))

    H = lam * np.eye(size)
    b = np.zeros(size)
    for x, y in zip(xs, ys):
        for row in range(mask.outer[0]):
            Z = _shift_rows(x, mask, row)
            H += Z.T.dot(Z)
            b += Z.T.dot(y[row])

    try:
        factor = linalg.cho_factor(H)
    except linalg.LinAlgError:
        raise SingularProblemError('Normal matrix is not positive definite.')
    diag = np.abs(np.diag(factor[0]))
    if diag.min() <= 1e-7 * diag.max():
        raise SingularProblemError('Normal matrix is numerically singular.')
    return linalg.cho_solve(factor, b).reshape(mask.inner)


def spatial_ridge_oracle(xs, ys, lam):
    """
    Exact spatial ridge solution over all D circular shifts, by
    forming and factoring the D x D normal matrix.
    """
    xs = [as_signal(x, 'x') for x in xs]
    ys = [as_signal(y, 'y') for y in ys]
    if not xs or len(xs) != len(ys):
        raise ShapeError('Need matching, non-empty signal and response lists.')
    if lam < 0:
        raise ParameterError('Ridge weight must be non-negative, got {}.'.format(lam))
    mask = MaskSpec.identity(xs[0].shape)
    for x, y in zip(xs, ys):
        if x.shape != mask.outer or y.shape != mask.outer:
            raise ShapeError('Training pairs must share shape {}.'.format(mask.outer))
    return _solve_normal_equations(xs, ys, mask, float(lam))


def masked_spatial_oracle(problem):
    """
    Exact minimiser of the masked objective, summing over all T
    cropped circular shifts of every training window.
    """
    return _solve_normal_equations(problem.xs, problem.ys, problem.mask, problem.lam)


# admm subproblems
# ----------------
def solve_g(energies, h_hat, zeta_hat, mu):
    """
    Frequency-domain subproblem:
    ``g = (s_xy + mu h - zeta) / (s_xx + mu)`` elementwise.
    """
    if not mu > 0:
        raise ParameterError('Penalty must be positive, got {}.'.format(mu))
    if h_hat.shape != energies.shape or zeta_hat.shape != energies.shape:
        raise ShapeError('Subproblem operands must have shape {}.'.format(energies.shape))
    return (energies.s_xy + mu * h_hat - zeta_hat) / (energies.s_xx + mu)


def solve_h(g, l, lam, mu, mask):
    """
    Spatial subproblem: ``h = (mu g + l) / (mu + lam)``, where ``g`` and
    ``l`` are the cropped inverse transforms of the auxiliary variable
    and the multiplier.
    """
    denom = mu + lam
    if not denom > 0:
        raise ParameterError('Spatial subproblem needs mu + lambda > 0, got {}.'.format(denom))
    if g.shape != mask.inner or l.shape != mask.inner:
        raise ShapeError('Spatial subproblem operands must have shape {}.'.format(mask.inner))
    return (mu * g + l) / denom


def multiplier_update(zeta_hat, g_hat, h_hat, mu):
    if not (zeta_hat.shape == g_hat.shape == h_hat.shape):
        raise ShapeError('Multiplier operands differ in shape.')
    return zeta_hat + mu * (g_hat - h_hat)


def penalty_update(mu, params):
    if not mu > 0:
        raise ParameterError('Penalty must be positive, got {}.'.format(mu))
    return min(params.mu_max, params.beta * mu)


def augmented_lagrangian(energies, g_hat, h, zeta_hat, mu, lam, mask):
    """
    Augmented Lagrangian of the constrained frequency objective, in the
    units of ``energies``. Its stationary points in ``g_hat`` and ``h``
    are :func:`solve_g` and :func:`solve_h`.
    """
    h_hat = filter_spectrum(pad(h, mask))
    data = (energies.s_yy
            - 2.0 * float(np.sum(np.conj(energies.s_xy) * g_hat).real)
            + float(np.sum(energies.s_xx.real * np.abs(g_hat) ** 2)))
    diff = g_hat - h_hat
    return (0.5 * data
            + 0.5 * lam * float(np.sum(np.abs(h_hat) ** 2))
            + float(np.sum(np.conj(zeta_hat) * diff).real)
            + 0.5 * mu * float(np.sum(np.abs(diff) ** 2)))


def lagrangian_g(energies, g_hat, h_hat, zeta_hat, mu):
    """
    Terms of the augmented Lagrangian that depend on ``g_hat``, for a
    fixed correlation-domain filter spectrum ``h_hat``.
    """
    data = (energies.s_yy
            - 2.0 * float(np.sum(np.conj(energies.s_xy) * g_hat).real)
            + float(np.sum(energies.s_xx.real * np.abs(g_hat) ** 2)))
    diff = g_hat - h_hat
    return (0.5 * data
            + float(np.sum(np.conj(zeta_hat) * diff).real)
            + 0.5 * mu * float(np.sum(np.abs(diff) ** 2)))


def lagrangian_h(g_hat, zeta_hat, h, mu, lam, mask):
    """
    Terms of the augmented Lagrangian that depend on the spatial filter.
    """
    h_hat = filter_spectrum(pad(h, mask))
    diff = g_hat - h_hat
    return (0.5 * lam * float(np.sum(np.abs(h_hat) ** 2))
            + float(np.sum(np.conj(zeta_hat) * diff).real)
            + 0.5 * mu * float(np.sum(np.abs(diff) ** 2)))


# admm
# ----
def train_from_energies(energies, mask, lam, params=None, warm=None):
    """
    Run the ADMM iterations on precomputed energies. Each iteration
    costs three FFTs over the window and never touches the training
    data.

    Arguments:
        energies (SpectralEnergies): Energies over the window.
        mask (MaskSpec): Filter support.
        lam (float): Ridge weight.
        params (AdmmParams): Schedule and stopping rule.
        warm (AdmmState): Previous state to start from. A cold start
            uses h = 0 and l = 0.

    Returns:
        tuple: ``(FilterModel, AdmmState)``.
    """
    params = params or AdmmParams()
    if not lam > 0:
        raise ParameterError('Ridge weight must be positive, got {}.'.format(lam))
    if energies.shape != mask.outer:
        raise ShapeError('Energies shape {} does not match window {}.'.format(energies.shape, mask.outer))

    size = mask.outer_size
    kappa = energy_scale(energies)
    scaled = _scaled(energies, kappa)
    lam_scaled = lam / kappa

    if warm is not None:
        h = as_signal(warm.h, 'h').copy()
        zeta_hat = np.asarray(warm.zeta_hat, dtype=np.complex128) / kappa
    else:
        h = np.zeros(mask.inner)
        zeta_hat = np.zeros(mask.outer, dtype=np.complex128)
    h_hat = filter_spectrum(pad(h, mask))
    g_hat = h_hat
    mu = params.mu0
    trace = []
    converged = False

    for it in range(1, params.max_iters + 1):
        start = time.perf_counter()

        g_hat = _check_finite(solve_g(scaled, h_hat, zeta_hat, mu), 'solve_g')
        g = crop(filter_from_spectrum(g_hat), mask)
        l = crop(filter_from_spectrum(zeta_hat), mask)
        h = _check_finite(solve_h(g, l, lam_scaled, mu, mask), 'solve_h')
        h_hat = filter_spectrum(pad(h, mask))
        zeta_hat = _check_finite(multiplier_update(zeta_hat, g_hat, h_hat, mu), 'multiplier_update')
        used_mu = mu
        mu = penalty_update(mu, params)

        norm = max(np.linalg.norm(g_hat), np.linalg.norm(h_hat))
        residual = float(np.linalg.norm(g_hat - h_hat) / norm) if norm > 0 else 0.0
        value = _objective_from_spectrum(energies, np.conj(h_hat), h, size, lam)
        trace.append(IterationRecord(it, value, residual, used_mu, time.perf_counter() - start))
        logger.debug('admm iter=%d objective=%.6g residual=%.3g mu=%.4g', it, value, residual, used_mu)

        if residual <= params.rel_tol:
            converged = True
            break

    model = FilterModel(h, energies, mask, lam)
    state = AdmmState(g_hat, h, zeta_hat * kappa, mu, trace=trace, converged=converged)
    return model, state


def cflb_admm_train(problem, params=None, warm=None, workers=None):
    """
    Train a boundary-limited correlation filter with ADMM.

    Energies are accumulated once, then the solver alternates the
    frequency subproblem, the spatial subproblem, the multiplier update
    and the penalty update until the relative primal residual drops
    below ``params.rel_tol`` or the budget runs out.

    Arguments:
        problem (RegularizedProblem): Training problem.
        params (AdmmParams): Schedule and stopping rule.
        warm (AdmmState): Optional warm start.

    Returns:
        tuple: ``(FilterModel, AdmmState)``.
    """
    start = time.perf_counter()
    energies = problem.energies(workers=workers)
    precompute = time.perf_counter() - start
    model, state = train_from_energies(energies, problem.mask, problem.lam, params=params, warm=warm)
    state.precompute_time = precompute
    logger.debug('admm finished iters=%d converged=%s objective=%.6g',
                 state.iter, state.converged, state.objective)
    return model, state


# reference optimizer
# -------------------
def gradient_descent_train(problem, step=None, iters=500, target=None):
    """
    Plain gradient descent on the masked objective, kept as a
    reference for convergence comparisons.

    Arguments:
        problem (RegularizedProblem): Training problem.
        step (float): Step size; defaults to 1 / (max s_xx + lambda).
        iters (int): Iteration budget.
        target (float): Stop once the objective drops to this value.

    Returns:
        tuple: ``(h, trace)`` with the objective at every iterate,
        starting from h = 0.
    """
    energies = problem.energies()
    mask, lam = problem.mask, problem.lam
    if step is None:
        step = 1.0 / (float(energies.s_xx.real.max()) + lam)
    if not step > 0:
        raise ParameterError('Step size must be positive, got {}.'.format(step))

    h = np.zeros(mask.inner)
    trace = [objective(energies, h, mask, lam)]
    bound = DIVERGENCE_FACTOR * max(abs(trace[0]), np.finfo(np.float64).tiny)
    for _ in range(int(iters)):
        h = h - step * gradient(energies, h, mask, lam)
        value = objective(energies, h, mask, lam)
        trace.append(value)
        if not np.isfinite(value) or value > bound:
            raise DivergenceError('Gradient descent diverged after {} iterations.'.format(len(trace) - 1), trace=trace)
        if target is not None and value <= target:
            break
    return h, trace


# serialization
# -------------
def save_model(target, model):
    """
    Write a model to the binary container.

    Layout (little-endian): header ``<4sHH6I3d`` holding the magic
    ``BCFM``, format version, flags, window shape, support shape,
    support offset, lambda, energy count and response energy; then the
    filter as float64 row-major; then, when flag bit 0 is set, the
    auto- and cross-spectral energies as interleaved real/imag float64.
    """
    flags = FLAG_ENERGIES if model.energies is not None else 0
    e = model.energies
    header = MODEL_HEADER.pack(
        MODEL_MAGIC, MODEL_VERSION, flags,
        model.mask.outer[0], model.mask.outer[1],
        model.mask.inner[0], model.mask.inner[1],
        model.mask.offset[0], model.mask.offset[1],
        model.lam,
        e.count if e is not None else 0.0,
        e.s_yy if e is not None else 0.0,
    )
    chunks = [header, np.asarray(model.h, dtype='<f8').tobytes()]
    if e is not None:
        chunks.append(np.asarray(e.s_xx, dtype='<c16').tobytes())
        chunks.append(np.asarray(e.s_xy, dtype='<c16').tobytes())
    payload = b''.join(chunks)

    if isinstance(target, (str, bytes)) or hasattr(target, '__fspath__'):
        try:
            with open(target, 'wb') as fi:
                fi.write(payload)
        except (IOError, OSError) as exc:
            raise InputError('Could not write model `{}`: {}'.format(target, exc))
    else:
        target.write(payload)
    return


def load_model(source):
    """
    Read a model written by :func:`save_model`.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, '__fspath__'):
        try:
            with open(source, 'rb') as fi:
                payload = fi.read()
        except (IOError, OSError) as exc:
            raise InputError('Could not read model `{}`: {}'.format(source, exc))
    else:
        payload = source.read()

    stream = io.BytesIO(payload)
    head = stream.read(MODEL_HEADER.size)
    if len(head) != MODEL_HEADER.size:
        raise InputError('Model file is truncated.')
    magic, version, flags, Th, Tw, Dh, Dw, oy, ox, lam, count, s_yy = MODEL_HEADER.unpack(head)
    if magic != MODEL_MAGIC:
        raise InputError('Not a filter model file.')
    if version != MODEL_VERSION:
        raise InputError('Unsupported model version {}.'.format(version))

    def _read(n, dtype):
        raw = stream.read(n * np.dtype(dtype).itemsize)
        if len(raw) != n * np.dtype(dtype).itemsize:
            raise InputError('Model file is truncated.')
        return np.frombuffer(raw, dtype=dtype).astype(np.dtype(dtype).newbyteorder('='))

    mask = MaskSpec((Th, Tw), (Dh, Dw), (oy, ox))
    h = _read(Dh * Dw, '<f8').reshape(Dh, Dw)
    energies = None
    if flags & FLAG_ENERGIES:
        s_xx = _read(Th * Tw, '<c16').reshape(Th, Tw)
        s_xy = _read(Th * Tw, '<c16').reshape(Th, Tw)
        energies = SpectralEnergies(s_xx, s_xy, count, s_yy)
    return FilterModel(h, energies, mask, lam)
