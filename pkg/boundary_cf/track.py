# -*- coding: utf-8 -*-
#
# Online tracking with adaptive boundary-limited filters
#
# ------------------------------------------------


# imports
# -------
import os
import re
import csv
import math
import time
import logging
from collections import namedtuple

import numpy as np

from .exceptions import ParameterError, DegenerateInputError, InputError
from .signal import (
    MaskSpec, as_signal, preprocess, extract_window, affine_warp,
    desired_response, tracking_sigma,
)
from .spectral import spectral_energies, online_update
from .solvers import AdmmParams, train_from_energies, mosse_from_energies
from .detect import correlate, locate, psr


# config
# ------
logger = logging.getLogger(__name__)

FRAME_EXTENSIONS = ('.pgm', '.png')
SOLVERS = ('cflb', 'mosse')


# types
# -----
class TrackerParams(object):
    """
    Tracker settings.

    Arguments:
        eta (float): Adaptation rate in [0, 1].
        lam (float): Ridge weight.
        admm_iters (int): ADMM iterations per solve.
        search_scale (float): Search window size relative to the
            target, per axis, at least 1.
        init_perturbations (int): Warped exemplars added at start.
        seed (int): Seed for the perturbation generator.
        max_rotation (float): Rotation range in degrees.
        scale_range (tuple): Isotropic scale range.
        max_translation (float): Translation range in pixels.
        psr_radius (int): Exclusion radius used for PSR.
        mu0 (float): Initial ADMM penalty, restarted for every solve.
        solver (str): ``cflb`` for a target-sized support solved with
            ADMM, ``mosse`` for a window-sized filter in closed form.
    """

    def __init__(self, eta=0.025, lam=1e-2, admm_iters=4, search_scale=2.0,
                 init_perturbations=8, seed=0, max_rotation=5.0,
                 scale_range=(0.95, 1.05), max_translation=2.0, psr_radius=5,
                 mu0=1e-2, solver='cflb'):
        self.eta = float(eta)
        self.lam = float(lam)
        self.admm_iters = int(admm_iters)
        self.search_scale = float(search_scale)
        self.init_perturbations = int(init_perturbations)
        self.seed = int(seed)
        self.max_rotation = float(max_rotation)
        self.scale_range = tuple(float(x) for x in scale_range)
        self.max_translation = float(max_translation)
        self.psr_radius = int(psr_radius)
        self.mu0 = float(mu0)
        self.solver = str(solver)

        if not 0.0 <= self.eta <= 1.0:
            raise ParameterError('Adaptation rate must lie in [0, 1], got {}.'.format(self.eta))
        if not self.lam > 0:
            raise ParameterError('Ridge weight must be positive, got {}.'.format(self.lam))
        if self.search_scale < 1.0:
            raise ParameterError('search_scale must be at least 1, got {}.'.format(self.search_scale))
        if self.init_perturbations < 0:
            raise ParameterError('init_perturbations must be non-negative.')
        if self.admm_iters < 1:
            raise ParameterError('admm_iters must be positive.')
        if self.solver not in SOLVERS:
            raise ParameterError('Unknown tracking solver `{}`.'.format(self.solver))
        return

    @property
    def admm(self):
        return AdmmParams.tracking(self.admm_iters, mu0=self.mu0)

    def to_dict(self):
        return dict(
            eta=self.eta, lam=self.lam, admm_iters=self.admm_iters,
            search_scale=self.search_scale, init_perturbations=self.init_perturbations,
            seed=self.seed, max_rotation=self.max_rotation,
            scale_range=list(self.scale_range), max_translation=self.max_translation,
            psr_radius=self.psr_radius, mu0=self.mu0, solver=self.solver,
        )


class TrackerState(object):
    """
    Per-sequence tracker state. ``bbox`` is ``(top, left, height, width)``
    in frame coordinates.
    """

    def __init__(self, model, bbox, frame_index, last_psr, admm, params, sigma, response=None):
        self.model = model
        self.bbox = bbox
        self.frame_index = frame_index
        self.last_psr = last_psr
        self.admm = admm
        self.params = params
        self.sigma = sigma
        self.response = response
        return

    @property
    def center(self):
        return bbox_center(self.bbox)


GroundTruth = namedtuple('GroundTruth', ['frame', 'row', 'col', 'height', 'width'])
PrecisionCurve = namedtuple('PrecisionCurve', ['points', 'mean_error', 'fps'])


class TrackRecord(object):
    """
    Per-frame tracking results.
    """

    def __init__(self):
        self.centers = []
        self.truths = []
        self.errors = []
        self.psrs = []
        self.times = []
        return

    def __len__(self):
        return len(self.centers)

    def append(self, center, psr_value, elapsed, truth=None):
        self.centers.append(tuple(int(x) for x in center))
        self.psrs.append(float(psr_value))
        self.times.append(float(elapsed))
        if truth is None:
            self.truths.append(None)
            self.errors.append(None)
        else:
            self.truths.append((float(truth[0]), float(truth[1])))
            self.errors.append(math.hypot(center[0] - truth[0], center[1] - truth[1]))
        return

    @property
    def fps(self):
        total = sum(self.times)
        return len(self.times) / total if total > 0 else float('inf')

    def to_rows(self):
        rows = []
        for idx, (center, truth, err, value) in enumerate(zip(self.centers, self.truths, self.errors, self.psrs)):
            rows.append(dict(
                frame=idx,
                row=center[0],
                col=center[1],
                gt_row=truth[0] if truth else None,
                gt_col=truth[1] if truth else None,
                error=err,
                psr=value,
            ))
        return rows


# helpers
# -------
def bbox_center(bbox):
    top, left, height, width = bbox
    return (top + height // 2, left + width // 2)


def clamp_bbox(bbox, frame_shape):
    top, left, height, width = (int(x) for x in bbox)
    top = min(max(top, 0), frame_shape[0] - height)
    left = min(max(left, 0), frame_shape[1] - width)
    return (top, left, height, width)


def _search_shape(bbox, params):
    return (int(round(bbox[2] * params.search_scale)),
            int(round(bbox[3] * params.search_scale)))


def _target(shape):
    return (shape[0] // 2, shape[1] // 2)


def _check_bbox(bbox, frame_shape):
    try:
        top, left, height, width = (int(x) for x in bbox)
    except (TypeError, ValueError):
        raise DegenerateInputError('Bounding box must be (top, left, height, width).')
    if height < 8 or width < 8:
        raise DegenerateInputError('Target must be at least 8x8, got {}x{}.'.format(height, width))
    if top < 0 or left < 0 or top + height > frame_shape[0] or left + width > frame_shape[1]:
        raise DegenerateInputError('Bounding box {} leaves the {} frame.'.format(bbox, frame_shape))
    return (top, left, height, width)


# operations
# ----------
def init_tracker(frame, bbox, params=None):
    """
    Build the first filter from the target window and a set of
    randomly warped copies of it.

    Arguments:
        frame (array): First frame.
        bbox (tuple): Target box ``(top, left, height, width)``.
        params (TrackerParams): Tracker settings.
    """
    params = params or TrackerParams()
    frame = as_signal(frame, 'frame')
    bbox = _check_bbox(bbox, frame.shape)
    shape = _search_shape(bbox, params)
    if params.solver == 'mosse':
        mask = MaskSpec.identity(shape)
    else:
        mask = MaskSpec(shape, (bbox[2], bbox[3]))
    sigma = tracking_sigma(bbox[2], bbox[3])
    target = _target(shape)

    raw = extract_window(frame, bbox_center(bbox), shape)
    xs = [preprocess(raw)]
    ys = [desired_response(mask, target, sigma)]

    rng = np.random.default_rng(params.seed)
    for _ in range(params.init_perturbations):
        angle = rng.uniform(-params.max_rotation, params.max_rotation)
        scale = rng.uniform(*params.scale_range)
        shift = rng.uniform(-params.max_translation, params.max_translation, size=2)
        xs.append(preprocess(affine_warp(raw, angle, scale, shift)))
        moved = (min(max(target[0] + shift[0], 0), shape[0] - 1),
                 min(max(target[1] + shift[1], 0), shape[1] - 1))
        ys.append(desired_response(mask, moved, sigma))

    energies = spectral_energies(xs, ys)
    model, admm = _train(energies, mask, params)
    response = correlate(model, xs[0])
    logger.debug('tracker init bbox=%s window=%s exemplars=%d', bbox, shape, len(xs))
    return TrackerState(model, bbox, 0, _safe_psr(response, params.psr_radius), admm, params, sigma, response)


def _train(energies, mask, params, warm=None):
    if params.solver == 'mosse':
        return mosse_from_energies(energies, params.lam), None
    return train_from_energies(energies, mask, params.lam, params=params.admm, warm=warm)


def _safe_psr(response, radius):
    try:
        return psr(response, radius)
    except DegenerateInputError:
        return 0.0


def track_step(state, frame):
    """
    Locate the target in a new frame, then adapt the filter to it.

    Returns:
        tuple: ``(TrackerState, center, psr)``.
    """
    params = state.params
    frame = as_signal(frame, 'frame')
    shape = state.model.mask.outer
    center = state.center

    try:
        window = preprocess(extract_window(frame, center, shape))
    except DegenerateInputError:
        # nothing to correlate against: hold the box and the filter
        logger.warning('frame=%d search window is uniform, keeping the last box', state.frame_index + 1)
        new = TrackerState(state.model, state.bbox, state.frame_index + 1, 0.0,
                           state.admm, params, state.sigma, None)
        return new, center, 0.0

    response = correlate(state.model, window)
    peak = locate(response, state.model)
    score = _safe_psr(response, params.psr_radius)
    found = (center[0] - shape[0] // 2 + peak[0], center[1] - shape[1] // 2 + peak[1])

    top, left = found[0] - state.bbox[2] // 2, found[1] - state.bbox[3] // 2
    bbox = clamp_bbox((top, left, state.bbox[2], state.bbox[3]), frame.shape)
    center = bbox_center(bbox)

    model, admm = state.model, state.admm
    if params.eta > 0:
        try:
            x = preprocess(extract_window(frame, center, shape))
        except DegenerateInputError:
            x = None
            logger.warning('frame=%d adaptation window is uniform, skipping update', state.frame_index + 1)
        if x is not None:
            y = desired_response(state.model.mask, _target(shape), state.sigma)
            energies = online_update(state.model.energies, x, y, params.eta)
            model, admm = _train(energies, state.model.mask, params, warm=state.admm)

    logger.debug('frame=%d center=%s psr=%.3f', state.frame_index + 1, center, score)
    new = TrackerState(model, bbox, state.frame_index + 1, score, admm, params, state.sigma, response)
    return new, center, score


def run_sequence(frames, bbox, params=None, ground_truth=None, on_response=None):
    """
    Track a target through a sequence of frames.

    Arguments:
        frames (iterable): Frames, first one used for initialisation.
        bbox (tuple): Initial target box.
        params (TrackerParams): Tracker settings.
        ground_truth (list): Optional per-frame ``(row, col)`` centres.
        on_response (callable): Called as ``on_response(index, state)``
            after every frame.
    """
    params = params or TrackerParams()
    record = TrackRecord()
    frames = iter(frames)
    truth = list(ground_truth) if ground_truth is not None else None

    def _truth(idx):
        if truth is None:
            return None
        if idx >= len(truth):
            raise InputError('Ground truth has {} rows but frame {} was read.'.format(len(truth), idx))
        return truth[idx]

    try:
        first = next(frames)
    except StopIteration:
        raise InputError('Sequence has no frames.')
    start = time.perf_counter()
    state = init_tracker(first, bbox, params)
    record.append(state.center, state.last_psr, time.perf_counter() - start, _truth(0))
    if on_response is not None:
        on_response(0, state)

    for idx, frame in enumerate(frames, start=1):
        start = time.perf_counter()
        state, center, score = track_step(state, frame)
        record.append(center, score, time.perf_counter() - start, _truth(idx))
        if on_response is not None:
            on_response(idx, state)

    if truth is not None and len(truth) != len(record):
        raise InputError('Ground truth has {} rows for {} frames.'.format(len(truth), len(record)))
    logger.info('tracked %d frames at %.1f fps', len(record), record.fps)
    return record


# metrics
# -------
def precision_curve(record, thresholds):
    """
    Fraction of frames whose centre error is within each threshold,
    with the mean error and the frame rate.
    """
    if not len(record) or any(err is None for err in record.errors):
        raise InputError('Precision needs ground truth for every frame.')
    errors = np.asarray(record.errors, dtype=np.float64)
    points = [(float(t), float(np.mean(errors <= t))) for t in thresholds]
    return PrecisionCurve(points, float(errors.mean()), record.fps)


# io
# --
def read_ground_truth(path):
    """
    Read a ground-truth table with lines
    ``frame_index,center_row,center_col[,height,width]``. Frames must
    be numbered consecutively from zero.
    """
    rows = []
    try:
        with open(path, 'r') as fi:
            for line in csv.reader(fi):
                if not line or not line[0].strip() or line[0].lstrip().startswith('#'):
                    continue
                try:
                    vals = [float(x) for x in line]
                except ValueError:
                    if not rows:
                        continue
                    raise InputError('Malformed ground-truth line: {}'.format(','.join(line)))
                if len(vals) not in (3, 5):
                    raise InputError('Ground-truth lines need 3 or 5 fields, got {}.'.format(len(vals)))
                size = vals[3:] if len(vals) == 5 else (None, None)
                rows.append(GroundTruth(int(vals[0]), vals[1], vals[2], size[0], size[1]))
    except (IOError, OSError) as exc:
        raise InputError('Could not read ground truth `{}`: {}'.format(path, exc))

    for idx, row in enumerate(rows):
        if row.frame != idx:
            raise InputError('Ground truth frames must be consecutive from 0; found {} at line {}.'.format(row.frame, idx))
    return rows


def _numeric_key(name):
    return [int(tok) if tok.isdigit() else tok for tok in re.split(r'(\d+)', name)]


def list_frames(directory):
    """
    Frame files of a directory, sorted numerically by name.
    """
    if not os.path.isdir(directory):
        raise InputError('Frame directory `{}` does not exist.'.format(directory))
    names = [n for n in os.listdir(directory) if n.lower().endswith(FRAME_EXTENSIONS)]
    if not names:
        raise InputError('No frames found in `{}`.'.format(directory))
    return [os.path.join(directory, n) for n in sorted(names, key=_numeric_key)]
