# -*- coding: utf-8 -*-
#
# Experiment harnesses and reports
#
# ------------------------------------------------


# imports
# -------
import os
import csv
import json
import time
import logging
import platform
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import settings
from .exceptions import InputError, ParameterError, DivergenceError, SizeGuardError
from .signal import (
    MaskSpec, crop, pad, preprocess, power_normalize, extract_window, desired_response,
    read_image, write_pgm,
)
from .solvers import (
    AdmmParams, RegularizedProblem, mosse_train, cflb_admm_train,
    masked_spatial_oracle, gradient_descent_train, objective, solve_g, solve_h,
    lagrangian_g, lagrangian_h, filter_spectrum, filter_from_spectrum,
)
from .detect import correlate, locate, normalized_distance
from .track import TrackerParams, SOLVERS as TRACK_SOLVERS, run_sequence, precision_curve, read_ground_truth, list_frames
from . import synth


# config
# ------
logger = logging.getLogger(__name__)


# reports
# -------
def _ensure_dir(directory):
    if not os.path.isdir(directory):
        os.makedirs(directory)
    return directory


def _plain(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError('Cannot serialise {!r}'.format(value))


class Report(object):
    """
    Machine-readable result of a command: the run settings, metric
    tables, the raw traces the tables are computed from and an
    environment stamp.

    Arguments:
        command (str): Command name, used for file names.
        config (Config): Run configuration to echo.
    """

    def __init__(self, command, config):
        self.command = command
        self.config = settings(config)
        self.tables = OrderedDict()
        self.traces = OrderedDict()
        self.environment = dict(
            version=__version__,
            threads=int(config.get('BCF_THREADS') or 1),
            numpy=np.__version__,
            python=platform.python_version(),
        )
        return

    def add_table(self, name, columns, rows):
        self.tables[name] = dict(columns=list(columns), rows=[[row[c] for c in columns] for row in rows])
        return

    def add_trace(self, name, values):
        self.traces[name] = values
        return

    def table(self, name):
        """
        Rows of a table as dictionaries.
        """
        data = self.tables[name]
        return [dict(zip(data['columns'], row)) for row in data['rows']]

    def to_dict(self):
        return OrderedDict([
            ('command', self.command),
            ('config', self.config),
            ('tables', self.tables),
            ('traces', self.traces),
            ('environment', self.environment),
        ])

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, default=_plain)

    def write(self, directory):
        """
        Write the JSON report and one CSV file per table.

        Returns:
            str: Path of the JSON report.
        """
        path = os.path.join(directory, '{}.json'.format(self.command))
        try:
            _ensure_dir(directory)
            with open(path, 'w') as fi:
                fi.write(self.dumps())
            for name, data in self.tables.items():
                with open(os.path.join(directory, '{}_{}.csv'.format(self.command, name)), 'w', newline='') as fi:
                    writer = csv.writer(fi)
                    writer.writerow(data['columns'])
                    writer.writerows(data['rows'])
        except (IOError, OSError) as exc:
            raise InputError('Could not write the {} report to `{}`: {}'.format(self.command, directory, exc))
        logger.info('report written to %s', path)
        return path


# helpers
# -------
def run_cells(func, cells, threads=1):
    """
    Evaluate independent benchmark cells, in parallel when
    ``threads > 1``. Results keep the cell order.
    """
    cells = list(cells)
    if threads and threads > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, cells))
    return [func(cell) for cell in cells]


def admm_params(config):
    return AdmmParams(
        mu0=config['BCF_MU0'],
        beta=config['BCF_BETA'],
        mu_max=config['BCF_MU_MAX'],
        max_iters=config['BCF_MAX_ITERS'],
        rel_tol=config['BCF_REL_TOL'],
    )


def train_filter(xs, ys, mask, lam, solver='cflb', params=None, workers=None):
    """
    Train with the requested solver.

    Returns:
        tuple: ``(FilterModel, AdmmState or None)``.
    """
    if solver == 'mosse':
        if not mask.is_identity:
            raise ParameterError('The closed-form solver needs the filter to cover the whole window.')
        return mosse_train(xs, ys, lam, workers=workers), None
    if solver == 'cflb':
        return cflb_admm_train(RegularizedProblem(xs, ys, lam, mask), params, workers=workers)
    raise ParameterError('Unknown solver `{}`.'.format(solver))


def _pair(value, name):
    try:
        if isinstance(value, (int, float)):
            return (int(value), int(value))
        h, w = value
        return (int(h), int(w))
    except (TypeError, ValueError):
        raise InputError('`{}` must be a size or a (height, width) pair.'.format(name))


# localisation
# ------------
def localization_bench(config, dataset=None):
    """
    Train on random splits of an annotated set and measure how often
    the response peak lands within a fraction of the reference distance
    of the annotated target, across training-set sizes and window to
    filter size ratios.
    """
    report = Report('localize-bench', config)
    seed = int(config['BCF_SEED'])
    sizes = [int(n) for n in config['BCF_TRAIN_SIZES']]
    ratios = [float(r) for r in config['BCF_RATIOS']]
    runs = int(config['BCF_RUNS'])
    test_size = int(config['BCF_TEST_SIZE'])
    thresholds = [float(t) for t in config['BCF_LOCALIZATION_THRESHOLDS']]
    support = _pair(config['BCF_FILTER_SIZE'], 'filter_size')
    lam, sigma, solver = float(config['BCF_LAM']), float(config['BCF_SIGMA']), config['BCF_SOLVER']
    params = admm_params(config)

    if dataset is None:
        if config['BCF_DATA_DIR']:
            dataset = synth.read_localization_set(config['BCF_DATA_DIR'])
        else:
            dataset = synth.localization_set(
                max(sizes) + test_size, seed=seed,
                distractor_contrast=config['BCF_DISTRACTOR_CONTRAST'],
                noise=config['BCF_NOISE'], clutter_amplitude=config['BCF_CLUTTER'],
            )
    total = len(dataset.images)
    if max(sizes) >= total:
        raise InputError('Training size {} leaves no test images out of {}.'.format(max(sizes), total))

    cells = [(n, ratio, run) for n in sizes for ratio in ratios for run in range(runs)]

    def evaluate(cell):
        n, ratio, run = cell
        rng = np.random.default_rng([seed, run, n])
        order = rng.permutation(total)
        train, test = order[:n], order[n:n + test_size]
        window = (int(round(support[0] * ratio)), int(round(support[1] * ratio)))
        mask = MaskSpec(window, support)
        target = (window[0] // 2, window[1] // 2)

        xs = [preprocess(extract_window(dataset.images[i], dataset.annotations[i].right, window)) for i in train]
        ys = [desired_response(mask, target, sigma)] * len(xs)
        # the closed form is the exact minimiser when the support fills the window
        model, _ = train_filter(xs, ys, mask, lam, 'mosse' if mask.is_identity else solver, params)

        distances = []
        for i in test:
            image = preprocess(dataset.images[i])
            if image.shape[0] < window[0] or image.shape[1] < window[1]:
                raise InputError('Image {} is smaller than the training window.'.format(dataset.annotations[i].name))
            embedded = model.embed(image.shape)
            pred = locate(correlate(embedded, image), embedded)
            ann = dataset.annotations[i]
            distances.append(normalized_distance(pred, ann.right, ann.left))
        logger.info('localisation cell n=%d ratio=%.2f run=%d done', n, ratio, run)
        return distances

    results = run_cells(evaluate, cells, config['BCF_THREADS'])

    rows, summary = [], []
    for n in sizes:
        for ratio in ratios:
            dists = [np.asarray(d) for (c, d) in zip(cells, results) if c[0] == n and c[1] == ratio]
            for t in thresholds:
                rate = float(np.mean([np.mean(d < t) for d in dists]))
                rows.append(dict(n=n, ratio=ratio, threshold=t, rate=rate))
            summary.append(dict(
                n=n, ratio=ratio,
                rate_at_005=float(np.mean([np.mean(d < 0.05) for d in dists])),
                rate_at_010=float(np.mean([np.mean(d < 0.10) for d in dists])),
                mean_distance=float(np.mean([d.mean() for d in dists])),
            ))
    report.add_table('rates', ['n', 'ratio', 'threshold', 'rate'], rows)
    report.add_table('summary', ['n', 'ratio', 'rate_at_005', 'rate_at_010', 'mean_distance'], summary)
    report.add_trace('distances', [
        dict(n=c[0], ratio=c[1], run=c[2], values=list(d)) for c, d in zip(cells, results)
    ])
    return report


# convergence
# -----------
def convergence_problem(rng, count, window, support, lam, sigma=2.0):
    """
    Random white training windows with a centred target response.
    """
    mask = MaskSpec(window, support)
    xs = [power_normalize(rng.standard_normal(window)) for _ in range(count)]
    ys = [desired_response(mask, (window[0] // 2, window[1] // 2), sigma)] * count
    return RegularizedProblem(xs, ys, lam, mask)


def _finite_difference(func, x, eps=1e-4):
    grad = np.zeros(x.shape, dtype=x.dtype)
    for idx in np.ndindex(x.shape):
        steps = (1.0, 1j) if np.iscomplexobj(x) else (1.0,)
        for step in steps:
            up, down = x.copy(), x.copy()
            up[idx] += eps * step
            down[idx] -= eps * step
            grad[idx] += step * (func(up) - func(down)) / (2.0 * eps)
    return grad


def subproblem_checks(seed=0, window=(8, 8), support=(4, 4), lam=0.1, mu=0.5):
    """
    Finite-difference gradients of the augmented Lagrangian at the
    closed-form subproblem solutions; both should vanish.
    """
    rng = np.random.default_rng(seed)
    mask = MaskSpec(window, support)
    xs = [rng.standard_normal(window) for _ in range(2)]
    ys = [rng.standard_normal(window) for _ in range(2)]
    energies = RegularizedProblem(xs, ys, lam, mask).energies()
    h_hat = filter_spectrum(pad(rng.standard_normal(support), mask))
    zeta_hat = filter_spectrum(rng.standard_normal(window))

    g_hat = solve_g(energies, h_hat, zeta_hat, mu)
    g_grad = _finite_difference(lambda g: lagrangian_g(energies, g, h_hat, zeta_hat, mu), g_hat)

    g = crop(filter_from_spectrum(g_hat), mask)
    l = crop(filter_from_spectrum(zeta_hat), mask)
    h = solve_h(g, l, lam, mu, mask)
    h_grad = _finite_difference(lambda v: lagrangian_h(g_hat, zeta_hat, v, mu, lam, mask), h)
    return dict(
        g_gradient=float(np.abs(g_grad).max()),
        h_gradient=float(np.abs(h_grad).max()),
        h_scaling='(mu + lambda)^-1',
    )


def iterations_to(trace, target):
    for idx, value in enumerate(trace):
        if value <= target:
            return idx
    return None


def convergence_bench(config):
    """
    Compare ADMM against gradient descent across training-set sizes:
    precompute and per-iteration time, iterations to reach the
    relative objective tolerance and final objectives.
    """
    report = Report('convergence-bench', config)
    seed = int(config['BCF_SEED'])
    window = _pair(config['BCF_CONVERGENCE_WINDOW'], 'convergence_window')
    support = _pair(config['BCF_CONVERGENCE_SUPPORT'], 'convergence_support')
    lam = float(config['BCF_LAM'])
    tol = float(config['BCF_OBJECTIVE_TOL'])
    gd_iters = int(config['BCF_GD_ITERS'])
    sizes = [int(n) for n in config['BCF_SIZES']]
    base = admm_params(config)
    params = AdmmParams(mu0=base.mu0, beta=base.beta, mu_max=base.mu_max, max_iters=base.max_iters, rel_tol=0.0)

    def evaluate(count):
        rng = np.random.default_rng([seed, count])
        problem = convergence_problem(rng, count, window, support, lam, float(config['BCF_SIGMA']))
        model, state = cflb_admm_train(problem, params)
        admm_trace = [objective(problem.energies(), np.zeros(support), problem.mask, lam)]
        admm_trace += [r.objective for r in state.trace]

        try:
            optimum = objective(problem.energies(), masked_spatial_oracle(problem), problem.mask, lam)
        except SizeGuardError:
            optimum = None
        target = optimum * (1.0 + tol) if optimum is not None else None

        start = time.perf_counter()
        try:
            _, gd_trace = gradient_descent_train(problem, iters=gd_iters, target=target)
            status = 'ok'
        except DivergenceError as exc:
            gd_trace, status = exc.trace, 'diverged'
        gd_time = time.perf_counter() - start

        logger.info('convergence cell n=%d admm=%.6g gd=%.6g', count, admm_trace[-1], gd_trace[-1])
        return dict(
            n=count,
            optimum=optimum,
            admm_objective=admm_trace[-1],
            admm_iters=iterations_to(admm_trace, target) if target is not None else None,
            gd_objective=gd_trace[-1],
            gd_iters=iterations_to(gd_trace, target) if target is not None else None,
            gd_status=status,
            precompute_time=state.precompute_time,
            iteration_time=state.iteration_time,
            gd_iteration_time=gd_time / max(1, len(gd_trace) - 1),
            admm_trace=admm_trace,
            residuals=[r.residual for r in state.trace],
            gd_trace=gd_trace,
        )

    results = run_cells(evaluate, sizes, config['BCF_THREADS'])
    report.add_table('objectives', [
        'n', 'optimum', 'admm_objective', 'admm_iters', 'gd_objective', 'gd_iters', 'gd_status',
    ], results)
    report.add_table('timing', ['n', 'precompute_time', 'iteration_time', 'gd_iteration_time'], results)
    report.add_table('subproblems', ['g_gradient', 'h_gradient', 'h_scaling'], [subproblem_checks(seed)])
    report.add_trace('objective', [
        dict(n=r['n'], admm=r['admm_trace'], residual=r['residuals'], gd=r['gd_trace']) for r in results
    ])
    return report


# tracking
# --------
def load_sequence(config):
    """
    Frames, ground truth and the initial box named by the run settings.
    """
    directory = config['BCF_FRAMES']
    if not directory:
        raise InputError('No frame directory given.')
    paths = list_frames(directory)
    gt_path = config['BCF_GROUND_TRUTH'] or os.path.join(directory, synth.GROUND_TRUTH)
    truth = read_ground_truth(gt_path)
    if len(truth) != len(paths):
        raise InputError('Ground truth has {} rows for {} frames.'.format(len(truth), len(paths)))

    bbox = config['BCF_BBOX']
    if bbox is None:
        first = truth[0]
        if first.height is None:
            raise InputError('Initial box needed: pass a bbox or give sizes in the ground truth.')
        h, w = int(first.height), int(first.width)
        bbox = (int(first.row) - h // 2, int(first.col) - w // 2, h, w)
    frames = [read_image(p) for p in paths]
    return frames, [(t.row, t.col) for t in truth], tuple(int(x) for x in bbox)


def _cell_name(solver, iters):
    return solver if iters is None else '{}_{}'.format(solver, iters)


def _normalise(response):
    lo, hi = response.min(), response.max()
    return (response - lo) / (hi - lo) if hi > lo else np.zeros_like(response)


def track_bench(config, sequence=None):
    """
    Run the tracker once per solver and ADMM iteration budget and
    report precision curves, mean error, frame rate and per-frame
    errors. The closed-form solver has no iterations and runs once.
    """
    report = Report('track-bench', config)
    if sequence is None:
        frames, truth, bbox = load_sequence(config)
    else:
        frames, truth, bbox = sequence.frames, sequence.centers, sequence.bbox
    thresholds = [float(t) for t in config['BCF_PRECISION_THRESHOLDS']]
    dump_every = int(config['BCF_DUMP_EVERY'] or 0)
    budgets = [int(b) for b in config['BCF_ADMM_ITERS']]
    solvers = list(config['BCF_TRACK_SOLVERS'])
    for name in solvers:
        if name not in TRACK_SOLVERS:
            raise InputError('Unknown tracking solver `{}`.'.format(name))

    cells = []
    for name in solvers:
        cells.extend([(name, None)] if name == 'mosse' else [(name, b) for b in budgets])

    def evaluate(cell):
        solver, iters = cell
        params = TrackerParams(
            eta=config['BCF_ETA'], lam=config['BCF_TRACK_LAM'], admm_iters=iters or 1,
            search_scale=config['BCF_SEARCH_SCALE'],
            init_perturbations=config['BCF_INIT_PERTURBATIONS'],
            seed=config['BCF_SEED'], mu0=config['BCF_MU0'], solver=solver,
        )
        dump = None
        if dump_every > 0:
            directory = os.path.join(config['BCF_OUT_DIR'], 'responses', _cell_name(solver, iters))

            def dump(idx, state):
                if idx % dump_every or state.response is None:
                    return
                path = os.path.join(directory, 'response_{:04d}.pgm'.format(idx))
                try:
                    _ensure_dir(directory)
                    write_pgm(path, _normalise(state.response.response))
                except (IOError, OSError) as exc:
                    raise InputError('Could not write response map `{}`: {}'.format(path, exc))
        record = run_sequence(frames, bbox, params, ground_truth=truth, on_response=dump)
        return record, precision_curve(record, thresholds)

    results = run_cells(evaluate, cells, config['BCF_THREADS'])

    precision, summary, timing = [], [], []
    for (solver, iters), (record, curve) in zip(cells, results):
        for t, frac in curve.points:
            precision.append(dict(solver=solver, admm_iters=iters, threshold=t, precision=frac))
        errors = np.asarray(record.errors)
        summary.append(dict(
            solver=solver,
            admm_iters=iters,
            precision_at_20=float(np.mean(errors <= 20.0)),
            mean_error=curve.mean_error,
            frames=len(record),
        ))
        timing.append(dict(solver=solver, admm_iters=iters, fps=curve.fps, seconds=float(sum(record.times))))
        report.add_trace(_cell_name(solver, iters), record.to_rows())

    report.add_table('precision', ['solver', 'admm_iters', 'threshold', 'precision'], precision)
    report.add_table('summary', ['solver', 'admm_iters', 'precision_at_20', 'mean_error', 'frames'], summary)
    report.add_table('timing', ['solver', 'admm_iters', 'fps', 'seconds'], timing)
    return report


# training
# --------
def load_training_set(directory, config):
    """
    Training windows and responses from a directory. With an
    annotation table the windows are cut around each annotated target;
    otherwise every image is a window with the target at its centre.
    """
    support = _pair(config['BCF_FILTER_SIZE'], 'filter_size')
    sigma = float(config['BCF_SIGMA'])
    if not os.path.isdir(directory):
        raise InputError('Training directory `{}` does not exist.'.format(directory))

    if os.path.isfile(os.path.join(directory, synth.ANNOTATIONS)):
        dataset = synth.read_localization_set(directory)
        window = config['BCF_WINDOW_SIZE']
        window = _pair(window, 'window_size') if window else (2 * support[0], 2 * support[1])
        raws = [extract_window(img, ann.right, window) for img, ann in zip(dataset.images, dataset.annotations)]
    else:
        raws = [read_image(p) for p in list_frames(directory)]
        window = raws[0].shape
        if any(r.shape != window for r in raws):
            raise InputError('Training images in `{}` differ in shape.'.format(directory))
    return raws, window, support, sigma


def train_command(config, directory, mask_equals_image=False):
    """
    Train one filter from a directory of images.

    Returns:
        tuple: ``(FilterModel, Report)``.
    """
    report = Report('train', config)
    raws, window, support, sigma = load_training_set(directory, config)
    if mask_equals_image or config['BCF_SOLVER'] == 'mosse':
        support = window
    mask = MaskSpec(window, support)

    start = time.perf_counter()
    xs = [preprocess(r) for r in raws]
    ys = [desired_response(mask, (window[0] // 2, window[1] // 2), sigma)] * len(xs)
    model, state = train_filter(xs, ys, mask, float(config['BCF_LAM']), config['BCF_SOLVER'],
                                admm_params(config), workers=config['BCF_THREADS'])
    elapsed = time.perf_counter() - start

    value = objective(model.energies, model.h, mask, model.lam)
    report.add_table('model', ['solver', 'window', 'support', 'count', 'objective'], [dict(
        solver=config['BCF_SOLVER'], window=list(window), support=list(support),
        count=len(xs), objective=value,
    )])
    report.add_table('timing', ['seconds', 'iterations'], [dict(
        seconds=elapsed, iterations=state.iter if state is not None else 0,
    )])
    if state is not None:
        report.add_trace('objective', [r.objective for r in state.trace])
        report.add_trace('residual', [r.residual for r in state.trace])
    return model, report


# synthetic data
# --------------
def synth_command(config):
    """
    Write synthetic localisation and tracking data under the output
    directory.
    """
    out = config['BCF_OUT_DIR']
    kind = config['BCF_SYNTH_KIND']
    if kind not in ('all', 'localization', 'tracking'):
        raise InputError('Unknown synthetic data kind `{}`.'.format(kind))
    seed = int(config['BCF_SEED'])
    written = []
    try:
        if kind in ('all', 'localization'):
            dataset = synth.localization_set(
                int(config['BCF_SYNTH_COUNT']), seed=seed,
                distractor_contrast=config['BCF_DISTRACTOR_CONTRAST'],
                noise=config['BCF_NOISE'], clutter_amplitude=config['BCF_CLUTTER'],
            )
            synth.write_localization_set(os.path.join(out, 'localization'), dataset)
            written.append('localization')
        if kind in ('all', 'tracking'):
            sequence = synth.tracking_sequence(
                int(config['BCF_SYNTH_FRAMES']), seed=seed,
                velocity=tuple(config['BCF_VELOCITY']),
                noise=config['BCF_NOISE'], clutter_amplitude=config['BCF_CLUTTER'],
            )
            synth.write_sequence(os.path.join(out, 'tracking'), sequence)
            written.append('tracking')
    except (IOError, OSError) as exc:
        raise InputError('Could not write synthetic data to `{}`: {}'.format(out, exc))
    return written
