# -*- coding: utf-8 -*-
#
# Command-line interface
#
# ------------------------------------------------


# imports
# -------
import os
import logging
from functools import wraps

import click

from . import __version__
from . import bench
from .config import load_config
from .exceptions import FilterError, InputError
from .solvers import save_model


# config
# ------
EXIT_INPUT = 2
EXIT_NUMERIC = 3


# helpers
# -------
def _configure(ctx, **options):
    """
    Merge global and command options into the run configuration.
    """
    overrides = dict(ctx.obj['overrides'])
    for key, value in options.items():
        if value is None or value == ():
            continue
        overrides[key] = list(value) if isinstance(value, tuple) else value
    return load_config(ctx.obj['config'], overrides)


def handle_errors(func):
    """
    Report toolkit errors on stderr and turn them into exit codes:
    2 for unusable input, 3 for numerical failures.
    """
    @wraps(func)
    def decorator(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except InputError as exc:
            click.echo(str(exc), err=True)
            ctx.exit(EXIT_INPUT)
        except FilterError as exc:
            click.echo(str(exc), err=True)
            ctx.exit(EXIT_NUMERIC)
    return decorator


def _write(report, config):
    path = report.write(config['BCF_OUT_DIR'])
    click.echo(path)
    return


def admm_options(func):
    for option in reversed([
        click.option('--mu0', type=float, help='Initial ADMM penalty.'),
        click.option('--beta', type=float, help='Penalty growth factor.'),
        click.option('--mu-max', type=float, help='Penalty cap.'),
        click.option('--max-iters', type=int, help='ADMM iteration budget.'),
        click.option('--rel-tol', type=float, help='Relative primal residual tolerance.'),
    ]):
        func = option(func)
    return func


# entry point
# -----------
@click.group()
@click.version_option(__version__)
@click.option('--seed', type=int, help='Master seed.')
@click.option('--threads', type=int, help='Worker threads for benchmark cells.')
@click.option('--out-dir', type=click.Path(file_okay=False), help='Directory for outputs and reports.')
@click.option('--config', 'config_path', type=click.Path(), help='JSON run configuration.')
@click.option('-v', '--verbose', count=True, help='Increase log verbosity.')
@click.pass_context
def main(ctx, seed, threads, out_dir, config_path, verbose):
    """
    Correlation filters with limited boundary effects.
    """
    level = logging.WARNING if not verbose else (logging.INFO if verbose == 1 else logging.DEBUG)
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')
    ctx.ensure_object(dict)
    ctx.obj['config'] = config_path
    ctx.obj['overrides'] = dict(seed=seed, threads=threads, out_dir=out_dir)
    return


# commands
# --------
@main.command()
@click.argument('directory', type=click.Path())
@click.option('--solver', type=click.Choice(['cflb', 'mosse']), help='Training method.')
@click.option('--lam', type=float, help='Ridge weight.')
@click.option('--sigma', type=float, help='Desired response width in pixels.')
@click.option('--filter-size', type=int, nargs=2, help='Filter support height and width.')
@click.option('--window-size', type=int, nargs=2, help='Training window size around annotated targets.')
@click.option('--mask-equals-image', is_flag=True, help='Let the filter cover the whole window.')
@click.option('--output', default='model.bcf', help='Model file name inside the output directory.')
@admm_options
@click.pass_context
@handle_errors
def train(ctx, directory, mask_equals_image, output, **options):
    """
    Train a filter from a directory of images.
    """
    config = _configure(ctx, **options)
    model, report = bench.train_command(config, directory, mask_equals_image=mask_equals_image)
    if not os.path.isdir(config['BCF_OUT_DIR']):
        os.makedirs(config['BCF_OUT_DIR'])
    save_model(os.path.join(config['BCF_OUT_DIR'], output), model)
    _write(report, config)
    return


@main.command('localize-bench')
@click.option('--data-dir', type=click.Path(), help='Annotated image directory; synthetic data when omitted.')
@click.option('--solver', type=click.Choice(['cflb', 'mosse']), help='Training method.')
@click.option('--lam', type=float, help='Ridge weight.')
@click.option('--sigma', type=float, help='Desired response width in pixels.')
@click.option('--filter-size', type=int, nargs=2, help='Filter support height and width.')
@click.option('--train-size', 'train_sizes', type=int, multiple=True, help='Training-set size (repeatable).')
@click.option('--test-size', type=int, help='Number of test images per run.')
@click.option('--ratio', 'ratios', type=float, multiple=True, help='Window to filter size ratio (repeatable).')
@click.option('--runs', type=int, help='Random runs per cell.')
@admm_options
@click.pass_context
@handle_errors
def localize_bench(ctx, **options):
    """
    Localisation rate against threshold, training-set size and window ratio.
    """
    config = _configure(ctx, **options)
    _write(bench.localization_bench(config), config)
    return


@main.command('convergence-bench')
@click.option('--size', 'sizes', type=int, multiple=True, help='Training-set size (repeatable).')
@click.option('--lam', type=float, help='Ridge weight.')
@click.option('--convergence-window', type=int, nargs=2, help='Window shape.')
@click.option('--convergence-support', type=int, nargs=2, help='Filter support shape.')
@click.option('--objective-tol', type=float, help='Relative objective tolerance against the exact optimum.')
@click.option('--gd-iters', type=int, help='Gradient descent iteration budget.')
@admm_options
@click.pass_context
@handle_errors
def convergence_bench(ctx, **options):
    """
    ADMM against gradient descent across training-set sizes.
    """
    config = _configure(ctx, **options)
    _write(bench.convergence_bench(config), config)
    return


@main.command('track-bench')
@click.option('--frames', type=click.Path(), help='Directory of numbered frames.')
@click.option('--ground-truth', type=click.Path(), help='Ground-truth table.')
@click.option('--bbox', type=int, nargs=4, help='Initial box: top left height width.')
@click.option('--eta', type=float, help='Adaptation rate.')
@click.option('--track-lam', type=float, help='Ridge weight for tracking.')
@click.option('--admm-iters', type=int, multiple=True, help='ADMM iterations per frame (repeatable).')
@click.option('--search-scale', type=float, help='Search window size relative to the target.')
@click.option('--init-perturbations', type=int, help='Warped exemplars at initialisation.')
@click.option('--dump-every', type=int, help='Write the response map every k frames.')
@click.option('--solver', 'track_solvers', type=click.Choice(['cflb', 'mosse']), multiple=True,
              help='Filter solver (repeatable); mosse uses a window-sized filter in closed form.')
@click.option('--mu0', type=float, help='Initial ADMM penalty.')
@click.pass_context
@handle_errors
def track_bench(ctx, **options):
    """
    Track a sequence and report precision, mean error and frame rate.
    """
    config = _configure(ctx, **options)
    _write(bench.track_bench(config), config)
    return


@main.command()
@click.option('--kind', 'synth_kind', type=click.Choice(['all', 'localization', 'tracking']), help='Data to generate.')
@click.option('--count', 'synth_count', type=int, help='Localisation images.')
@click.option('--frames', 'synth_frames', type=int, help='Tracking frames.')
@click.option('--distractor-contrast', type=float, help='Blend weight of distractors.')
@click.option('--noise', type=float, help='White noise level.')
@click.option('--clutter', type=float, help='Background contrast.')
@click.option('--velocity', type=float, nargs=2, help='Target motion per frame (rows, cols).')
@click.pass_context
@handle_errors
def synth(ctx, **options):
    """
    Generate synthetic localisation and tracking data.
    """
    config = _configure(ctx, **options)
    for name in bench.synth_command(config):
        click.echo(os.path.join(config['BCF_OUT_DIR'], name))
    return
