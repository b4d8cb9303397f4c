# -*- coding: utf-8 -*-
#
# Run configuration
#
# ------------------------------------------------


# imports
# -------
import os
import json

from flask import Config

from .exceptions import ConfigError


# config
# ------
PREFIX = 'BCF_'


def localization_thresholds():
    return [round(0.01 * i, 2) for i in range(1, 26)]


def precision_thresholds():
    return [float(i) for i in range(1, 51)]


# defaults
# --------
def init_config(config):
    """
    Fill every run setting that is not already present.

    Arguments:
        config (Config): Configuration object to update in place.
    """
    # global
    config.setdefault('BCF_SEED', 0)
    config.setdefault('BCF_THREADS', 1)
    config.setdefault('BCF_OUT_DIR', '.')

    # training
    config.setdefault('BCF_SOLVER', 'cflb')
    config.setdefault('BCF_LAM', 1e-2)
    config.setdefault('BCF_SIGMA', 2.0)
    config.setdefault('BCF_FILTER_SIZE', [16, 16])
    config.setdefault('BCF_WINDOW_SIZE', None)

    # admm
    config.setdefault('BCF_MU0', 1e-2)
    config.setdefault('BCF_BETA', 1.1)
    config.setdefault('BCF_MU_MAX', 20.0)
    config.setdefault('BCF_MAX_ITERS', 20)
    config.setdefault('BCF_REL_TOL', 1e-3)

    # localisation benchmark
    config.setdefault('BCF_DATA_DIR', None)
    config.setdefault('BCF_TRAIN_SIZES', [50])
    config.setdefault('BCF_TEST_SIZE', 100)
    config.setdefault('BCF_RATIOS', [1.0, 2.0])
    config.setdefault('BCF_RUNS', 1)
    config.setdefault('BCF_LOCALIZATION_THRESHOLDS', localization_thresholds())

    # convergence benchmark
    config.setdefault('BCF_SIZES', [8, 64])
    config.setdefault('BCF_CONVERGENCE_WINDOW', [16, 16])
    config.setdefault('BCF_CONVERGENCE_SUPPORT', [8, 8])
    config.setdefault('BCF_OBJECTIVE_TOL', 1e-3)
    config.setdefault('BCF_GD_ITERS', 2000)

    # tracking
    config.setdefault('BCF_FRAMES', None)
    config.setdefault('BCF_GROUND_TRUTH', None)
    config.setdefault('BCF_BBOX', None)
    config.setdefault('BCF_ETA', 0.025)
    config.setdefault('BCF_TRACK_LAM', 1e-2)
    config.setdefault('BCF_ADMM_ITERS', [4])
    config.setdefault('BCF_TRACK_SOLVERS', ['cflb'])
    config.setdefault('BCF_SEARCH_SCALE', 2.0)
    config.setdefault('BCF_INIT_PERTURBATIONS', 8)
    config.setdefault('BCF_PRECISION_THRESHOLDS', precision_thresholds())
    config.setdefault('BCF_DUMP_EVERY', 0)

    # synthetic data
    config.setdefault('BCF_SYNTH_KIND', 'all')
    config.setdefault('BCF_SYNTH_COUNT', 300)
    config.setdefault('BCF_SYNTH_FRAMES', 60)
    config.setdefault('BCF_DISTRACTOR_CONTRAST', 0.6)
    config.setdefault('BCF_NOISE', 0.02)
    config.setdefault('BCF_CLUTTER', 0.3)
    config.setdefault('BCF_VELOCITY', [0.0, 2.0])
    return config


DEFAULTS = frozenset(init_config(dict()).keys())


# helpers
# -------
def _prefixed(mapping, source):
    if not isinstance(mapping, dict):
        raise ConfigError('Configuration in {} must be a JSON object.'.format(source))
    result = {}
    for key, value in mapping.items():
        name = PREFIX + str(key).upper().replace('-', '_')
        if name not in DEFAULTS:
            raise ConfigError('Unknown configuration key `{}` in {}.'.format(key, source))
        result[name] = value
    return result


def load_config(path=None, overrides=None):
    """
    Build the run configuration: defaults, then an optional JSON file,
    then command-line overrides. Keys use the snake_case setting names.

    Arguments:
        path (str): JSON configuration file.
        overrides (dict): Settings that win over the file. ``None``
            values are skipped.
    """
    config = Config(os.getcwd())
    init_config(config)
    if path is not None:
        try:
            config.from_file(os.path.abspath(path), load=lambda fi: _prefixed(json.load(fi), path))
        except (IOError, OSError) as exc:
            raise ConfigError('Could not read config `{}`: {}'.format(path, exc))
        except ValueError as exc:
            raise ConfigError('Malformed config `{}`: {}'.format(path, exc))
    if overrides:
        values = {k: v for k, v in overrides.items() if v is not None}
        config.from_mapping(_prefixed(values, 'command-line options'))
    return config


def settings(config):
    """
    Snake_case view of the run settings, used for report echoes.
    """
    return {
        key[len(PREFIX):].lower(): value
        for key, value in sorted(config.items())
        if key.startswith(PREFIX)
    }
