# -*- coding: utf-8 -*-
#
# Fixtures for filter training and tracking.
#
# ------------------------------------------------


# imports
# -------
import os
import pytest
import factory
import numpy as np

from boundary_cf.signal import MaskSpec
from boundary_cf.solvers import RegularizedProblem
from boundary_cf import synth

from . import SANDBOX


# helpers
# -------
def signals(seed, shape, count, stream=0):
    rng = np.random.default_rng([seed, stream])
    return [rng.standard_normal(shape) for _ in range(count)]


# factories
# ---------
class ProblemFactory(factory.Factory):
    """
    Random masked ridge problems with white training windows
    and white responses.
    """

    class Meta:
        model = RegularizedProblem

    class Params:
        seed = factory.Sequence(lambda n: n + 100)
        count = 2
        window = (16, 16)
        support = (8, 8)

    xs = factory.LazyAttribute(lambda o: signals(o.seed, o.window, o.count, 0))
    ys = factory.LazyAttribute(lambda o: signals(o.seed, o.window, o.count, 1))
    lam = 0.01
    mask = factory.LazyAttribute(lambda o: MaskSpec(o.window, o.support))


class IdentityProblemFactory(ProblemFactory):

    class Params:
        window = (8, 8)
        support = (8, 8)


# fixtures
# --------
@pytest.fixture(scope='session')
def sequence():
    yield synth.tracking_sequence(60, seed=7)


@pytest.fixture(scope='session')
def static_sequence():
    yield synth.tracking_sequence(10, seed=11, velocity=(0.0, 0.0))


@pytest.fixture(scope='session')
def localization():
    yield synth.localization_set(60, seed=3)


@pytest.fixture(scope='session')
def workspace(sandbox):
    path = os.path.join(SANDBOX, 'workspace')
    if not os.path.exists(path):
        os.makedirs(path)
    yield path
