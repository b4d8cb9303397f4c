# -*- coding: utf-8 -*-
#
# Pytest configuration
#
# ------------------------------------------------


# imports
# -------
import os
import shutil
import pytest
import logging


# config
# ------
SETTINGS = dict(
    teardown=True,
)
logging.basicConfig(level=logging.ERROR)


# plugins
# -------
pytest_plugins = [
    'tests.fixtures'
]


def pytest_addoption(parser):
    parser.addoption("-N", "--no-teardown", action="store_true", default=False, help="Do not tear down sandbox directory after testing session.")
    return


def pytest_configure(config):
    SETTINGS['teardown'] = not config.getoption('-N')
    return


@pytest.fixture(autouse=True, scope='session')
def sandbox(request):
    from . import SANDBOX

    # create sandbox for testing
    if not os.path.exists(SANDBOX):
        os.makedirs(SANDBOX)

    yield SANDBOX

    # teardown sandbox
    if SETTINGS['teardown']:
        shutil.rmtree(SANDBOX, ignore_errors=True)
    return
