import os

import pytest

from app import create_app

os.environ.setdefault('METRO_ENV', 'testing')


@pytest.fixture(scope='session')
def test_app():
    """ Create and configure a new app instance for each test session. """
    test_app = create_app('testing')
    yield test_app


@pytest.fixture(scope='session')
def test_config(test_app):
    """ Numerical settings of the testing configuration. """
    return test_app.config
