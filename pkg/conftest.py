import numpy as np
import pytest

from main import app as flask_app


@pytest.fixture
def app():
    """Flask application for pytest-flask's client fixture"""
    flask_app.config.update(TESTING=True)
    return flask_app


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
