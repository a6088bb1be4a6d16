"""Shared fixtures for specwave tests."""

import json
import logging
import math

import numpy as np
import pytest

from specwave import build_dirichlet_1d, build_matrix_backend


@pytest.fixture(autouse=True)
def reset_logging():
    """Undo handler, level and warning-capture changes made by setup_logging."""
    yield
    logging.captureWarnings(False)
    for name in ("specwave", "py.warnings"):
        logger = logging.getLogger(name)
        logger.handlers.clear()
        logger.setLevel(logging.NOTSET)


@pytest.fixture
def small_dirichlet():
    """A coarse Dirichlet Laplacian on [0, 20 pi] with 64 modes."""
    return build_dirichlet_1d(20.0 * math.pi, 64)


@pytest.fixture
def single_mode():
    """The 1x1 operator [[1.0]]: one mode with lambda = 1."""
    return build_matrix_backend(np.array([[1.0]]))


@pytest.fixture
def out_dir(tmp_path):
    """An output directory that does not exist yet."""
    return tmp_path / "out"


@pytest.fixture
def write_config(tmp_path):
    """Write a JSON config and return its path."""

    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    return _write


@pytest.fixture
def fast_linear_config():
    """Raw config for a quick linear run on a short interval."""
    return {
        "backend": {"kind": "dirichlet-1d", "L_over_pi": 200, "N": 512},
        "T": 100.0,
        "fit_window": [10.0, 80.0],
        "n_times": 60,
    }
