import math
import os
import sys

import pytest

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from config import Config, Settings, apply_settings  # noqa: E402
from models.boussinesq import BoussinesqScalar, BoussinesqSystem  # noqa: E402

MU = 1.0 / (8.0 * math.pi ** 2)
SMALL = 8


@pytest.fixture
def scalar():
    return BoussinesqScalar(MU)


@pytest.fixture
def system():
    return BoussinesqSystem(MU)


@pytest.fixture
def small_config(tmp_path):
    """Desk-scale truncation with outputs under tmp_path; restores the defaults afterwards."""
    saved = Settings.model_validate(Config.model_dump(exclude={"STATE_DIR", "TORUS_DIR", "EFFECTIVE_DELTA1"}))
    apply_settings(Settings(K_THETA=SMALL, K_X=SMALL, OUT_DIR=str(tmp_path / "runs"), THREADS=2))
    yield Config
    apply_settings(saved)


@pytest.fixture
def scalar_seed(scalar, small_config):
    from lindstedt.recursion import assemble_seed, build_series
    series = build_series(scalar, [1.0], 3)
    K, omega = assemble_seed(series, 1e-2, SMALL, SMALL)
    return series, K, omega


def _converged(model, epsilon, out_dir):
    """Newton run from the order-3 seed at ε on the small truncation, under its own settings."""
    from lindstedt.recursion import assemble_seed, build_series
    from newton.iteration import run
    saved = Settings.model_validate(Config.model_dump(exclude={"STATE_DIR", "TORUS_DIR", "EFFECTIVE_DELTA1"}))
    apply_settings(Settings(MODEL=model.name, K_THETA=SMALL, K_X=SMALL, OUT_DIR=str(out_dir), THREADS=2))
    try:
        series = build_series(model, [1.0], 3)
        K, omega = assemble_seed(series, epsilon, SMALL, SMALL)
        state, report = run(model, K, omega)
    finally:
        apply_settings(saved)
    return series, state, report


@pytest.fixture(scope="session")
def converged_scalar(tmp_path_factory):
    return _converged(BoussinesqScalar(MU), 1e-2, tmp_path_factory.mktemp("scalar"))


@pytest.fixture(scope="session")
def converged_system(tmp_path_factory):
    return _converged(BoussinesqSystem(MU), 1e-2, tmp_path_factory.mktemp("system"))


@pytest.fixture(scope="session")
def converged_scalar_small(tmp_path_factory):
    return _converged(BoussinesqScalar(MU), 5e-3, tmp_path_factory.mktemp("scalar_small"))
