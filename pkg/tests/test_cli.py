import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import importlib
from unittest.mock import AsyncMock, patch

import pytest

from cli.main import main
from config import Config
from fourier.torus_map import TorusMap
from models.boussinesq import BoussinesqScalar
from models.spectrum import center_analysis
from newton.state import save_solution
from utils.errors import NewtonDivergenceError


def test_print_config_is_loadable(capsys, small_config):
    assert main(["--print-config"]) == 0
    printed = tomllib.loads(capsys.readouterr().out)
    assert printed["truncation"]["k_theta"] == 16


def test_command_required(small_config):
    with pytest.raises(SystemExit):
        main([])


def test_spectrum_command(tmp_path, small_config):
    out = tmp_path / "spectrum"
    assert main(["spectrum", "--out", str(out), "--threads", "1"]) == 0
    assert (out / "spectrum.json").exists()
    assert (out / "spectrum.csv").exists()


def test_degenerate_mu_is_a_numerical_failure(tmp_path, small_config):
    config = tmp_path / "degenerate.toml"
    config.write_text(f"[model]\nmu = {1.0 / (4.0 * math.pi ** 2)!r}\n", encoding="utf-8")
    assert main(["spectrum", "--config", str(config), "--out", str(tmp_path / "out")]) == 3


def test_invalid_config_exit_code(tmp_path, small_config):
    config = tmp_path / "bad.toml"
    config.write_text("[truncation]\nk_theta = 0\n", encoding="utf-8")
    assert main(["spectrum", "--config", str(config)]) == 4


def test_missing_config_file(tmp_path, small_config):
    assert main(["spectrum", "--config", str(tmp_path / "absent.toml")]) == 4


def test_validate_without_torus(tmp_path, small_config):
    assert main(["validate", "--out", str(tmp_path / "out")]) == 4


def test_validate_zero_torus(tmp_path, small_config):
    model = BoussinesqScalar(small_config.MU)
    K = TorusMap.zeros(1, 2, 4, 4, parity=model.component_parity, zero_mean=True)
    path = tmp_path / "zero.json"
    save_solution(model, K, center_analysis(model).omega0, str(path))
    assert main(["validate", "--torus", str(path), "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "ledger.json").exists()


def test_kam_run_divergence_exit_code(tmp_path, small_config):
    failing = AsyncMock(side_effect=NewtonDivergenceError("residual increased"))
    with patch.object(importlib.import_module("cli.main"), "run_kam", failing):
        assert main(["kam-run", "--out", str(tmp_path / "out")]) == 3
    failing.assert_awaited_once()


def test_kam_run_force_and_resume(tmp_path, small_config):
    runner = AsyncMock(return_value=None)
    state = str(tmp_path / "state_002.json")
    with patch.object(importlib.import_module("cli.main"), "run_kam", runner):
        assert main(["kam-run", "--force", "--resume", state, "--out", str(tmp_path / "out")]) == 0
    assert Config.FORCE
    assert runner.await_args.kwargs["resume"] == state
    assert runner.await_args.kwargs["seed_path"] is None


def test_refinement_check_key_loads(tmp_path, small_config):
    config = tmp_path / "refine.toml"
    config.write_text("[truncation]\nrefinement_check = true\n", encoding="utf-8")
    with patch.object(importlib.import_module("cli.main"), "run_kam", AsyncMock(return_value=None)):
        assert main(["kam-run", "--config", str(config), "--out", str(tmp_path / "out")]) == 0
    assert Config.REFINEMENT_CHECK
