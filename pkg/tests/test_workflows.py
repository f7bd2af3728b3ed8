import json
from pathlib import Path
from types import SimpleNamespace
from unittest.mock import patch

import pandas as pd
import pytest

from fourier.torus_map import TorusMap
from models.boussinesq import BoussinesqScalar
from models.spectrum import center_analysis
from newton.state import save_solution
from utils.errors import ConfigError, DegenerateParameterError, NewtonDivergenceError, ValidationFailure
from workflows import run_kam, run_lindstedt, run_spectrum, run_uniqueness, run_validate
from workflows.common import amplitudes_for


@pytest.mark.asyncio
async def test_spectrum_writes_reports(small_config):
    messages = []
    report = await run_spectrum(emit=messages.append)
    out = Path(small_config.OUT_DIR)
    assert report.ell == 1
    assert json.loads((out / "spectrum.json").read_text())["center_modes"] == [1]
    frame = pd.read_csv(out / "spectrum.csv")
    assert list(frame.columns) == ["j", "re_sigma", "im_sigma", "class"]
    assert (out / "growth.csv").exists()
    assert messages[0] == "CENTER_ANALYSIS_STARTED"


@pytest.mark.asyncio
async def test_stage_failure_is_reraised(small_config):
    with patch("workflows.spectrum.center_analysis", side_effect=DegenerateParameterError("degenerate")):
        with pytest.raises(DegenerateParameterError):
            await run_spectrum()


@pytest.mark.asyncio
async def test_lindstedt_writes_series_and_seed(small_config):
    report = await run_lindstedt()
    out = Path(small_config.OUT_DIR)
    for name in ("lindstedt.json", "series.json", "seed.json", "slope.csv"):
        assert (out / name).exists()
    assert report.fitted_slope == pytest.approx(small_config.LINDSTEDT_ORDER + 1, abs=0.1)


@pytest.mark.asyncio
async def test_validate_trivial_torus(small_config, tmp_path):
    model = BoussinesqScalar(small_config.MU)
    K = TorusMap.zeros(1, 2, 8, 8, parity=model.component_parity, zero_mean=True)
    path = tmp_path / "zero.json"
    save_solution(model, K, center_analysis(model).omega0, str(path))
    ledger = await run_validate(torus_path=str(path))
    assert ledger.trivial
    assert (Path(small_config.OUT_DIR) / "ledger.csv").exists()


@pytest.mark.asyncio
async def test_validate_needs_a_torus(small_config):
    with pytest.raises(ConfigError):
        await run_validate()


@pytest.mark.asyncio
async def test_validate_reports_red_ledger(small_config, tmp_path):
    model = BoussinesqScalar(small_config.MU)
    # a large off-torus embedding fails the smallness line
    K = TorusMap.trig(1, [1], 1, amplitude=0.2, d=2, k_theta_max=8, k_x_max=8).with_parity(model.component_parity)
    path = tmp_path / "far.json"
    save_solution(model, K, center_analysis(model).omega0, str(path))
    with pytest.raises(ValidationFailure):
        await run_validate(torus_path=str(path))


def test_single_amplitude_is_broadcast(small_config):
    small_config.AMPLITUDES = [0.5]
    assert amplitudes_for(3).tolist() == [0.5, 0.5, 0.5]
    small_config.AMPLITUDES = [0.5, 1.0]
    with pytest.raises(ConfigError):
        amplitudes_for(3)


def _ledger(passed):
    lines = [SimpleNamespace(name="residual", passed=True), SimpleNamespace(name="smallness", passed=passed)]
    return SimpleNamespace(passed=passed, lines=lines, to_json=lambda: "{}")


@pytest.mark.asyncio
async def test_failed_precheck_stops_the_run(small_config):
    messages = []
    with patch("workflows.kam_run.aposteriori_check", return_value=_ledger(False)):
        with pytest.raises(ValidationFailure) as exc:
            await run_kam(emit=messages.append)
    assert exc.value.details["failed"] == ["smallness"]
    assert messages[-1] == "PRECHECK_FAILED: ['smallness']"
    assert not (Path(small_config.STATE_DIR) / "state_000.json").exists()


@pytest.mark.asyncio
async def test_forced_run_dumps_states_and_resumes(small_config):
    small_config.FORCE = True
    with patch("workflows.kam_run.aposteriori_check", return_value=_ledger(False)):
        state, report = await run_kam()
    out, states = Path(small_config.OUT_DIR), Path(small_config.STATE_DIR)
    assert report.converged
    assert report.heuristic
    assert report.epsilon == small_config.EPSILON
    for m in range(state.m + 1):
        assert (states / f"state_{m:03d}.json").exists()
    for name in ("precheck.json", "run_report.json", "steps.csv", "splitting.json"):
        assert (out / name).exists()
    assert len(pd.read_csv(out / "steps.csv")) == state.m + 1
    splitting = json.loads((out / "splitting.json").read_text())
    assert splitting["rank_c"] == 2
    assert 0.0 < splitting["contraction"] < 1.0
    assert splitting["refinement"] is None

    # the resumed run repeats the remaining steps
    resumed, again = await run_kam(resume=str(states / "state_001.json"))
    assert again.converged
    assert resumed.m == state.m
    assert resumed.residual == pytest.approx(state.residual, rel=1e-6, abs=1e-13)


@pytest.mark.asyncio
async def test_step_cap_is_a_divergence(small_config):
    small_config.MAX_ITER = 1
    with patch("workflows.kam_run.aposteriori_check", return_value=_ledger(True)):
        with pytest.raises(NewtonDivergenceError) as exc:
            await run_kam()
    assert len(exc.value.details["residuals"]) == 2
    assert exc.value.exit_code == 3
    out = Path(small_config.OUT_DIR)
    assert (Path(small_config.STATE_DIR) / "state_001.json").exists()
    assert (out / "splitting.json").exists()
    assert not json.loads((out / "run_report.json").read_text())["converged"]


@pytest.mark.asyncio
async def test_uniqueness_recovers_the_phase_shift(small_config):
    report = await run_uniqueness()
    assert report.tau0 == [pytest.approx(0.37)]
    assert report.tau_error <= 1e-6
    assert report.alignment.distance <= 1e-9
    assert all(r <= 1e-11 for r in report.residuals)
    assert (Path(small_config.OUT_DIR) / "uniqueness.json").exists()
