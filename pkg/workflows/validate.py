"""
Validate workflow: a-posteriori ledger of a torus file.
"""
from typing import Optional

from models.boussinesq import get_model
from newton.aposteriori import AposterioriLedger, aposteriori_check
from newton.schedule import Schedule
from newton.state import load_solution
from utils.errors import ConfigError, ValidationFailure
from workflows.base import BaseStage, Emit, _silent
from workflows.common import write_csv, write_text


class ValidateStage(BaseStage):
    """Evaluate the ledger at a stored torus; a red line is a validation failure."""

    def __init__(self):
        super().__init__("Validate")

    async def _run(self, torus_path: Optional[str] = None, emit: Optional[Emit] = None) -> AposterioriLedger:
        emit = emit or _silent
        if not torus_path:
            raise ConfigError("validate needs a torus file (--torus PATH)")
        name, mu, K, omega = load_solution(torus_path)
        model = get_model(name, mu)
        emit("LEDGER_STARTED")
        ledger = await self.offload(aposteriori_check, model, K, omega, Schedule.from_config())
        write_text("ledger.json", ledger.to_json())
        write_csv("ledger.csv", ledger.to_frame())
        if not ledger.passed:
            failed = [line.name for line in ledger.lines if not line.passed]
            emit(f"LEDGER_FAILED: {failed}")
            raise ValidationFailure(f"a-posteriori ledger failed on {failed}", details={"failed": failed})
        emit("LEDGER_PASSED" + (": trivial torus" if ledger.trivial else ""))
        return ledger


# Singleton instance
_validate_stage = ValidateStage()


async def run_validate(torus_path: Optional[str] = None, emit: Optional[Emit] = None) -> AposterioriLedger:
    """Wrapper for easy import."""
    return await _validate_stage.execute(torus_path=torus_path, emit=emit)
