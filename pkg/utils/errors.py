"""
Exception hierarchy for the torus solver.

Every exception carries the process exit code the CLI reports for it:
2 for validation failures, 3 for numerical failures, 4 for config errors.
"""
from typing import Any, Dict, Optional


class SolverError(RuntimeError):
    """Base exception of the solver."""

    exit_code: int = 3

    def __init__(self, message: str, *, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details: Dict[str, Any] = dict(details or {})


# ---------------------------------------------------------------------------
# Configuration

class ConfigError(SolverError):
    """Invalid run configuration."""

    exit_code = 4


class ConfigFileError(ConfigError):
    """Config file could not be parsed or validated (message carries path:line)."""


# ---------------------------------------------------------------------------
# Validation

class ValidationFailure(SolverError):
    """An a-posteriori ledger or a comparison did not pass."""

    exit_code = 2


class PhaseAlignmentError(ValidationFailure):
    """No phase aligns the two tori: they are genuinely distinct."""


# ---------------------------------------------------------------------------
# Numerical failures

class NumericalError(SolverError):
    """Base class of numerical failures."""

    exit_code = 3


class StructuralError(NumericalError):
    """Incompatible table shapes (angle dimension, component count)."""


class ConstraintError(NumericalError):
    """Zero-mean or parity constraint violated on input."""


class DegenerateParameterError(NumericalError):
    """Model parameter on the excluded set (4π²μj² = 1, or empty center)."""


class ResonanceError(NumericalError):
    """Exact resonance of a frequency vector or a Lindstedt multiplier."""


class TruncationResonanceError(ResonanceError):
    """Singular truncated linear system; a larger Kθ may help."""


class LindstedtConsistencyError(NumericalError):
    """Kernel matching produced the wrong number of conditions."""


class PerturbationTooLargeError(NumericalError):
    """Graph-transform contraction factor is not below one."""


class CocycleDirectionError(NumericalError):
    """Evolution requested in the ill-posed direction of a bundle."""


class IntegrationError(NumericalError):
    """Time stepping of a restricted cocycle did not complete."""


class NoDichotomyError(NumericalError):
    """Fitted decay rates are not positive."""


class SolvabilityError(NumericalError):
    """Cohomology right-hand side has a non-negligible average."""


class GeometryError(NumericalError):
    """Symplectic form degenerate on the center fiber."""


class DegenerateEmbeddingError(GeometryError):
    """Tangent frame DK is rank deficient."""


class TwistError(NumericalError):
    """Averaged twist matrix is singular."""


class ExactnessViolationError(NumericalError):
    """Center obstruction average exceeds its quadratic allowance."""


class NewtonDivergenceError(NumericalError):
    """Residual increased on consecutive Newton steps."""


class ScheduleExhaustedError(NumericalError):
    """Strip width would fall below the schedule floor."""


class NewtonStepError(NumericalError):
    """A sub-solver failed inside a Newton step."""

    def __init__(self, step: int, cause: SolverError):
        super().__init__(f"Newton step {step} failed: {cause}", details={"step": step, **cause.details})
        self.step = step
        self.exit_code = cause.exit_code
