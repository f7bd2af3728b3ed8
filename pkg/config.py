"""
Configuration management for the whiskered torus solver.
"""
import math
from typing import List, Literal, Optional
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field, computed_field, field_validator, model_validator


class Settings(BaseSettings):
    """Central configuration class using Pydantic."""

    # Model settings
    MODEL: Literal["boussinesq-scalar", "boussinesq-system"] = Field(
        default="boussinesq-scalar", description="PDE model")
    MU: float = Field(default=1.0 / (8.0 * math.pi ** 2), description="Dispersion parameter μ")
    NU: Optional[float] = Field(default=None, description="Diophantine exponent (default ℓ-1)")
    RHO0: float = Field(default=0.02, description="Initial strip half-width ρ₀")
    SOBOLEV_M: int = Field(default=3, description="Sobolev index m of the X space")

    # Truncation
    K_THETA: int = Field(default=16, description="Angle truncation radius Kθ (|k|₁ ≤ Kθ)")
    K_X: int = Field(default=16, description="Space truncation radius Kx")
    N_GRID: int = Field(default=0, description="θ-grid points per angle (0 = automatic)")
    REFINEMENT_CHECK: bool = Field(default=False, description="Report the change of Π^c under Kx doubling at the final torus")

    # Lindstedt seeding
    LINDSTEDT_ORDER: int = Field(default=3, description="Lindstedt truncation order N")
    AMPLITUDES: List[float] = Field(default=[1.0], description="Order-1 amplitudes A¹, one per center mode")
    EPSILON: float = Field(default=1e-2, description="Seed amplitude ε")
    EPSILON_GRID: List[float] = Field(
        default=[1e-4, 3.1622776601683795e-4, 1e-3, 3.1622776601683795e-3, 1e-2],
        description="ε values of the residual slope fit")
    OMEGA: Optional[List[float]] = Field(default=None, description="Frequency override (else ω_ε of the series)")

    # Tolerances
    TAU_PROJ: float = Field(default=1e-9, description="Projection algebra tolerance")
    TAU_FP: float = Field(default=1e-10, description="Graph-transform fixed-point tolerance")
    TAU_TAIL: float = Field(default=1e-12, description="Duhamel tail truncation tolerance")
    TAU_AVG: float = Field(default=1e-10, description="Cohomology average tolerance")
    NEWTON_TOL: float = Field(default=1e-11, description="Target ‖E‖_Y")
    RESIDUAL_FLOOR: float = Field(default=1e-12, description="Absolute binary64 residual floor")

    # Schedule and Newton loop
    DELTA1: Optional[float] = Field(default=None, description="First analyticity loss δ₁ (default ρ₀/12)")
    MAX_ITER: int = Field(default=8, description="Maximum Newton steps")
    FRAME_REFRESH: Literal["every-step", "lagged"] = Field(
        default="every-step", description="Splitting refresh policy")
    HYPERBOLIC_SOLVER: Literal["duhamel", "direct"] = Field(
        default="duhamel", description="Solver used on the stable/unstable bundles")

    # Rate estimation
    RATE_THETA_SAMPLES: int = Field(default=4, description="θ samples per rate fit")
    CENTER_HORIZON: float = Field(default=50.0, description="Horizon of the center growth fit")

    # Uniqueness
    PHASE_SHIFT: float = Field(default=0.37, description="Seed phase shift τ₀ of the uniqueness workflow")
    ALIGN_TOL: float = Field(default=1e-6, description="Relative aligned distance above which tori are distinct")

    # Output and runtime
    OUT_DIR: str = "runs"
    SEED: int = Field(default=0, description="Seed of randomized test vectors")
    THREADS: int = Field(default=4, description="Worker threads cap")
    FORCE: bool = Field(default=False, description="Run even when the a-posteriori precheck fails")

    @computed_field
    def STATE_DIR(self) -> str:
        return f"{self.OUT_DIR}/states"

    @computed_field
    def TORUS_DIR(self) -> str:
        return f"{self.OUT_DIR}/tori"

    @computed_field
    def EFFECTIVE_DELTA1(self) -> float:
        return self.DELTA1 if self.DELTA1 is not None else self.RHO0 / 12.0

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    @field_validator("TAU_PROJ", "TAU_FP", "TAU_TAIL", "TAU_AVG", "NEWTON_TOL", "RESIDUAL_FLOOR",
                     "MU", "RHO0", "EPSILON", "ALIGN_TOL", "CENTER_HORIZON")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("must be > 0")
        return value

    @field_validator("K_THETA", "K_X", "LINDSTEDT_ORDER", "MAX_ITER", "THREADS", "RATE_THETA_SAMPLES")
    @classmethod
    def _positive_int(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be ≥ 1")
        return value

    @field_validator("EPSILON_GRID")
    @classmethod
    def _grid(cls, value: List[float]) -> List[float]:
        if len(value) < 2 or any(e <= 0 for e in value):
            raise ValueError("needs at least two positive values")
        return sorted(value)

    @model_validator(mode="after")
    def _model_indices(self) -> "Settings":
        if self.MODEL == "boussinesq-scalar" and self.SOBOLEV_M < 3:
            raise ValueError("SOBOLEV_M must be ≥ 3 for the scalar model (m > 5/2)")
        if self.SOBOLEV_M < 1:
            raise ValueError("SOBOLEV_M must be ≥ 1")
        if self.DELTA1 is not None and not 0 < self.DELTA1 <= self.RHO0 / 12.0:
            raise ValueError("DELTA1 must lie in (0, RHO0/12]")
        if self.N_GRID and self.N_GRID < 4 * self.K_THETA + 1:
            raise ValueError("N_GRID must be 0 or ≥ 4*K_THETA+1")
        return self


# Global singleton instance
Config = Settings()


def apply_settings(settings: Settings) -> Settings:
    """Copy validated settings onto the Config singleton in place (modules hold a reference to it)."""
    for name in Settings.model_fields:
        setattr(Config, name, getattr(settings, name))
    return Config
