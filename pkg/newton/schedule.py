"""
Analyticity-loss schedule of the Newton iteration.

State m works on the strip ρ_m with loss δ_m: ρ_m = ρ_{m−1} − 3δ_{m−1} and
δ_m = δ₁/2^m, so the strips decrease to ρ_∞ = ρ₀ − 6δ₁.
"""
from dataclasses import dataclass
from typing import Optional

from config import Config
from utils.errors import ScheduleExhaustedError


@dataclass(frozen=True)
class Schedule:
    rho0: float
    delta1: float

    def __post_init__(self):
        if not self.rho0 > 0:
            raise ValueError("ρ₀ must be positive")
        if not 0 < self.delta1 <= self.rho0 / 12.0:
            raise ValueError("δ₁ must lie in (0, ρ₀/12]")

    @classmethod
    def from_config(cls, rho0: Optional[float] = None, delta1: Optional[float] = None) -> "Schedule":
        rho0 = Config.RHO0 if rho0 is None else rho0
        if delta1 is None:
            delta1 = Config.DELTA1 if Config.DELTA1 is not None and rho0 == Config.RHO0 else rho0 / 12.0
        return cls(rho0=rho0, delta1=delta1)

    @property
    def rho_inf(self) -> float:
        return self.rho0 - 6.0 * self.delta1

    def delta(self, m: int) -> float:
        return self.delta1 / 2.0 ** m

    def rho(self, m: int) -> float:
        """ρ_m, checked against the floor ρ_∞."""
        value = self.rho0 - 6.0 * self.delta1 * (1.0 - 0.5 ** m)
        if m > 0 and not value > self.rho_inf:
            raise ScheduleExhaustedError(f"strip width at step {m} reaches the floor ρ_∞={self.rho_inf:.6g}",
                                         details={"step": m, "rho": value})
        return value
