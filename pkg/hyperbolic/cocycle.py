"""
Evolution of the linearized cocycle restricted to one invariant bundle.

The full linearized flow is ill-posed; only the restrictions are evolved:
forward on the stable bundle, backward on the unstable one, both ways on
the center. In reduced coordinates y ↦ 𝔅^σ y the evolution solves
ẏ = Λ^σ(θ + ωt) y, and U^σ_θ(t) = 𝔅^σ(θ + ωt) Φ(t) R^σ(θ).
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg, sparse
from scipy.integrate import solve_ivp

from fourier.grid import interpolate, interpolate_points
from hyperbolic.splitting import SplittingData
from utils.errors import CocycleDirectionError, IntegrationError

logger = logging.getLogger(__name__)

RTOL = 1e-11
ATOL = 1e-14
# generator modes below this relative size count as θ-constant
CONSTANT_TOLERANCE = 1e-14


def is_constant(generator: np.ndarray, ell: int) -> bool:
    """True when every nonzero θ-mode of a generator table is round-off."""
    k = (generator.shape[0] - 1) // 2
    centre = generator[(k,) * ell]
    rest = np.array(generator)
    rest[(k,) * ell] = 0.0
    return float(np.abs(rest).max(initial=0.0)) <= CONSTANT_TOLERANCE * max(1.0, float(np.abs(centre).max(initial=0.0)))


@dataclass(frozen=True)
class BundleTables:
    """Interpolation tables of 𝔅^σ, R^σ and Λ^σ."""

    bundle: str
    basis: np.ndarray
    dual: np.ndarray
    generator: np.ndarray
    ell: int
    omega: np.ndarray

    @property
    def size(self) -> int:
        return self.generator.shape[-1]

    @property
    def is_constant(self) -> bool:
        return is_constant(self.generator, self.ell)

    def basis_at(self, theta: np.ndarray) -> np.ndarray:
        return interpolate(self.basis, self.ell, theta).real

    def dual_at(self, theta: np.ndarray) -> np.ndarray:
        return interpolate(self.dual, self.ell, theta).real


def bundle_tables(splitting: SplittingData, bundle: str) -> BundleTables:
    return BundleTables(
        bundle=bundle,
        basis=splitting.modes(splitting.bundle_basis(bundle)),
        dual=splitting.modes(splitting.bundle_dual(bundle)),
        generator=splitting.modes(splitting.generators[bundle]),
        ell=splitting.ell,
        omega=np.asarray(splitting.omega, dtype=float),
    )


def _check_direction(bundle: str, times: np.ndarray) -> None:
    if bundle == "s" and np.any(times < 0):
        raise CocycleDirectionError("the stable bundle can only be evolved forward in time")
    if bundle == "u" and np.any(times > 0):
        raise CocycleDirectionError("the unstable bundle can only be evolved backward in time")


def evolve(generator: np.ndarray, ell: int, omega: Sequence[float], bundle: str, thetas: np.ndarray,
           times: Sequence[float], initial: Optional[np.ndarray] = None,
           integrator: Optional[str] = None) -> np.ndarray:
    """
    Solutions of Ẏ_i = Λ(θ_i + ωt) Y_i, batched over the starting angles θ_i.

    Args:
        generator: θ-modes of Λ, shape (2R+1,)*ℓ + (n, n).
        ell: Number of angles.
        omega: Frequency of the rotation.
        bundle: "s", "u" or "c"; fixes the admissible time direction and
            whether the system is integrated as a stiff one.
        thetas: Starting angles, shape (m, ℓ).
        times: Evaluation times.
        initial: Y_i(0), shape (m, n, p); the identity when None.
        integrator: "expm" for θ-constant generators, "ivp" for time stepping;
            chosen automatically when None.

    Returns:
        Array of shape (len(times), m, n, p).

    Raises:
        CocycleDirectionError: a time of the wrong sign for the bundle.
    """
    times = np.asarray(times, dtype=float).reshape(-1)
    _check_direction(bundle, times)
    thetas = np.asarray(thetas, dtype=float).reshape(-1, ell)
    m, n = thetas.shape[0], generator.shape[-1]
    if initial is None:
        initial = np.broadcast_to(np.eye(n), (m, n, n))
    initial = np.asarray(initial, dtype=float)
    p = initial.shape[-1]
    out = np.empty((times.size, m, n, p))
    if n == 0 or times.size == 0:
        return out
    forward = times >= 0
    if forward.any() and not forward.all():
        out[forward] = evolve(generator, ell, omega, bundle, thetas, times[forward], initial, integrator)
        out[~forward] = evolve(generator, ell, omega, bundle, thetas, times[~forward], initial, integrator)
        return out
    if integrator is None:
        integrator = "expm" if is_constant(generator, ell) else "ivp"
    if integrator == "expm":
        gens = interpolate_points(generator, ell, thetas).real
        for i, t in enumerate(times):
            out[i] = np.einsum("mab,mbp->map", linalg.expm(gens * t), initial)
        return out

    order = np.argsort(np.abs(times), kind="stable")
    t_end = float(times[order[-1]])
    if t_end == 0.0:
        out[:] = initial
        return out
    omega = np.asarray(omega, dtype=float)
    eye = np.eye(p)

    def gens_at(t: float) -> np.ndarray:
        return interpolate_points(generator, ell, thetas + omega * t).real

    def rhs(t, y):
        return np.einsum("mab,mbp->map", gens_at(t), y.reshape(m, n, p)).ravel()

    def jac(t, y):
        return sparse.block_diag([np.kron(g, eye) for g in gens_at(t)], format="csc")

    # the center generator is not stiff; the hyperbolic ones are
    method = "DOP853" if bundle == "c" else "Radau"
    kwargs = {"jac": jac} if method == "Radau" else {}
    sol = solve_ivp(rhs, (0.0, t_end), initial.ravel(), method=method, t_eval=times[order],
                    rtol=RTOL, atol=ATOL, **kwargs)
    if not sol.success:
        raise IntegrationError(f"cocycle integration on bundle {bundle} failed: {sol.message}")
    out[order] = sol.y.T.reshape(times.size, m, n, p)
    return out


def reduced_cocycle(tables: BundleTables, theta: Sequence[float], times: Sequence[float],
                    integrator: Optional[str] = None) -> np.ndarray:
    """
    Φ_θ(t) for every t in times, shape (len(times), n_σ, n_σ).

    Args:
        tables: Interpolation tables of the bundle.
        theta: Starting angle.
        times: Evolution times, all of the admissible sign for the bundle.
        integrator: "expm" or "ivp"; chosen automatically when None.
    """
    theta = np.asarray(theta, dtype=float).reshape(1, tables.ell)
    return evolve(tables.generator, tables.ell, tables.omega, tables.bundle, theta, times,
                  integrator=integrator)[:, 0]


def cocycle_evolve(splitting: SplittingData, theta: Sequence[float], t: float, bundle: str,
                   integrator: Optional[str] = None, tables: Optional[BundleTables] = None) -> np.ndarray:
    """
    U^σ_θ(t) as a D×D matrix: zero on the complementary bundles.

    Raises:
        CocycleDirectionError: forward evolution on the unstable bundle or
            backward evolution on the stable one.
    """
    tables = tables or bundle_tables(splitting, bundle)
    theta = np.asarray(theta, dtype=float).reshape(splitting.ell)
    phi = reduced_cocycle(tables, theta, [t], integrator)[0]
    return tables.basis_at(theta + tables.omega * t) @ phi @ tables.dual_at(theta)
