"""
Finite Fourier tables for real-analytic maps 𝕋^ℓ × 𝕋 → ℝ^d.

A TorusMap stores the coefficients c(k, j) of

    f(θ, x) = Σ_{|k|₁ ≤ Kθ, |j| ≤ Kx} c(k, j) e^{2πi(k·θ + jx)}

as a dense complex array of shape (d, 2Kθ+1, …, 2Kθ+1, 2Kx+1) with ℓ angle
axes. Entries outside the |k|₁ ≤ Kθ diamond are held at zero. Tables are
immutable; every operation returns a new table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np
from scipy import signal

from utils.errors import StructuralError


class Parity(str, Enum):
    """Symmetry of one component under a sign flip of θ (or of x)."""

    EVEN = "even"
    ODD = "odd"
    NONE = "none"

    def flipped(self) -> "Parity":
        if self is Parity.EVEN:
            return Parity.ODD
        if self is Parity.ODD:
            return Parity.EVEN
        return Parity.NONE

    def times(self, other: "Parity") -> "Parity":
        if Parity.NONE in (self, other):
            return Parity.NONE
        return Parity.EVEN if self is other else Parity.ODD

    def plus(self, other: "Parity") -> "Parity":
        return self if self is other else Parity.NONE


ParityPair = Tuple[Parity, Parity]
NO_PARITY: ParityPair = (Parity.NONE, Parity.NONE)


def k_grid(ell: int, k_max: int) -> np.ndarray:
    """Integer vectors k on the (2K+1)^ℓ box, shape (2K+1,)*ℓ + (ℓ,)."""
    ks = np.arange(-k_max, k_max + 1)
    if ell == 0:
        return np.zeros((0,), dtype=int)
    return np.stack(np.meshgrid(*([ks] * ell), indexing="ij"), axis=-1)


def theta_l1(ell: int, k_max: int) -> np.ndarray:
    return np.abs(k_grid(ell, k_max)).sum(axis=-1)


def theta_mask(ell: int, k_max: int) -> np.ndarray:
    return theta_l1(ell, k_max) <= k_max


def j_values(kx_max: int) -> np.ndarray:
    return np.arange(-kx_max, kx_max + 1)


def _center_slices(ell: int, k_from: int, k_to: int, kx_from: int, kx_to: int) -> tuple:
    """Slices placing a (k_from, kx_from) box inside a larger (k_to, kx_to) box."""
    dk = k_to - k_from
    dx = kx_to - kx_from
    return (slice(None),) + (slice(dk, dk + 2 * k_from + 1),) * ell + (slice(dx, dx + 2 * kx_from + 1),)


@dataclass(frozen=True)
class TorusMap:
    """Fourier table of a d-component map on 𝕋^ℓ × 𝕋."""

    coeffs: np.ndarray
    ell: int
    k_theta_max: int
    k_x_max: int
    parity: Optional[Tuple[ParityPair, ...]] = None
    zero_mean: bool = False

    def __post_init__(self):
        if self.ell < 1 or self.ell > 3:
            raise StructuralError(f"angle dimension ℓ={self.ell} outside 1..3")
        arr = np.array(self.coeffs, dtype=np.complex128)
        expected = (2 * self.k_theta_max + 1,) * self.ell + (2 * self.k_x_max + 1,)
        if arr.ndim != self.ell + 2 or arr.shape[1:] != expected:
            raise StructuralError(f"coefficient shape {arr.shape} does not match (d,)+{expected}")
        arr = arr * theta_mask(self.ell, self.k_theta_max)[None, ..., None]
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        parity = self.parity if self.parity is not None else (NO_PARITY,) * arr.shape[0]
        if len(parity) != arr.shape[0]:
            raise StructuralError("one parity pair per component is required")
        object.__setattr__(self, "parity", tuple((Parity(p[0]), Parity(p[1])) for p in parity))

    # ------------------------------------------------------------------
    # Construction

    @classmethod
    def zeros(cls, ell: int, d: int, k_theta_max: int, k_x_max: int,
              parity: Optional[Tuple[ParityPair, ...]] = None, zero_mean: bool = False) -> "TorusMap":
        shape = (d,) + (2 * k_theta_max + 1,) * ell + (2 * k_x_max + 1,)
        return cls(np.zeros(shape, dtype=np.complex128), ell, k_theta_max, k_x_max, parity, zero_mean)

    @classmethod
    def constant(cls, ell: int, values: Sequence[complex], k_theta_max: int = 0, k_x_max: int = 0) -> "TorusMap":
        out = cls.zeros(ell, len(values), k_theta_max, k_x_max, parity=((Parity.EVEN, Parity.EVEN),) * len(values))
        arr = np.array(out.coeffs)
        arr[(slice(None),) + (k_theta_max,) * ell + (k_x_max,)] = np.asarray(values, dtype=np.complex128)
        return out.with_coeffs(arr)

    @classmethod
    def trig(cls, ell: int, k: Sequence[int], j: int, *, theta: str = "cos", x: str = "cos",
             amplitude: float = 1.0, component: int = 0, d: int = 1,
             k_theta_max: Optional[int] = None, k_x_max: Optional[int] = None) -> "TorusMap":
        """
        Table of amplitude·f(2πk·θ)·g(2πjx) in one component, f, g ∈ {cos, sin}.
        """
        k = np.asarray(k, dtype=int).reshape(ell)
        kt = int(np.abs(k).sum()) if k_theta_max is None else k_theta_max
        kx = abs(j) if k_x_max is None else k_x_max
        if np.abs(k).sum() > kt or abs(j) > kx:
            raise StructuralError("trig term outside the requested truncation")
        shape = (d,) + (2 * kt + 1,) * ell + (2 * kx + 1,)
        arr = np.zeros(shape, dtype=np.complex128)

        def weight(kind: str, sign: int) -> complex:
            return 0.5 if kind == "cos" else sign / 2j

        for s1 in (1, -1):
            for s2 in (1, -1):
                idx = (component,) + tuple(int(s1 * ki + kt) for ki in k) + (s2 * j + kx,)
                arr[idx] += amplitude * weight(theta, s1) * weight(x, s2)
        kinds = {"cos": Parity.EVEN, "sin": Parity.ODD}
        parity = [NO_PARITY] * d
        parity[component] = (kinds[theta], kinds[x])
        for c in range(d):
            if c != component:
                parity[c] = (Parity.EVEN, Parity.EVEN)
        return cls(arr, ell, kt, kx, tuple(parity), zero_mean=(j != 0))

    def with_coeffs(self, coeffs: np.ndarray, parity: Optional[Tuple[ParityPair, ...]] = None,
                    zero_mean: Optional[bool] = None) -> "TorusMap":
        return TorusMap(coeffs, self.ell, self.k_theta_max, self.k_x_max,
                        self.parity if parity is None else parity,
                        self.zero_mean if zero_mean is None else zero_mean)

    def with_parity(self, parity: Tuple[ParityPair, ...]) -> "TorusMap":
        return self.with_coeffs(self.coeffs, parity=parity)

    # ------------------------------------------------------------------
    # Inspection

    @property
    def d(self) -> int:
        return self.coeffs.shape[0]

    def index(self, k: Sequence[int], j: int) -> tuple:
        return tuple(int(ki) + self.k_theta_max for ki in k) + (int(j) + self.k_x_max,)

    def coeff(self, k: Sequence[int], j: int) -> np.ndarray:
        """Complex d-vector c(k, j); zero outside the truncation."""
        if np.abs(np.asarray(k)).sum() > self.k_theta_max or abs(j) > self.k_x_max:
            return np.zeros(self.d, dtype=np.complex128)
        return self.coeffs[(slice(None),) + self.index(k, j)]

    def entries(self) -> Iterator[Tuple[Tuple[int, ...], int, np.ndarray]]:
        """Nonzero entries in lexicographic (k, j) order."""
        kt, kx = self.k_theta_max, self.k_x_max
        for pos in np.ndindex(*self.coeffs.shape[1:]):
            vec = self.coeffs[(slice(None),) + pos]
            if np.any(vec != 0):
                yield tuple(int(p) - kt for p in pos[:-1]), int(pos[-1]) - kx, vec

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def pad(self, k_theta_max: int, k_x_max: int) -> "TorusMap":
        if k_theta_max < self.k_theta_max or k_x_max < self.k_x_max:
            raise StructuralError("pad cannot shrink a table; use truncate")
        shape = (self.d,) + (2 * k_theta_max + 1,) * self.ell + (2 * k_x_max + 1,)
        arr = np.zeros(shape, dtype=np.complex128)
        arr[_center_slices(self.ell, self.k_theta_max, k_theta_max, self.k_x_max, k_x_max)] = self.coeffs
        return TorusMap(arr, self.ell, k_theta_max, k_x_max, self.parity, self.zero_mean)

    def truncate(self, k_theta_max: int, k_x_max: int) -> Tuple["TorusMap", float]:
        """Restrict to smaller radii; returns the table and the discarded ℓ² tail."""
        if k_theta_max >= self.k_theta_max and k_x_max >= self.k_x_max:
            return self.pad(k_theta_max, k_x_max), 0.0
        kt = min(k_theta_max, self.k_theta_max)
        kx = min(k_x_max, self.k_x_max)
        sl = _center_slices(self.ell, kt, self.k_theta_max, kx, self.k_x_max)
        kept = np.array(self.coeffs[sl]) * theta_mask(self.ell, kt)[None, ..., None]
        rest = np.array(self.coeffs)
        rest[sl] -= kept
        tail = math.sqrt(math.fsum(np.abs(rest.ravel()) ** 2))
        out = TorusMap(kept, self.ell, kt, kx, self.parity, self.zero_mean)
        return out.pad(k_theta_max, k_x_max), tail

    def reality_defect(self) -> float:
        """max |c(−k,−j) − conj c(k,j)| over all entries."""
        flipped = self.coeffs[(slice(None),) + (slice(None, None, -1),) * (self.ell + 1)]
        return float(np.max(np.abs(flipped - np.conj(self.coeffs)), initial=0.0))

    def parity_defect(self) -> float:
        """Largest deviation of the coefficients from the declared parities."""
        worst = 0.0
        for c, (pt, px) in enumerate(self.parity):
            arr = self.coeffs[c]
            if pt is not Parity.NONE:
                sign = 1.0 if pt is Parity.EVEN else -1.0
                flipped = arr[(slice(None, None, -1),) * self.ell + (slice(None),)]
                worst = max(worst, float(np.max(np.abs(arr - sign * flipped), initial=0.0)))
            if px is not Parity.NONE:
                sign = 1.0 if px is Parity.EVEN else -1.0
                worst = max(worst, float(np.max(np.abs(arr - sign * arr[..., ::-1]), initial=0.0)))
        return worst

    # ------------------------------------------------------------------
    # Grid transforms (internal optimization, not part of the contract)

    def to_grid(self, n_theta: int, n_x: int) -> np.ndarray:
        """Real values on the uniform grid, shape (d, n_θ, …, n_θ, n_x)."""
        if n_theta < 2 * self.k_theta_max + 1 or n_x < 2 * self.k_x_max + 1:
            raise StructuralError("grid too coarse for the table")
        buf = np.zeros((self.d,) + (n_theta,) * self.ell + (n_x,), dtype=np.complex128)
        it = np.arange(-self.k_theta_max, self.k_theta_max + 1) % n_theta
        ix = np.arange(-self.k_x_max, self.k_x_max + 1) % n_x
        buf[np.ix_(np.arange(self.d), *([it] * self.ell), ix)] = self.coeffs
        axes = tuple(range(1, self.ell + 2))
        values = np.fft.ifftn(buf, axes=axes) * (n_theta ** self.ell * n_x)
        return values.real

    @classmethod
    def from_grid(cls, values: np.ndarray, ell: int, k_theta_max: int, k_x_max: int,
                  parity: Optional[Tuple[ParityPair, ...]] = None) -> "TorusMap":
        values = np.asarray(values, dtype=np.float64)
        n_theta, n_x = values.shape[1], values.shape[-1]
        axes = tuple(range(1, ell + 2))
        spec = np.fft.fftn(values, axes=axes) / (n_theta ** ell * n_x)
        it = np.arange(-k_theta_max, k_theta_max + 1) % n_theta
        ix = np.arange(-k_x_max, k_x_max + 1) % n_x
        coeffs = spec[np.ix_(np.arange(values.shape[0]), *([it] * ell), ix)]
        return cls(coeffs, ell, k_theta_max, k_x_max, parity)

    def at_theta(self, theta: Sequence[float]) -> "TorusMap":
        """x-slice K(θ) as a table with Kθ = 0."""
        theta = np.asarray(theta, dtype=float).reshape(self.ell)
        phase = np.exp(2j * np.pi * (k_grid(self.ell, self.k_theta_max) @ theta))
        phase = phase * theta_mask(self.ell, self.k_theta_max)
        axes = tuple(range(1, self.ell + 1))
        sliced = np.tensordot(self.coeffs, phase, axes=(axes, tuple(range(self.ell))))
        arr = sliced.reshape((self.d,) + (1,) * self.ell + (2 * self.k_x_max + 1,))
        parity = tuple((Parity.NONE, px) for _, px in self.parity)
        return TorusMap(arr, self.ell, 0, self.k_x_max, parity, self.zero_mean)


# ----------------------------------------------------------------------
# Algebra

def _check_compatible(a: TorusMap, b: TorusMap) -> None:
    if a.ell != b.ell:
        raise StructuralError(f"mismatched angle dimension: {a.ell} vs {b.ell}")
    if a.d != b.d and 1 not in (a.d, b.d):
        raise StructuralError(f"mismatched component count: {a.d} vs {b.d}")


def _common(a: TorusMap, b: TorusMap) -> Tuple[TorusMap, TorusMap]:
    kt = max(a.k_theta_max, b.k_theta_max)
    kx = max(a.k_x_max, b.k_x_max)
    return a.pad(kt, kx), b.pad(kt, kx)


def add(a: TorusMap, b: TorusMap) -> TorusMap:
    _check_compatible(a, b)
    if a.d != b.d:
        raise StructuralError("add requires equal component counts")
    a, b = _common(a, b)
    if b.is_zero():
        parity = a.parity
    elif a.is_zero():
        parity = b.parity
    else:
        parity = tuple((pa[0].plus(pb[0]), pa[1].plus(pb[1])) for pa, pb in zip(a.parity, b.parity))
    return TorusMap(a.coeffs + b.coeffs, a.ell, a.k_theta_max, a.k_x_max, parity,
                    a.zero_mean and b.zero_mean)


def scale(a: TorusMap, factor: float) -> TorusMap:
    return a.with_coeffs(a.coeffs * factor)


def sub(a: TorusMap, b: TorusMap) -> TorusMap:
    return add(a, scale(b, -1.0))


def product(a: TorusMap, b: TorusMap) -> TorusMap:
    """
    Exact componentwise product on the padded support.

    The result has radii Kθ(a)+Kθ(b), Kx(a)+Kx(b); no aliasing occurs. A
    one-component table multiplies every component of the other.
    """
    _check_compatible(a, b)
    d = max(a.d, b.d)
    kt = a.k_theta_max + b.k_theta_max
    kx = a.k_x_max + b.k_x_max
    out = np.zeros((d,) + (2 * kt + 1,) * a.ell + (2 * kx + 1,), dtype=np.complex128)
    parity = []
    for c in range(d):
        ca = a.coeffs[c if a.d > 1 else 0]
        cb = b.coeffs[c if b.d > 1 else 0]
        if np.any(ca) and np.any(cb):
            out[c] = signal.convolve(ca, cb, mode="full", method="direct")
        pa = a.parity[c if a.d > 1 else 0]
        pb = b.parity[c if b.d > 1 else 0]
        parity.append((pa[0].times(pb[0]), pa[1].times(pb[1])))
    return TorusMap(out, a.ell, kt, kx, tuple(parity), zero_mean=False)


def partial_x(a: TorusMap, order: int = 1) -> TorusMap:
    """Multiply c(k, j) by (2πij)^order."""
    if order < 1:
        raise StructuralError("derivative order must be ≥ 1")
    factor = (2j * np.pi * j_values(a.k_x_max)) ** order
    parity = a.parity
    if order % 2:
        parity = tuple((pt, px.flipped()) for pt, px in a.parity)
    return a.with_coeffs(a.coeffs * factor, parity=parity, zero_mean=True)


def inverse_partial_x(a: TorusMap, order: int = 1) -> TorusMap:
    """Multiply c(k, j) by (2πij)^(−order) for j ≠ 0; the j = 0 modes are dropped."""
    js = j_values(a.k_x_max).astype(np.complex128)
    factor = np.zeros_like(js)
    nz = js != 0
    factor[nz] = (2j * np.pi * js[nz]) ** (-order)
    parity = a.parity
    if order % 2:
        parity = tuple((pt, px.flipped()) for pt, px in a.parity)
    return a.with_coeffs(a.coeffs * factor, parity=parity, zero_mean=True)


def omega_derivative(a: TorusMap, omega: Sequence[float]) -> TorusMap:
    """∂_ω = ω·∂_θ: multiply c(k, j) by 2πi(k·ω)."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (a.ell,):
        raise StructuralError(f"frequency of length {omega.size} for ℓ={a.ell}")
    factor = 2j * np.pi * (k_grid(a.ell, a.k_theta_max) @ omega)
    parity = tuple((pt.flipped(), px) for pt, px in a.parity)
    return a.with_coeffs(a.coeffs * factor[None, ..., None], parity=parity)


def partial_theta(a: TorusMap, axis: int) -> TorusMap:
    """∂/∂θ_axis."""
    factor = 2j * np.pi * k_grid(a.ell, a.k_theta_max)[..., axis]
    parity = tuple((pt.flipped(), px) for pt, px in a.parity)
    return a.with_coeffs(a.coeffs * factor[None, ..., None], parity=parity)


def average(a: TorusMap) -> np.ndarray:
    """
    θ-average, i.e. the k = 0 coefficients.

    Returns a complex d-vector for θ-only tables (Kx = 0) and an array of
    shape (d, 2Kx+1) of x-coefficients otherwise.
    """
    avg = np.array(a.coeffs[(slice(None),) + (a.k_theta_max,) * a.ell])
    return avg[:, 0] if a.k_x_max == 0 else avg


def phase_shift(a: TorusMap, tau: Sequence[float]) -> TorusMap:
    """K(θ) ↦ K(θ + τ): multiply c(k, j) by e^{2πik·τ}."""
    tau = np.asarray(tau, dtype=float).reshape(a.ell)
    factor = np.exp(2j * np.pi * (k_grid(a.ell, a.k_theta_max) @ tau))
    parity = a.parity
    if np.any(tau != 0):
        parity = tuple((Parity.NONE, px) for _, px in a.parity)
    return a.with_coeffs(a.coeffs * factor[None, ..., None], parity=parity)


def symmetrize(a: TorusMap, parity: Tuple[ParityPair, ...]) -> TorusMap:
    """Project each component onto its parity class; NONE leaves the axis alone."""
    arr = np.array(a.coeffs)
    for c, (pt, px) in enumerate(parity):
        if pt is not Parity.NONE:
            sign = 1.0 if pt is Parity.EVEN else -1.0
            flipped = arr[c][(slice(None, None, -1),) * a.ell + (slice(None),)]
            arr[c] = 0.5 * (arr[c] + sign * flipped)
        if px is not Parity.NONE:
            sign = 1.0 if px is Parity.EVEN else -1.0
            arr[c] = 0.5 * (arr[c] + sign * arr[c][..., ::-1])
    return a.with_coeffs(arr, parity=tuple(parity))


def component(a: TorusMap, c: int) -> TorusMap:
    return TorusMap(a.coeffs[c:c + 1], a.ell, a.k_theta_max, a.k_x_max, (a.parity[c],), a.zero_mean)


def stack(parts: Sequence[TorusMap]) -> TorusMap:
    """Concatenate one-component tables into a multi-component table."""
    ell = parts[0].ell
    if any(p.ell != ell for p in parts):
        raise StructuralError("stack requires a common angle dimension")
    kt = max(p.k_theta_max for p in parts)
    kx = max(p.k_x_max for p in parts)
    padded = [p.pad(kt, kx) for p in parts]
    coeffs = np.concatenate([p.coeffs for p in padded], axis=0)
    parity = tuple(pp for p in padded for pp in p.parity)
    return TorusMap(coeffs, ell, kt, kx, parity, all(p.zero_mean for p in parts))


def l2_inner(a: TorusMap, b: TorusMap) -> float:
    """∫∫ ⟨a, b⟩ dθ dx for real tables (Parseval)."""
    _check_compatible(a, b)
    a, b = _common(a, b)
    return float(math.fsum(np.real(a.coeffs * np.conj(b.coeffs)).ravel()))
