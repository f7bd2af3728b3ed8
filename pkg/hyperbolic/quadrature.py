"""
Tanh-sinh quadrature on geometrically graded panels of (0, T].

The Duhamel integrands decay like τ^{−α}e^{−βτ} in norm; near τ = 0 the
fastest harmonics vary on the scale 1/λ_max, so the first panel has that
length and the panels double until they reach the cap.
"""
import math
from typing import Callable, Optional, Tuple

import numpy as np

_PI_OVER_2 = math.pi / 2.0

DEFAULT_ORDER = 24
DEFAULT_STEP = 0.125


def tanh_sinh_rule(order: int = DEFAULT_ORDER, h: float = DEFAULT_STEP) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Double-exponential nodes on [-1, 1].

    Args:
        order: Number of positive mesh points; the rule has 2*order+1 nodes.
        h: Mesh spacing in the auxiliary variable.

    Returns:
        (x, w, gap) where gap = 1 − |x| is computed without cancellation,
        so nodes next to the endpoints stay distinct from them.
    """
    t = h * np.arange(-order, order + 1)
    s = _PI_OVER_2 * np.sinh(t)
    x = np.tanh(s)
    w = h * _PI_OVER_2 * np.cosh(t) / np.cosh(s) ** 2
    gap = np.exp(-np.abs(s)) / np.cosh(s)
    return x, w, gap


def graded_breakpoints(t_max: float, first: float, cap: Optional[float] = None) -> np.ndarray:
    """0 = b₀ < b₁ < … < b_n = t_max with b₁ = first and widths doubling up to cap."""
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    first = min(first, t_max)
    cap = t_max if cap is None else max(cap, first)
    points = [0.0, first]
    width = first
    while points[-1] < t_max:
        width = min(2.0 * width, cap)
        points.append(min(points[-1] + width, t_max))
    return np.asarray(points)


def graded_rule(t_max: float, first: float, cap: Optional[float] = None, order: int = DEFAULT_ORDER,
                h: float = DEFAULT_STEP) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite rule on (0, t_max]."""
    x, w, gap = tanh_sinh_rule(order, h)
    keep = w > 1e-300
    x, w, gap = x[keep], w[keep], gap[keep]
    breaks = graded_breakpoints(t_max, first, cap)
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        half = 0.5 * (b - a)
        # measure each node from its nearer endpoint
        nodes.append(np.where(x < 0, a + half * gap, b - half * gap))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def integrate_graded(f: Callable[[np.ndarray], np.ndarray], t_max: float, first: float,
                     cap: Optional[float] = None, order: int = DEFAULT_ORDER, h: float = DEFAULT_STEP) -> np.ndarray:
    """
    ∫₀^T f(τ) dτ for a vectorized f whose leading axis runs over the nodes.
    """
    nodes, weights = graded_rule(t_max, first, cap, order, h)
    values = np.asarray(f(nodes))
    return np.tensordot(weights, values, axes=(0, 0))

