"""
Surrogate spike derivatives used in place of dΘ/du during backpropagation.
"""
from typing import Callable, Optional

import numpy as np

from skipsnn.config.schemas import SurrogateConfig, SurrogateKind

Surrogate = Callable[[np.ndarray], np.ndarray]


def rect_surrogate(u, v_th: float, epsilon: float):
    """1/ε inside the open window |u - V_th| < ε/2, zero elsewhere"""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    inside = np.abs(np.asarray(u, dtype=np.float64) - v_th) < epsilon / 2.0
    out = inside / epsilon
    return float(out) if np.ndim(out) == 0 else out


def _logistic(x):
    # overflow-safe σ(x) = exp(-log(1 + e^{-x}))
    return np.exp(-np.logaddexp(0.0, -x))


def sigmoid_surrogate(u, v_th: float, delta: float):
    """1 / (1 + exp((u - V_th)/Δ)); decreasing in u"""
    if delta <= 0:
        raise ValueError("delta must be positive")
    out = _logistic(-(np.asarray(u, dtype=np.float64) - v_th) / delta)
    return float(out) if np.ndim(out) == 0 else out


def sigmoid_flipped_surrogate(u, v_th: float, delta: float):
    """Increasing mirror image of the sigmoid surrogate"""
    if delta <= 0:
        raise ValueError("delta must be positive")
    out = _logistic((np.asarray(u, dtype=np.float64) - v_th) / delta)
    return float(out) if np.ndim(out) == 0 else out


def logistic_derivative_surrogate(u, v_th: float, delta: float):
    """d/du σ((u - V_th)/Δ)"""
    if delta <= 0:
        raise ValueError("delta must be positive")
    s = _logistic((np.asarray(u, dtype=np.float64) - v_th) / delta)
    out = s * (1.0 - s) / delta
    return float(out) if np.ndim(out) == 0 else out


def make_surrogate(cfg: SurrogateConfig, v_th: float, delta: Optional[float] = None) -> Surrogate:
    """Bind a config to a threshold; `delta` overrides cfg.delta (annealing)"""
    delta = cfg.delta if delta is None else delta
    kind = SurrogateKind(cfg.kind)
    if kind == SurrogateKind.RECTANGULAR:
        return lambda u: rect_surrogate(u, v_th, cfg.epsilon)
    if kind == SurrogateKind.SIGMOID:
        return lambda u: sigmoid_surrogate(u, v_th, delta)
    if kind == SurrogateKind.SIGMOID_FLIPPED:
        return lambda u: sigmoid_flipped_surrogate(u, v_th, delta)
    return lambda u: logistic_derivative_surrogate(u, v_th, delta)
