"""
Leaky integrate-and-fire layer, synchronization pulses and the controller neuron.
All functions accept an optional leading batch axis on state and input vectors.
"""
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from skipsnn.config.schemas import LifConfig
from skipsnn.errors import ShapeMismatchError
from skipsnn.snn.params import ModelParams

SpikeFn = Callable[[np.ndarray], np.ndarray]


def heaviside(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Step function with Θ(0) = 1"""
    if np.isscalar(x):
        return 1.0 if x >= 0 else 0.0
    return (np.asarray(x) >= 0).astype(np.float64)


def logistic_spike(delta: float) -> SpikeFn:
    """Smooth stand-in for Θ used by the proxy model: σ(x / δ)"""
    def spike(x):
        return np.exp(-np.logaddexp(0.0, -np.asarray(x, dtype=np.float64) / delta))
    return spike


@dataclass(frozen=True)
class LayerState:
    """Membrane potentials u and spikes z of one layer"""
    u: np.ndarray
    z: np.ndarray

    @classmethod
    def zeros(cls, size: int, batch: int = None) -> "LayerState":
        shape = (size,) if batch is None else (batch, size)
        return cls(u=np.zeros(shape), z=np.zeros(shape))


@dataclass(frozen=True)
class ControllerState:
    """Controller membrane potential v and gate output a"""
    v: np.ndarray
    a: np.ndarray

    @classmethod
    def initial(cls, batch: int = None) -> "ControllerState":
        # v_0 = 0, a_0 = 1: the first input column is always seen
        shape = () if batch is None else (batch,)
        return cls(v=np.zeros(shape), a=np.ones(shape))


def lif_layer_step(
    prev: LayerState,
    input_current: np.ndarray,
    cfg: LifConfig,
    spike_fn: SpikeFn = heaviside,
) -> LayerState:
    """u_t = τ u_{t-1} ⊙ (1 - z_{t-1}) + I_t ;  z_t = Θ(u_t - V_th)"""
    input_current = np.asarray(input_current, dtype=np.float64)
    if input_current.shape != prev.u.shape:
        raise ShapeMismatchError(f"input current shape {input_current.shape} != state shape {prev.u.shape}")
    u = cfg.tau * prev.u * (1.0 - prev.z) + input_current
    return LayerState(u=u, z=spike_fn(u - cfg.v_th))


def pulse_vector(t: int, periods: Sequence[int]) -> np.ndarray:
    """Entry i fires iff t is a multiple of periods[i]"""
    if t < 0:
        raise ValueError(f"timestep must be non-negative, got {t}")
    return np.array([1.0 if t % p == 0 else 0.0 for p in periods])


def controller_step(
    prev: ControllerState,
    z2: np.ndarray,
    pulses: np.ndarray,
    params: ModelParams,
    spike_fn: SpikeFn = heaviside,
) -> ControllerState:
    """
    v_t = τ v_{t-1} (1 - a_{t-1}) + W_z · z2_t + W_o · o_t ;  a_t = Θ(v_t - V_th)
    `prev.a` is the gate that was applied at this step.
    """
    z2 = np.asarray(z2, dtype=np.float64)
    pulses = np.asarray(pulses, dtype=np.float64)
    if z2.shape[-1] != params.ctrl_wz.size:
        raise ShapeMismatchError(f"z2 length {z2.shape[-1]} != W_z length {params.ctrl_wz.size}")
    if pulses.shape != params.ctrl_wo.shape:
        raise ShapeMismatchError(f"pulse vector length {pulses.size} != W_o length {params.ctrl_wo.size}")
    cfg = params.lif
    v = cfg.tau * prev.v * (1.0 - prev.a) + z2 @ params.ctrl_wz + pulses @ params.ctrl_wo
    return ControllerState(v=v, a=spike_fn(v - cfg.v_th))
