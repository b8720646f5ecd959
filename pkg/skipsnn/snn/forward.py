"""
SkipSNN forward pass over a batch of spike trains.

At step t the applied gate g_t multiplies the input current W^(1) x_t. In learned
mode g_0 = 1 and g_t = a_{t-1}, the controller output of the previous step; the
other modes substitute a fixed schedule. Only the input matmul is skipped while
hibernating: decay, deeper layers, controller and pulses keep running.
"""
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Union

import numpy as np

from skipsnn.data.spiketrain import SpikeTrain, stack_trains
from skipsnn.errors import ShapeMismatchError
from skipsnn.metrics.ledger import (
    Component,
    FlopLedger,
    GateState,
    charge_decay,
    charge_matmul_event_driven,
)
from skipsnn.snn.neurons import (
    ControllerState,
    LayerState,
    SpikeFn,
    controller_step,
    heaviside,
    lif_layer_step,
    pulse_vector,
)
from skipsnn.snn.params import ModelParams

InputLike = Union[SpikeTrain, Sequence[SpikeTrain], np.ndarray]


class GateMode(str, Enum):
    LEARNED = "learned"
    FORCED_AWAKE = "forced-awake"
    EXTERNAL = "external"


@dataclass
class ForwardTrace:
    """
    Time-major record of one batched forward pass. Arrays are indexed [t, b, ...].
    `gates[t]` is the gate applied to input column t; `a[t]` is the controller's
    own threshold output at step t.
    """
    mode: GateMode
    smooth: bool
    inputs: np.ndarray
    gates: np.ndarray
    currents: np.ndarray
    u: List[np.ndarray]
    z: List[np.ndarray]
    v: np.ndarray
    a: np.ndarray
    pulses: np.ndarray

    @property
    def horizon(self) -> int:
        return self.inputs.shape[0]

    @property
    def batch_size(self) -> int:
        return self.inputs.shape[1]

    @property
    def outputs(self) -> np.ndarray:
        """Output-layer spikes, shape (T, B, s_out)"""
        return self.z[-1]

    @property
    def awake_mask(self) -> np.ndarray:
        """Applied gates per sample, shape (B, T)"""
        return self.gates.T

    def awake_fractions(self) -> np.ndarray:
        return self.gates.mean(axis=0)

    def rates(self, voting: np.ndarray) -> np.ndarray:
        """Time-averaged voted output rates, shape (B, C)"""
        return self.outputs.mean(axis=0) @ voting.T

    def predictions(self, voting: np.ndarray) -> np.ndarray:
        # argmax returns the lowest index on ties
        return np.argmax(self.rates(voting), axis=1)

    def reconstructed_input(self, b: int = 0) -> np.ndarray:
        """Input of sample b with skipped columns masked out, shape (P, T)"""
        return (self.inputs[:, b, :] * self.gates[:, b, None]).T

    def sample_export(self, b: int = 0) -> dict:
        """JSON-ready per-timestep record for raster plots"""
        steps = []
        for t in range(self.horizon):
            steps.append({
                "t": t,
                "awake": float(self.gates[t, b]),
                "controller_v": float(self.v[t, b]),
                "controller_spike": float(self.a[t, b]),
                "spikes": [np.flatnonzero(z[t, b] > 0.5).tolist() for z in self.z],
            })
        return {
            "mode": self.mode.value,
            "horizon": self.horizon,
            "awake_fraction": float(self.gates[:, b].mean()),
            "steps": steps,
        }


def as_batch(x: InputLike) -> np.ndarray:
    """Coerce a train, list of trains or array into a (B, P, T) float batch"""
    if isinstance(x, SpikeTrain):
        return x.data[None].astype(np.float64)
    if isinstance(x, np.ndarray):
        if x.ndim == 2:
            return x[None].astype(np.float64)
        if x.ndim == 3:
            return x.astype(np.float64)
        raise ShapeMismatchError(f"input array must be (P, T) or (B, P, T), got {x.shape}")
    return stack_trains(list(x))


def _external_gates(mask: Optional[np.ndarray], batch: int, horizon: int) -> np.ndarray:
    if mask is None:
        raise ShapeMismatchError("external gate mode requires a mask")
    mask = np.asarray(mask, dtype=np.float64)
    if mask.ndim == 1:
        mask = np.broadcast_to(mask, (batch, mask.size))
    if mask.shape != (batch, horizon):
        raise ShapeMismatchError(f"mask shape {mask.shape} != (batch, T) = ({batch}, {horizon})")
    return mask


def _charge_split(ledger, shape, n_act, component, awake):
    if awake.any():
        charge_matmul_event_driven(ledger, shape, n_act[awake], component, GateState.AWAKE)
    if (~awake).any():
        charge_matmul_event_driven(ledger, shape, n_act[~awake], component, GateState.HIBERNATING)


def _charge_decay_split(ledger, size, awake, component=Component.DECAY):
    n_awake = int(awake.sum())
    charge_decay(ledger, size, GateState.AWAKE, component, samples=n_awake)
    charge_decay(ledger, size, GateState.HIBERNATING, component, samples=awake.size - n_awake)


def skipsnn_forward(
    x: InputLike,
    params: ModelParams,
    gate_mode: GateMode = GateMode.LEARNED,
    ledger: Optional[FlopLedger] = None,
    mask: Optional[np.ndarray] = None,
    spike_fn: SpikeFn = heaviside,
    ctrl_spike_fn: Optional[SpikeFn] = None,
) -> ForwardTrace:
    """
    Run the gated network over every column of x.

    `spike_fn` replaces Θ for the main network (the smoothed proxy passes a
    logistic); `ctrl_spike_fn` defaults to the same function. The ledger is only
    charged for the hard (Heaviside) network.
    """
    gate_mode = GateMode(gate_mode)
    X = as_batch(x)
    B, P, T = X.shape
    if P != params.input_size:
        raise ShapeMismatchError(f"input has {P} channels, network expects {params.input_size}")
    smooth = spike_fn is not heaviside
    ctrl_spike_fn = ctrl_spike_fn or spike_fn
    ext = _external_gates(mask, B, T) if gate_mode == GateMode.EXTERNAL else None
    if ext is not None and not smooth and not np.isin(ext, (0.0, 1.0)).all():
        raise ValueError("external mask must be binary")

    lif = params.lif
    W = params.layer_weights
    sizes = params.layer_sizes[1:]

    inputs = np.ascontiguousarray(X.transpose(2, 0, 1))
    gates = np.empty((T, B))
    currents = np.empty((T, B, sizes[0]))
    u_rec = [np.empty((T, B, s)) for s in sizes]
    z_rec = [np.empty((T, B, s)) for s in sizes]
    v_rec = np.empty((T, B))
    a_rec = np.empty((T, B))
    pulses = np.empty((T, len(params.pulse_periods)))

    layers = [LayerState.zeros(s, B) for s in sizes]
    ctrl = ControllerState.initial(B)

    for t in range(T):
        if gate_mode == GateMode.LEARNED:
            g = ctrl.a
        elif gate_mode == GateMode.FORCED_AWAKE:
            g = np.ones(B)
        else:
            g = ext[:, t]
        x_t = inputs[t]

        if smooth:
            current = g[:, None] * (x_t @ W[0].T)
        else:
            awake = g > 0
            if awake.all():
                current = x_t @ W[0].T
            else:
                # hibernating rows skip the input matmul entirely
                current = np.zeros((B, sizes[0]))
                if awake.any():
                    current[awake] = x_t[awake] @ W[0].T

        layers[0] = lif_layer_step(layers[0], current, lif, spike_fn)
        for k in range(1, len(sizes)):
            layers[k] = lif_layer_step(layers[k], layers[k - 1].z @ W[k].T, lif, spike_fn)

        o_t = pulse_vector(t, params.pulse_periods)
        ctrl = controller_step(ControllerState(v=ctrl.v, a=g), layers[0].z, o_t, params, ctrl_spike_fn)

        gates[t] = g
        currents[t] = current
        for k, state in enumerate(layers):
            u_rec[k][t] = state.u
            z_rec[k][t] = state.z
        v_rec[t] = ctrl.v
        a_rec[t] = ctrl.a
        pulses[t] = o_t

        if ledger is not None and not smooth:
            _charge_step(ledger, params, x_t, awake, layers, o_t)

    return ForwardTrace(
        mode=gate_mode,
        smooth=smooth,
        inputs=inputs,
        gates=gates,
        currents=currents,
        u=u_rec,
        z=z_rec,
        v=v_rec,
        a=a_rec,
        pulses=pulses,
    )


def _charge_step(ledger, params, x_t, awake, layers, o_t):
    sizes = params.layer_sizes
    B = x_t.shape[0]

    n_in = x_t.sum(axis=1).astype(np.int64)
    if awake.any():
        charge_matmul_event_driven(
            ledger, (sizes[1], sizes[0]), n_in[awake], Component.INPUT_MATMUL, GateState.AWAKE
        )

    for k, state in enumerate(layers):
        _charge_decay_split(ledger, sizes[k + 1], awake)
        if k > 0:
            n_hidden = layers[k - 1].z.sum(axis=1).astype(np.int64)
            _charge_split(ledger, (sizes[k + 1], sizes[k]), n_hidden, Component.HIDDEN_MATMUL, awake)

    _charge_decay_split(ledger, 1, awake, Component.CONTROLLER)
    n_z2 = layers[0].z.sum(axis=1).astype(np.int64)
    _charge_split(ledger, (1, sizes[1]), n_z2, Component.CONTROLLER, awake)
    n_pulses = np.full(B, int(o_t.sum()), dtype=np.int64)
    _charge_split(ledger, (1, o_t.size), n_pulses, Component.PULSES, awake)


def plain_snn_forward(x: InputLike, params: ModelParams) -> List[np.ndarray]:
    """Controller-free reference network; returns per-layer spike records (T, B, s)"""
    X = as_batch(x)
    B, P, T = X.shape
    if P != params.input_size:
        raise ShapeMismatchError(f"input has {P} channels, network expects {params.input_size}")
    sizes = params.layer_sizes[1:]
    layers = [LayerState.zeros(s, B) for s in sizes]
    z_rec = [np.empty((T, B, s)) for s in sizes]
    inputs = np.ascontiguousarray(X.transpose(2, 0, 1))
    for t in range(T):
        current = inputs[t] @ params.layer_weights[0].T
        for k in range(len(sizes)):
            layers[k] = lif_layer_step(layers[k], current, params.lif)
            z_rec[k][t] = layers[k].z
            if k + 1 < len(sizes):
                current = layers[k].z @ params.layer_weights[k + 1].T
    return z_rec


def verify_trace(trace: ForwardTrace, params: ModelParams) -> bool:
    """Replay the stored recurrences of a hard trace and compare bitwise"""
    if trace.smooth:
        raise ValueError("replay is defined for Heaviside traces only")
    lif = params.lif
    W = params.layer_weights
    for t in range(trace.horizon):
        for k in range(len(trace.u)):
            u_prev = trace.u[k][t - 1] if t > 0 else np.zeros_like(trace.u[k][0])
            z_prev = trace.z[k][t - 1] if t > 0 else np.zeros_like(trace.z[k][0])
            current = trace.currents[t] if k == 0 else trace.z[k - 1][t] @ W[k].T
            u = lif.tau * u_prev * (1.0 - z_prev) + current
            if not np.array_equal(u, trace.u[k][t]) or not np.array_equal(heaviside(u - lif.v_th), trace.z[k][t]):
                return False
        v_prev = trace.v[t - 1] if t > 0 else np.zeros_like(trace.v[0])
        v = lif.tau * v_prev * (1.0 - trace.gates[t]) + trace.z[0][t] @ params.ctrl_wz + trace.pulses[t] @ params.ctrl_wo
        if not np.array_equal(v, trace.v[t]) or not np.array_equal(heaviside(v - lif.v_th), trace.a[t]):
            return False
    return True
