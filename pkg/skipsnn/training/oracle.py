"""
Finite-difference gradient oracle on the smoothed proxy network.

The proxy replaces every Heaviside step in the forward pass by σ((u - V_th)/δ),
so the loss is differentiable and central differences are meaningful. The
matching analytic gradient is BPTT with the logistic-derivative surrogate and
the reset path kept.
"""
from typing import Optional

import numpy as np

from skipsnn.config.schemas import SurrogateConfig, SurrogateKind
from skipsnn.errors import NonFiniteLossError
from skipsnn.logs.logger import logger
from skipsnn.snn.forward import GateMode, InputLike, skipsnn_forward
from skipsnn.snn.neurons import logistic_spike
from skipsnn.snn.params import ModelParams
from skipsnn.training.bptt import SurrogatePair, bptt, surrogate_pair
from skipsnn.training.gradients import GradientSet, named_arrays
from skipsnn.training.losses import classification_loss, penalty_loss

FD_STEP = 1e-5


def proxy_surrogates(params: ModelParams, smoothing_delta: float) -> SurrogatePair:
    cfg = SurrogateConfig(kind=SurrogateKind.LOGISTIC_DERIVATIVE, delta=smoothing_delta)
    return surrogate_pair(cfg, cfg, params.lif.v_th)


def proxy_forward(x, params, smoothing_delta, gate_mode=GateMode.LEARNED, mask=None):
    return skipsnn_forward(x, params, gate_mode, mask=mask, spike_fn=logistic_spike(smoothing_delta))


def proxy_loss(
    x: InputLike,
    labels,
    params: ModelParams,
    smoothing_delta: float,
    lambda_: float = 0.0,
    gate_mode: GateMode = GateMode.LEARNED,
    mask: Optional[np.ndarray] = None,
) -> float:
    trace = proxy_forward(x, params, smoothing_delta, gate_mode, mask)
    loss = classification_loss(trace, labels, params.voting) + penalty_loss(trace.awake_mask, lambda_)
    if not np.isfinite(loss):
        raise NonFiniteLossError(f"proxy loss is not finite: {loss}")
    return loss


def fd_oracle_gradients(
    x: InputLike,
    labels,
    params: ModelParams,
    smoothing_delta: float,
    lambda_: float = 0.0,
    gate_mode: GateMode = GateMode.LEARNED,
    mask: Optional[np.ndarray] = None,
    step: float = FD_STEP,
) -> GradientSet:
    """Central differences (L(θ+h) - L(θ-h)) / 2h on every parameter entry"""
    work = params.copy()
    grads = GradientSet.zeros_like(params)
    out = grads.as_dict()
    for name, array in named_arrays(work).items():
        flat = array.reshape(-1)
        target = out[name].reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            plus = proxy_loss(x, labels, work, smoothing_delta, lambda_, gate_mode, mask)
            flat[i] = original - step
            minus = proxy_loss(x, labels, work, smoothing_delta, lambda_, gate_mode, mask)
            flat[i] = original
            target[i] = (plus - minus) / (2.0 * step)
    logger.debug(f"FD oracle evaluated {sum(a.size for a in out.values())} entries at h={step}")
    return grads


def analytic_proxy_gradients(
    x: InputLike,
    labels,
    params: ModelParams,
    smoothing_delta: float,
    lambda_: float = 0.0,
    gate_mode: GateMode = GateMode.LEARNED,
    mask: Optional[np.ndarray] = None,
) -> GradientSet:
    trace = proxy_forward(x, params, smoothing_delta, gate_mode, mask)
    _, grads = bptt(
        trace, labels, params, proxy_surrogates(params, smoothing_delta), lambda_, detach_reset=False
    )
    return grads
