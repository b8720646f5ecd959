"""
Spatio-temporal backpropagation over a recorded ForwardTrace.

The sweep runs t = T-1 .. 0 and carries two adjoints across time: the membrane
adjoint of every layer and the controller adjoint. Spike derivatives come from
the surrogate pair; the gate receives gradient only in learned mode, where
g_{t+1} = a_t.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from skipsnn.config.schemas import SurrogateConfig
from skipsnn.errors import NonFiniteLossError, ShapeMismatchError
from skipsnn.logs.logger import logger
from skipsnn.snn.forward import ForwardTrace, GateMode
from skipsnn.snn.params import ModelParams
from skipsnn.training.gradients import GradientSet
from skipsnn.training.losses import classification_loss, one_hot, penalty_loss
from skipsnn.training.surrogates import Surrogate, make_surrogate


@dataclass(frozen=True)
class SurrogatePair:
    """∂z/∂u for main-network neurons and ∂a/∂v for the controller"""
    main: Surrogate
    ctrl: Surrogate


def surrogate_pair(
    main_cfg: SurrogateConfig,
    ctrl_cfg: SurrogateConfig,
    v_th: float,
    ctrl_delta: Optional[float] = None,
) -> SurrogatePair:
    return SurrogatePair(
        main=make_surrogate(main_cfg, v_th),
        ctrl=make_surrogate(ctrl_cfg, v_th, ctrl_delta),
    )


def _check_trace(trace: ForwardTrace, params: ModelParams) -> None:
    if trace.inputs.shape[2] != params.input_size:
        raise ShapeMismatchError(
            f"trace input width {trace.inputs.shape[2]} != network input size {params.input_size}"
        )
    sizes = params.layer_sizes[1:]
    if [u.shape[2] for u in trace.u] != sizes:
        raise ShapeMismatchError(f"trace layer sizes {[u.shape[2] for u in trace.u]} != params {sizes}")
    if trace.pulses.shape[1] != params.ctrl_wo.size:
        raise ShapeMismatchError(f"trace has {trace.pulses.shape[1]} pulses, params expect {params.ctrl_wo.size}")


def bptt(
    trace: ForwardTrace,
    labels,
    params: ModelParams,
    surrogates: SurrogatePair,
    lambda_: float = 0.0,
    detach_reset: bool = True,
) -> Tuple[float, GradientSet]:
    """
    Batch-mean loss (voting MSE + λ·awake fraction) and its gradient w.r.t.
    every ModelParams field. With `detach_reset` the reset factors (1 - z) and
    (1 - g) are treated as constants.
    """
    _check_trace(trace, params)
    labels = np.atleast_1d(labels)
    cls = classification_loss(trace, labels, params.voting)
    pen = penalty_loss(trace.awake_mask, lambda_)
    loss = cls + pen
    if not np.isfinite(loss):
        logger.error(f"Non-finite loss in bptt (cls={cls}, penalty={pen})")
        raise NonFiniteLossError(f"loss is not finite: {loss}")

    T, B = trace.horizon, trace.batch_size
    tau = params.lif.tau
    W = params.layer_weights
    n_layers = len(W)
    learned = trace.mode == GateMode.LEARNED
    gates = trace.gates

    # output rates and the voting gradient
    mean_out = trace.outputs.mean(axis=0)
    d_rates = 2.0 * (mean_out @ params.voting.T - one_hot(labels, params.num_classes)) / B
    d_voting = d_rates.T @ mean_out
    d_out = (d_rates @ params.voting) / T

    H = [surrogates.main(u) for u in trace.u]
    H_ctrl = surrogates.ctrl(trace.v)
    ungated = trace.inputs @ W[0].T
    penalty_step = lambda_ / (T * B)

    du_rec = [np.zeros_like(u) for u in trace.u]
    dv_rec = np.zeros((T, B))

    du_next = [np.zeros((B, u.shape[2])) for u in trace.u]
    dv_next = np.zeros(B)
    dg_next = np.zeros(B)
    for t in range(T - 1, -1, -1):
        # controller adjoint: a_t feeds g_{t+1}; v_t feeds v_{t+1} through τ(1 - g_{t+1})
        dv = np.zeros(B)
        if t + 1 < T:
            if learned:
                dv = dv + H_ctrl[t] * dg_next
            dv = dv + dv_next * tau * (1.0 - gates[t + 1])
        dv_rec[t] = dv

        du_t = [None] * n_layers
        for k in range(n_layers - 1, -1, -1):
            dz = d_out if k == n_layers - 1 else du_t[k + 1] @ W[k + 1]
            if k == 0:
                dz = dz + dv[:, None] * params.ctrl_wz
            if not detach_reset:
                dz = dz - du_next[k] * tau * trace.u[k][t]
            du_t[k] = dz * H[k][t] + du_next[k] * tau * (1.0 - trace.z[k][t])
            du_rec[k][t] = du_t[k]

        dg = np.sum(du_t[0] * ungated[t], axis=1) + penalty_step
        if not detach_reset:
            v_prev = trace.v[t - 1] if t > 0 else np.zeros(B)
            dg = dg - dv * tau * v_prev

        du_next, dv_next, dg_next = du_t, dv, dg

    grads = GradientSet(
        layer_weights=[np.einsum("tbi,tbj->ij", du_rec[0] * gates[:, :, None], trace.inputs)]
        + [np.einsum("tbi,tbj->ij", du_rec[k], trace.z[k - 1]) for k in range(1, n_layers)],
        ctrl_wz=np.einsum("tb,tbj->j", dv_rec, trace.z[0]),
        ctrl_wo=np.einsum("tb,tj->j", dv_rec, trace.pulses),
        voting=d_voting,
    )
    return loss, grads
