"""
Data-driven rescaling of freshly initialized layer weights.

Glorot bounds leave deep LIF stacks silent on sparse spike input: the first
hidden layer rarely reaches V_th, so nothing reaches the output layer and every
surrogate window stays closed. Each layer in turn is rescaled until a chosen
quantile of its per-sample peak membrane potential sits at V_th.
"""
from typing import List, Optional

import numpy as np

from skipsnn.logs.logger import logger
from skipsnn.snn.forward import GateMode, InputLike, as_batch, skipsnn_forward
from skipsnn.snn.params import ModelParams


def peak_potentials(x: InputLike, params: ModelParams, layer: int) -> np.ndarray:
    """Max over time of layer `layer`'s membrane with the gate held open, shape (B, s)"""
    if not 0 <= layer < len(params.layer_weights):
        raise IndexError(f"layer {layer} out of range for {len(params.layer_weights)} weight matrices")
    trace = skipsnn_forward(x, params, GateMode.FORCED_AWAKE)
    return trace.u[layer].max(axis=0)


def calibrate_layer_scales(
    params: ModelParams,
    x: InputLike,
    quantile: float = 0.5,
    tol: float = 0.05,
    max_iter: int = 5,
) -> ModelParams:
    """
    Return a copy of `params` whose layer weights are rescaled, front to back, so
    that the `quantile` of each layer's peak potentials over `x` lands within
    `tol` (relative) of V_th. A layer whose quantile is not positive gets a
    warning and keeps its weights.
    """
    if not 0.0 < quantile < 1.0:
        raise ValueError(f"quantile must lie in (0, 1), got {quantile}")
    X = as_batch(x)
    calibrated = params.copy()
    v_th = params.lif.v_th
    scales: List[Optional[float]] = []

    for k in range(len(calibrated.layer_weights)):
        total = 1.0
        for attempt in range(max_iter + 1):
            q = float(np.quantile(peak_potentials(X, calibrated, k), quantile))
            if q <= 0.0:
                logger.warning(f"Layer {k} peak quantile is {q:.3g} on {X.shape[0]} samples; weights left as they are")
                total = None
                break
            ratio = v_th / q
            if abs(ratio - 1.0) <= tol:
                break
            if attempt == max_iter:
                logger.warning(f"Layer {k} peak quantile {q:.3g} still off V_th after {max_iter} rescales")
                break
            calibrated.layer_weights[k] *= ratio
            total *= ratio
        scales.append(total)

    logger.info(
        "Calibrated layer scales: "
        + ", ".join("skipped" if s is None else f"{s:.3f}" for s in scales)
    )
    return calibrated
