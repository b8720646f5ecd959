from typing import Union

import numpy as np

from skipsnn.errors import ShapeMismatchError
from skipsnn.snn.forward import ForwardTrace


def one_hot(labels, num_classes: int) -> np.ndarray:
    labels = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    if (labels < 0).any() or (labels >= num_classes).any():
        raise ValueError(f"label out of range for {num_classes} classes")
    return np.eye(num_classes)[labels]


def classification_losses(trace: ForwardTrace, labels, voting: np.ndarray) -> np.ndarray:
    """Per-sample ||y - mean_t M z_t||^2, shape (B,)"""
    labels = np.atleast_1d(labels)
    if labels.size != trace.batch_size:
        raise ShapeMismatchError(f"{labels.size} labels for a batch of {trace.batch_size}")
    residual = one_hot(labels, voting.shape[0]) - trace.rates(voting)
    return np.sum(residual ** 2, axis=1)


def classification_loss(trace: ForwardTrace, label, voting: np.ndarray) -> float:
    """Voting-MSE loss, averaged over the batch"""
    return float(classification_losses(trace, label, voting).mean())


def penalty_losses(awake_mask: np.ndarray, lambda_: float) -> np.ndarray:
    """λ · Σ_t g_t / T for each row of a (B, T) or (T,) mask"""
    mask = np.atleast_2d(np.asarray(awake_mask, dtype=np.float64))
    return lambda_ * mask.sum(axis=1) / mask.shape[1]


def penalty_loss(awake_mask: np.ndarray, lambda_: float) -> float:
    return float(penalty_losses(awake_mask, lambda_).mean())


def penalty_grad(horizon: int, lambda_: Union[float, int]) -> np.ndarray:
    """∂L_penalty/∂g_t = λ/T for every t"""
    return np.full(horizon, lambda_ / horizon)
