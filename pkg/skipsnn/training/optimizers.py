from typing import Dict, Iterable

import numpy as np

from skipsnn.config.schemas import OptimizerKind, TrainConfig
from skipsnn.snn.params import ModelParams
from skipsnn.training.gradients import GradientSet, named_arrays


class Optimizer:
    """Updates a fixed subset of ModelParams arrays in place"""

    def __init__(self, trainable: Iterable[str], learning_rate: float):
        self.trainable = tuple(trainable)
        self.learning_rate = learning_rate

    def step(self, params: ModelParams, grads: GradientSet) -> None:
        arrays = named_arrays(params)
        g = grads.as_dict()
        for name in self.trainable:
            arrays[name] -= self._delta(name, g[name])

    def _delta(self, name: str, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class SGD(Optimizer):
    def _delta(self, name, grad):
        return self.learning_rate * grad


class Adam(Optimizer):
    def __init__(self, trainable, learning_rate=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        super().__init__(trainable, learning_rate)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._m: Dict[str, np.ndarray] = {}
        self._v: Dict[str, np.ndarray] = {}
        self._t: Dict[str, int] = {}

    def _delta(self, name, grad):
        m = self._m.get(name, np.zeros_like(grad))
        v = self._v.get(name, np.zeros_like(grad))
        t = self._t.get(name, 0) + 1
        m = self.beta1 * m + (1.0 - self.beta1) * grad
        v = self.beta2 * v + (1.0 - self.beta2) * grad ** 2
        self._m[name], self._v[name], self._t[name] = m, v, t
        m_hat = m / (1.0 - self.beta1 ** t)
        v_hat = v / (1.0 - self.beta2 ** t)
        return self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


def build_optimizer(cfg: TrainConfig, trainable: Iterable[str]) -> Optimizer:
    if OptimizerKind(cfg.optimizer) == OptimizerKind.SGD:
        return SGD(trainable, cfg.learning_rate)
    return Adam(trainable, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps)
