from dataclasses import dataclass
from typing import Dict, Iterator, List, Tuple

import numpy as np

from skipsnn.snn.params import ModelParams


@dataclass
class GradientSet:
    """One gradient array per trainable ModelParams field"""
    layer_weights: List[np.ndarray]
    ctrl_wz: np.ndarray
    ctrl_wo: np.ndarray
    voting: np.ndarray

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "GradientSet":
        return cls(
            layer_weights=[np.zeros_like(w) for w in params.layer_weights],
            ctrl_wz=np.zeros_like(params.ctrl_wz),
            ctrl_wo=np.zeros_like(params.ctrl_wo),
            voting=np.zeros_like(params.voting),
        )

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        for j, w in enumerate(self.layer_weights):
            yield f"W{j}", w
        yield "ctrl_wz", self.ctrl_wz
        yield "ctrl_wo", self.ctrl_wo
        yield "voting", self.voting

    def as_dict(self) -> Dict[str, np.ndarray]:
        return dict(self.items())

    def all_finite(self) -> bool:
        return all(np.isfinite(g).all() for _, g in self.items())

    def norm(self) -> float:
        return float(np.sqrt(sum(np.sum(g ** 2) for _, g in self.items())))


def named_arrays(params: ModelParams) -> Dict[str, np.ndarray]:
    """Live (mutable) views of the parameter arrays, keyed like GradientSet.items()"""
    arrays = {f"W{j}": w for j, w in enumerate(params.layer_weights)}
    arrays["ctrl_wz"] = params.ctrl_wz
    arrays["ctrl_wo"] = params.ctrl_wo
    arrays["voting"] = params.voting
    return arrays


def relative_error(a: np.ndarray, b: np.ndarray, floor: float = 1e-5) -> float:
    """||a - b|| / max(||a||, ||b||, floor)"""
    scale = max(np.linalg.norm(a), np.linalg.norm(b), floor)
    return float(np.linalg.norm(a - b) / scale)


def max_relative_error(left: GradientSet, right: GradientSet, floor: float = 1e-5) -> float:
    """Worst per-field relative error between two gradient sets"""
    other = right.as_dict()
    return max(relative_error(g, other[name], floor) for name, g in left.items())
