"""
Comparison skip policies applied to a stage-1 network through the external
gate mode: a periodic fixed-skip schedule and i.i.d. Bernoulli random skipping.
"""
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from skipsnn.data.spiketrain import SpikeTrain, labels_of, stack_trains
from skipsnn.logs.logger import logger
from skipsnn.metrics.ledger import FlopLedger, total_mflops
from skipsnn.snn.forward import GateMode
from skipsnn.snn.params import ModelParams
from skipsnn.training.trainer import evaluate

MAX_PERIOD = 100


class ScheduleKind(str, Enum):
    FIXED = "fixed"
    RANDOM = "random"


@dataclass(frozen=True)
class SkipSchedule:
    mask: np.ndarray
    kind: ScheduleKind
    target_fraction: float
    awake_steps: Optional[int] = None
    period: Optional[int] = None

    @property
    def horizon(self) -> int:
        return self.mask.size

    @property
    def realized_fraction(self) -> float:
        return float(self.mask.mean())


ScheduleFactory = Callable[[int, int], SkipSchedule]


@lru_cache(maxsize=None)
def closest_ratio(f: float, max_period: int = MAX_PERIOD):
    """(m, q) with m/q nearest to f; the first (smallest) period wins ties"""
    best, best_err = (1, 1), np.inf
    for q in range(1, max_period + 1):
        for m in range(1, q + 1):
            err = abs(m / q - f)
            if err < best_err:
                best, best_err = (m, q), err
    return best


def fixed_skip_mask(T: int, f: float, max_period: int = MAX_PERIOD) -> SkipSchedule:
    """Awake m steps then skip q - m, repeating from t = 0, with m/q closest to f"""
    if not 0.0 < f <= 1.0:
        raise ValueError(f"fixed-skip fraction must lie in (0, 1], got {f}")
    m, q = closest_ratio(f, max_period)
    mask = (np.arange(T) % q < m).astype(np.float64)
    return SkipSchedule(mask=mask, kind=ScheduleKind.FIXED, target_fraction=f, awake_steps=m, period=q)


def random_skip_mask(T: int, p: float, rng: np.random.Generator) -> SkipSchedule:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"awake probability must lie in [0, 1], got {p}")
    mask = (rng.random(T) < p).astype(np.float64)
    return SkipSchedule(mask=mask, kind=ScheduleKind.RANDOM, target_fraction=p)


def fixed_factory(f: float) -> ScheduleFactory:
    return lambda index, T: fixed_skip_mask(T, f)


def random_factory(p: float, seed: int) -> ScheduleFactory:
    """Fresh mask per sample, drawn from a generator keyed by (seed, sample index)"""
    return lambda index, T: random_skip_mask(T, p, np.random.default_rng([seed, index]))


@dataclass
class PolicyResult:
    accuracy: float
    awake_frac: float
    mflops: float
    target_fraction: Optional[float] = None


def evaluate_policy(
    dataset: Sequence[SpikeTrain],
    params: ModelParams,
    schedule_factory: ScheduleFactory,
    ledger: Optional[FlopLedger] = None,
) -> PolicyResult:
    """
    Classify every sample under its schedule. `mflops` is the per-sample mean;
    the supplied ledger receives the summed charges.
    """
    X, y = stack_trains(dataset), labels_of(dataset)
    T = X.shape[2]
    schedules = [schedule_factory(i, T) for i in range(len(dataset))]
    masks = np.stack([s.mask for s in schedules])
    local = FlopLedger()
    result = evaluate(X, y, params, GateMode.EXTERNAL, masks=masks, ledger=local)
    if ledger is not None:
        ledger.merge(local)
    logger.debug(f"Policy {schedules[0].kind.value} target={schedules[0].target_fraction}: acc={result.accuracy:.3f}")
    return PolicyResult(
        accuracy=result.accuracy,
        awake_frac=result.awake_frac,
        mflops=total_mflops(local) / len(dataset),
        target_fraction=schedules[0].target_fraction,
    )


def evaluate_gate_mode(
    dataset: Sequence[SpikeTrain],
    params: ModelParams,
    gate_mode: GateMode,
    ledger: Optional[FlopLedger] = None,
) -> PolicyResult:
    """Same report for the learned controller or the always-awake network"""
    X, y = stack_trains(dataset), labels_of(dataset)
    local = FlopLedger()
    result = evaluate(X, y, params, gate_mode, ledger=local)
    if ledger is not None:
        ledger.merge(local)
    return PolicyResult(
        accuracy=result.accuracy,
        awake_frac=result.awake_frac,
        mflops=total_mflops(local) / len(dataset),
    )
