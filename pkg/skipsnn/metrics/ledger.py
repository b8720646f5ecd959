"""
Event-driven multiply/add accounting.

One flop per multiplication and one per addition. Synaptic work is charged only
for active (spiking) presynaptic inputs; threshold comparisons and pulse
generation cost nothing.
"""
import json
from collections import defaultdict
from enum import Enum
from typing import Dict, Iterable, Tuple, Union

import numpy as np


class Component(str, Enum):
    INPUT_MATMUL = "input-matmul"
    HIDDEN_MATMUL = "hidden-matmul"
    DECAY = "decay"
    CONTROLLER = "controller"
    PULSES = "pulses"


class GateState(str, Enum):
    AWAKE = "awake"
    HIBERNATING = "hibernating"


Count = Union[int, np.ndarray]


class FlopLedger:
    """Multiply/add counters keyed by (component, gate state)"""

    def __init__(self):
        self._counts: Dict[Tuple[Component, GateState], list] = defaultdict(lambda: [0, 0])

    def charge(self, component: Component, state: GateState, mults: int, adds: int) -> None:
        if mults < 0 or adds < 0:
            raise ValueError("flop charges must be non-negative")
        entry = self._counts[(Component(component), GateState(state))]
        entry[0] += int(mults)
        entry[1] += int(adds)

    @property
    def mults(self) -> int:
        return sum(m for m, _ in self._counts.values())

    @property
    def adds(self) -> int:
        return sum(a for _, a in self._counts.values())

    @property
    def total(self) -> int:
        return self.mults + self.adds

    def component_total(self, component: Component, state: GateState = None) -> int:
        return sum(
            m + a
            for (comp, st), (m, a) in self._counts.items()
            if comp == Component(component) and (state is None or st == GateState(state))
        )

    def merge(self, other: "FlopLedger") -> "FlopLedger":
        """In-place accumulation; returns self"""
        for key, (m, a) in other._counts.items():
            entry = self._counts[key]
            entry[0] += m
            entry[1] += a
        return self

    def __add__(self, other: "FlopLedger") -> "FlopLedger":
        return FlopLedger().merge(self).merge(other)

    def __eq__(self, other):
        if not isinstance(other, FlopLedger):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def to_dict(self) -> dict:
        """Full component x state breakdown, zero rows included"""
        breakdown = {}
        for comp in Component:
            breakdown[comp.value] = {}
            for state in GateState:
                m, a = self._counts.get((comp, state), (0, 0))
                breakdown[comp.value][state.value] = {"mults": m, "adds": a}
        return {"mults": self.mults, "adds": self.adds, "mflops": total_mflops(self), "breakdown": breakdown}

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def __repr__(self):
        return f"<FlopLedger mults={self.mults} adds={self.adds}>"


def merge_ledgers(ledgers: Iterable[FlopLedger]) -> FlopLedger:
    total = FlopLedger()
    for ledger in ledgers:
        total.merge(ledger)
    return total


def charge_matmul_event_driven(
    ledger: FlopLedger,
    shape: Tuple[int, int],
    n_act: Count,
    component: Component,
    state: GateState = GateState.AWAKE,
) -> None:
    """
    Per active input: one multiply per row; per row: (n_act - 1) accumulation adds
    plus one add merging into the membrane update. n_act may be a per-sample array.
    """
    rows, cols = shape
    n_act = np.atleast_1d(np.asarray(n_act, dtype=np.int64))
    if (n_act < 0).any() or (n_act > cols).any():
        raise ValueError(f"active input count out of range [0, {cols}]")
    active = n_act[n_act > 0]
    mults = rows * int(active.sum())
    adds = rows * int(np.maximum(active - 1, 0).sum()) + rows * active.size
    if mults or adds:
        ledger.charge(component, state, mults, adds)


def charge_decay(
    ledger: FlopLedger,
    layer_size: int,
    state: GateState = GateState.AWAKE,
    component: Component = Component.DECAY,
    samples: int = 1,
) -> None:
    """τ·u and ·(1 - z): 2s multiplies; (1 - z): s adds; per sample per step"""
    if layer_size and samples:
        ledger.charge(component, state, 2 * layer_size * samples, layer_size * samples)


def total_mflops(ledger: FlopLedger) -> float:
    return (ledger.mults + ledger.adds) / 1e6
