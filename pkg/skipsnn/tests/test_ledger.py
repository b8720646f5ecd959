import json

import numpy as np
import pytest

from skipsnn.config.schemas import LifConfig
from skipsnn.metrics.ledger import (
    Component,
    FlopLedger,
    GateState,
    charge_decay,
    charge_matmul_event_driven,
    merge_ledgers,
    total_mflops,
)
from skipsnn.snn.forward import GateMode, skipsnn_forward
from skipsnn.snn.params import init_params


def test_empty_ledger():
    """Test that a fresh ledger is all zeros"""
    ledger = FlopLedger()
    assert ledger.mults == 0
    assert ledger.adds == 0
    assert total_mflops(ledger) == 0.0


def test_matmul_charges():
    """Test the event-driven matmul rule on the worked examples"""
    ledger = FlopLedger()
    charge_matmul_event_driven(ledger, (4, 5), 1, Component.INPUT_MATMUL)
    assert (ledger.mults, ledger.adds) == (4, 4)

    ledger = FlopLedger()
    charge_matmul_event_driven(ledger, (4, 5), 3, Component.INPUT_MATMUL)
    assert (ledger.mults, ledger.adds) == (12, 12)

    ledger = FlopLedger()
    charge_matmul_event_driven(ledger, (4, 5), 0, Component.INPUT_MATMUL)
    assert ledger.total == 0


def test_matmul_rejects_out_of_range_counts():
    """Test that n_act must lie in [0, cols]"""
    with pytest.raises(ValueError):
        charge_matmul_event_driven(FlopLedger(), (4, 5), 6, Component.INPUT_MATMUL)
    with pytest.raises(ValueError):
        charge_matmul_event_driven(FlopLedger(), (4, 5), -1, Component.INPUT_MATMUL)


def test_matmul_per_sample_counts():
    """Test that an array of counts charges the sum of the scalar charges"""
    batched, single = FlopLedger(), FlopLedger()
    charge_matmul_event_driven(batched, (4, 5), np.array([1, 0, 3]), Component.HIDDEN_MATMUL)
    for n in (1, 0, 3):
        charge_matmul_event_driven(single, (4, 5), n, Component.HIDDEN_MATMUL)
    assert batched == single


def test_decay_charges():
    """Test the decay rule, including the zero-size layer"""
    ledger = FlopLedger()
    charge_decay(ledger, 0)
    assert ledger.total == 0

    charge_decay(ledger, 10)
    assert (ledger.mults, ledger.adds) == (20, 10)


def test_negative_charge_rejected():
    with pytest.raises(ValueError):
        FlopLedger().charge(Component.DECAY, GateState.AWAKE, -1, 0)


def test_decay_only_closed_form():
    """Test 300 steps of a silent 128-neuron layer cost exactly 300 * 2 * 128 mults"""
    params = init_params([4, 128, 2], 2, np.random.default_rng(0), pulse_periods=())
    params.ctrl_wz[:] = 0.0
    ledger = FlopLedger()
    skipsnn_forward(np.zeros((4, 300)), params, GateMode.FORCED_AWAKE, ledger=ledger)

    # Check the hidden layer decay (the output layer adds its own 2 neurons)
    hidden_mults = 300 * 2 * 128
    output_mults = 300 * 2 * 2
    decay = ledger.to_dict()["breakdown"]["decay"]["awake"]
    assert decay["mults"] == hidden_mults + output_mults
    assert ledger.component_total(Component.INPUT_MATMUL) == 0
    assert ledger.component_total(Component.HIDDEN_MATMUL) == 0


def test_batch_ledger_is_sum_of_samples(rng, tiny_params):
    """Test additivity: one batched pass costs the same as per-sample passes"""
    x = (rng.random((5, 8, 40)) < 0.3).astype(float)
    batched = FlopLedger()
    skipsnn_forward(x, tiny_params, GateMode.LEARNED, ledger=batched)

    parts = []
    for sample in x:
        ledger = FlopLedger()
        skipsnn_forward(sample, tiny_params, GateMode.LEARNED, ledger=ledger)
        parts.append(ledger)
    assert batched == merge_ledgers(parts)


def test_merge_is_commutative():
    a, b = FlopLedger(), FlopLedger()
    a.charge(Component.DECAY, GateState.AWAKE, 3, 1)
    b.charge(Component.PULSES, GateState.HIBERNATING, 2, 2)
    assert a + b == b + a
    assert (a + b).total == 8


def test_masking_never_adds_input_work(rng, tiny_params):
    """Test that any mask charges at most the all-ones input-matmul cost"""
    x = (rng.random((8, 50)) < 0.3).astype(float)
    x[0] = 1.0  # at least one event per step
    full = FlopLedger()
    skipsnn_forward(x, tiny_params, GateMode.EXTERNAL, ledger=full, mask=np.ones(50))
    full_input = full.component_total(Component.INPUT_MATMUL)

    for _ in range(10):
        mask = (rng.random(50) < 0.5).astype(float)
        mask[0] = 0.0
        ledger = FlopLedger()
        skipsnn_forward(x, tiny_params, GateMode.EXTERNAL, ledger=ledger, mask=mask)
        assert ledger.component_total(Component.INPUT_MATMUL) < full_input


def test_learned_gate_never_exceeds_forced_awake(rng):
    """Test learned-gate input cost against the forced-awake pass on random nets"""
    for _ in range(10):
        params = init_params([6, 5, 2], 2, rng, lif=LifConfig(tau=0.5, v_th=1.0), pulse_periods=(1, 4))
        params.ctrl_wz[:] = rng.uniform(-1, 1, size=5)
        x = (rng.random((3, 6, 30)) < 0.4).astype(float)
        learned, forced = FlopLedger(), FlopLedger()
        skipsnn_forward(x, params, GateMode.LEARNED, ledger=learned)
        skipsnn_forward(x, params, GateMode.FORCED_AWAKE, ledger=forced)
        assert learned.component_total(Component.INPUT_MATMUL) <= forced.component_total(Component.INPUT_MATMUL)


def test_dense_input_matches_event_driven_count(tiny_params):
    """Test that all-ones input charges the dense r*c mults per step"""
    ledger = FlopLedger()
    skipsnn_forward(np.ones((8, 7)), tiny_params, GateMode.FORCED_AWAKE, ledger=ledger)
    breakdown = ledger.to_dict()["breakdown"]["input-matmul"]["awake"]
    assert breakdown["mults"] == 7 * 6 * 8


def test_json_export_has_full_breakdown():
    """Test that the export lists every component and state"""
    ledger = FlopLedger()
    ledger.charge(Component.CONTROLLER, GateState.HIBERNATING, 5, 4)
    payload = json.loads(ledger.to_json())

    assert set(payload["breakdown"]) == {c.value for c in Component}
    for states in payload["breakdown"].values():
        assert set(states) == {"awake", "hibernating"}
    assert payload["breakdown"]["controller"]["hibernating"] == {"mults": 5, "adds": 4}
    assert payload["mflops"] == pytest.approx(9e-6)
