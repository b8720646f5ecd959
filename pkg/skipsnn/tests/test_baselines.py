import numpy as np
import pytest

from skipsnn.baselines.policies import (
    ScheduleKind,
    closest_ratio,
    evaluate_gate_mode,
    evaluate_policy,
    fixed_factory,
    fixed_skip_mask,
    random_factory,
    random_skip_mask,
)
from skipsnn.metrics.ledger import FlopLedger
from skipsnn.snn.forward import GateMode


def test_fixed_mask_ninety_percent():
    """Test awake 9 then skip 1"""
    schedule = fixed_skip_mask(20, 0.9)
    assert (schedule.awake_steps, schedule.period) == (9, 10)
    assert schedule.mask.tolist() == ([1.0] * 9 + [0.0]) * 2
    assert schedule.realized_fraction == pytest.approx(0.9)
    assert schedule.kind == ScheduleKind.FIXED


def test_fixed_mask_half():
    assert fixed_skip_mask(4, 0.5).mask.tolist() == [1.0, 0.0, 1.0, 0.0]


def test_fixed_mask_always_awake():
    assert fixed_skip_mask(7, 1.0).mask.tolist() == [1.0] * 7


def test_fixed_mask_closest_ratio():
    """Test that 0.1333 resolves to 2 awake in every 15"""
    assert closest_ratio(0.1333) == (2, 15)
    schedule = fixed_skip_mask(300, 0.1333)
    assert schedule.realized_fraction == pytest.approx(2 / 15)


@pytest.mark.parametrize("f", [0.0, -0.1, 1.5])
def test_fixed_mask_invalid_fraction(f):
    with pytest.raises(ValueError):
        fixed_skip_mask(10, f)


def test_random_mask_extremes(rng):
    assert random_skip_mask(50, 1.0, rng).mask.tolist() == [1.0] * 50
    assert random_skip_mask(50, 0.0, rng).mask.tolist() == [0.0] * 50


def test_random_mask_concentration():
    """Test that p=0.1 over 10^4 steps lands within 0.01 of the target"""
    schedule = random_skip_mask(10_000, 0.1, np.random.default_rng(42))
    assert abs(schedule.realized_fraction - 0.1) < 0.01
    assert schedule.target_fraction == 0.1


@pytest.mark.parametrize("p", [-0.01, 1.01])
def test_random_mask_invalid_probability(rng, p):
    with pytest.raises(ValueError):
        random_skip_mask(10, p, rng)


def test_random_factory_redraws_per_sample():
    """Test that masks differ across samples and repeat for the same index"""
    factory = random_factory(0.5, seed=3)
    assert not np.array_equal(factory(0, 200).mask, factory(1, 200).mask)
    assert np.array_equal(factory(4, 200).mask, factory(4, 200).mask)


def test_all_ones_policy_matches_forced_awake(tiny_dataset, tiny_params):
    """Test that the always-awake schedule reproduces plain evaluation, flops included"""
    _, test = tiny_dataset
    policy_ledger, forced_ledger = FlopLedger(), FlopLedger()
    policy = evaluate_policy(test, tiny_params, fixed_factory(1.0), policy_ledger)
    forced = evaluate_gate_mode(test, tiny_params, GateMode.FORCED_AWAKE, forced_ledger)

    assert policy.accuracy == forced.accuracy
    assert policy.mflops == forced.mflops
    assert policy.awake_frac == 1.0
    assert policy_ledger == forced_ledger


def test_all_zeros_policy_is_chance(tiny_dataset, tiny_params):
    """Test that an input-blind network always predicts class 0"""
    _, test = tiny_dataset
    blind = lambda index, T: random_skip_mask(T, 0.0, np.random.default_rng(index))
    result = evaluate_policy(test, tiny_params, blind)

    labels = np.array([t.label for t in test])
    assert result.awake_frac == 0.0
    assert result.accuracy == pytest.approx(np.mean(labels == 0))
    assert result.accuracy == pytest.approx(0.5)


def test_skipping_lowers_cost(tiny_dataset, tiny_params):
    _, test = tiny_dataset
    full = evaluate_policy(test, tiny_params, fixed_factory(1.0))
    half = evaluate_policy(test, tiny_params, fixed_factory(0.5))
    assert half.mflops < full.mflops
    assert half.awake_frac == pytest.approx(0.5)
    assert half.target_fraction == 0.5
