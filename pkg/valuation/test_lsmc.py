import itertools

import numpy as np
import pytest

from constants import ACTIONS
from errors import DomainError, GridError
from storage.contract import cash_flows, next_volumes

from .lsmc import evaluate_policy_forward, fit_policy_backward
from .market import MarketPaths


def best_schedule_value(spot, s) -> float:
    """brute force over every action sequence that ends on the target"""
    best = -np.inf
    for codes in itertools.product(range(len(ACTIONS)), repeat=s.n_steps):
        v, cash = s.v_start, 0.0
        for i, code in enumerate(codes):
            landing = float(next_volumes(v, code, s))
            cash += float(cash_flows(spot[i], v, landing, s))
            v = landing
        if abs(v - s.v_end_target) < 1e-9:
            best = max(best, cash)
    return best


# (v_start, v_end_target, cost_per_unit, a_with)
CONTRACT_CASES = [
    (0.0, 0.0, 0.0, 1.0),
    (1.0, 0.0, 0.2, 1.0),
    (0.0, 2.0, 0.0, 1.0),
    (2.0, 1.0, 0.5, 1.0),
    (1.0, 1.0, 0.1, 0.5),
]


@pytest.mark.parametrize('seed', range(30))
def test_deterministic_paths_match_enumeration(tiny_spec, paths_factory, seed):
    v_start, target, cost, a_with = CONTRACT_CASES[seed % len(CONTRACT_CASES)]
    s = tiny_spec.copy(v_start=v_start, v_end_target=target, cost_per_unit=cost, a_with=a_with)
    spot = np.random.default_rng(seed).uniform(1.0, 9.0, len(s.dates))
    market = paths_factory(s, spot)
    policy = fit_policy_backward(market, s)
    expected = best_schedule_value(spot, s)
    assert np.isfinite(expected)
    assert policy.backward_value == pytest.approx(expected, abs=1e-9)
    result = evaluate_policy_forward(policy, market, s)
    assert np.allclose(result.wealth, expected, atol=1e-9)
    assert result.off_node == 0
    assert np.allclose(result.volumes[:, -1], target)


@pytest.mark.parametrize('spot', [
    [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
    [6.0, 5.0, 4.0, 3.0, 2.0, 1.0],
])
def test_monotone_prices_match_enumeration(tiny_spec, paths_factory, spot):
    policy = fit_policy_backward(paths_factory(tiny_spec, spot), tiny_spec)
    assert policy.backward_value == pytest.approx(best_schedule_value(spot, tiny_spec), abs=1e-9)


def test_buy_low_sell_high(tiny_spec, paths_factory):
    market = paths_factory(tiny_spec, [3.0, 5.0, 2.0, 6.0, 1.0, 4.0])
    policy = fit_policy_backward(market, tiny_spec)
    result = evaluate_policy_forward(policy, market, tiny_spec)
    assert result.action_names(0) == ['inj', 'with', 'inj', 'with', 'no']
    assert result.wealth[0] == pytest.approx(6.0)


def test_costs_reduce_value(tiny_spec, paths_factory):
    spot = [3.0, 5.0, 2.0, 6.0, 1.0, 4.0]
    costly = tiny_spec.copy(cost_per_unit=1.5)
    policy = fit_policy_backward(paths_factory(costly, spot), costly)
    # only the 2 -> 6 round trip still pays
    assert policy.backward_value == pytest.approx(1.0)
    assert policy.backward_value == pytest.approx(best_schedule_value(spot, costly))


def test_flat_prices_are_worth_nothing(tiny_spec, paths_factory):
    policy = fit_policy_backward(paths_factory(tiny_spec, [4.0] * 6), tiny_spec)
    result = evaluate_policy_forward(policy, paths_factory(tiny_spec, [4.0] * 6), tiny_spec)
    # ties resolve to doing nothing
    assert np.all(result.volumes == 0.0)


def test_random_paths_respect_bounds_and_target(tiny_spec):
    rng = np.random.default_rng(3)
    spot = np.exp(rng.normal(1.5, 0.4, (600, len(tiny_spec.dates))))
    prompt = np.exp(rng.normal(1.5, 0.1, spot.shape))
    market = MarketPaths(tiny_spec.dates, spot, prompt)
    policy = fit_policy_backward(market, tiny_spec)
    forward = MarketPaths(tiny_spec.dates, spot[::-1].copy(), prompt[::-1].copy())
    result = evaluate_policy_forward(policy, forward, tiny_spec)
    assert np.all(result.volumes >= tiny_spec.v_min) and np.all(result.volumes <= tiny_spec.v_max)
    assert np.allclose(result.volumes[:, -1], tiny_spec.v_end_target)
    assert np.all(np.abs(np.diff(result.volumes, axis=1)) <= 1.0 + 1e-12)
    assert np.allclose(result.wealth, result.cash.sum(axis=1))


def test_backward_needs_enough_paths(tiny_spec, paths_factory):
    with pytest.raises(DomainError):
        fit_policy_backward(paths_factory(tiny_spec, [4.0] * 6, n_paths=5), tiny_spec)


def test_grid_mismatch(tiny_spec, paths_factory):
    policy = fit_policy_backward(paths_factory(tiny_spec, [4.0] * 6), tiny_spec)
    longer = tiny_spec.copy(end_date=tiny_spec.end_date.replace(day=7))
    with pytest.raises(GridError):
        evaluate_policy_forward(policy, paths_factory(longer, [4.0] * 7), tiny_spec)
