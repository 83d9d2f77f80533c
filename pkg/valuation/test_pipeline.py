from datetime import date

import numpy as np
import pytest

from curve.params import GabillonParams
from errors import DomainError, InsufficientCurveError
from intrinsic.lp import intrinsic_value
from market.synthetic import seasonal_curve
from spot.params import SpotParams
from storage.contract import StorageSpec
from utils import month_range

from .pipeline import ValuationReport, ValuationSetup, contract_curve, evaluate_historical, simulate_market, starting_curve, value_storage


def monthly_curve(first: date, last: date) -> list[tuple[date, float]]:
    months = month_range(first, last)
    return list(zip(months, seasonal_curve(months)))


@pytest.fixture
def month_spec() -> StorageSpec:
    return StorageSpec.from_preset('fast', date(2007, 4, 1), date(2007, 5, 1))


@pytest.fixture
def setup(month_spec) -> ValuationSetup:
    return ValuationSetup(
        month_spec,
        GabillonParams.reference(),
        SpotParams.reference(2),
        monthly_curve(date(2007, 4, 1), date(2008, 6, 1)),
        n_paths=200,
        deltas=['1', '2'],
    )


def test_contract_curve_selects_window_maturities():
    s = StorageSpec(0, 1, 1, 1, 0, 0, date(2008, 1, 15), date(2008, 3, 15))
    curve = contract_curve(monthly_curve(date(2008, 1, 1), date(2008, 12, 1)), s)
    assert [m.month for m, _ in curve] == [2, 3, 4, 5]


def test_contract_curve_needs_two_contracts_after_the_end():
    s = StorageSpec(0, 1, 1, 1, 0, 0, date(2008, 1, 15), date(2008, 3, 15))
    with pytest.raises(InsufficientCurveError):
        contract_curve(monthly_curve(date(2008, 1, 1), date(2008, 4, 1)), s)


def test_starting_curve_is_last_observation_before_start(synthetic_history):
    observed, curve, spot = starting_curve(synthetic_history, date(2007, 4, 1))
    assert observed == date(2007, 3, 31)
    assert curve[0][0] == date(2007, 4, 1)
    assert spot == synthetic_history.spot[synthetic_history.index_of(observed)]


def test_simulated_market_shapes(setup):
    market = simulate_market(setup, seed=5, n_paths=50)
    assert market.spot.shape == (50, len(setup.spec.dates))
    assert market.futures.shape == (50, len(setup.spec.dates), 3)
    assert list(market.prompt_index[:30]) == [0] * 30
    assert market.prompt_index[-1] == 1
    assert np.all(market.spot > 0)


def test_value_storage(setup):
    outcome = value_storage(setup, seed_backward=11, seed_forward=12)
    report = outcome.report
    assert report.n_paths == 200
    assert np.isfinite(report.extrinsic_value) and np.isfinite(report.backward_value)
    assert report.std_error == pytest.approx(report.std_unhedged / np.sqrt(200))
    assert set(report.hedged) == {'1', '2'}
    assert report.std_hedged == pytest.approx(np.std(report.hedged['2'], ddof=1))
    assert np.allclose(outcome.forward.volumes[:, -1], setup.spec.v_end_target)
    summary = report.to_dict()
    assert {'extrinsic_value', 'std_error', 'std_unhedged', 'std_hedged', 'mean_hedged_delta1', 'std_hedged_delta2'} <= set(summary)


def test_value_storage_is_reproducible(setup):
    first = value_storage(setup.with_spot_params(SpotParams.reference(2).without_spikes()), 11, 12)
    second = value_storage(setup.with_spot_params(SpotParams.reference(2).without_spikes()), 11, 12)
    assert np.array_equal(first.report.per_path_wealth, second.report.per_path_wealth)
    assert np.array_equal(first.report.hedged['2'], second.report.hedged['2'])


def test_with_spot_params_leaves_original(setup):
    other = setup.with_spot_params(SpotParams.reference(1))
    assert setup.spot_params.model_id == 2
    assert other.spot_params.model_id == 1
    assert other.curve == setup.curve


def test_historical_evaluation(setup, synthetic_history):
    outcome = value_storage(setup, 11, 12)
    historical = evaluate_historical(outcome, synthetic_history)
    assert historical.forward.n_paths == 1
    assert np.isfinite(historical.wealth)
    assert set(historical.hedged) == {'1', '2'}
    assert historical.forward.volumes[0, -1] == pytest.approx(setup.spec.v_end_target)


def test_report_of_single_path():
    report = ValuationReport(np.array([3.0]), {})
    assert report.extrinsic_value == 3.0
    assert report.std_unhedged == 0.0
    assert report.std_hedged == 0.0
    with pytest.raises(DomainError):
        ValuationReport(np.array([]), {})


@pytest.mark.parametrize('facility', ['slow', 'medium', 'fast'])
def test_simulated_value_covers_the_intrinsic_value(lease_outcomes, facility):
    outcome = lease_outcomes[facility]
    s = outcome.setup.spec
    intrinsic = intrinsic_value(outcome.setup.curve, s.v_start, s)
    assert intrinsic.value > 0
    assert outcome.report.extrinsic_value >= intrinsic.value - 2 * outcome.report.std_error


def test_faster_storage_is_worth_more(lease_outcomes):
    reports = [lease_outcomes[name].report for name in ['slow', 'medium', 'fast']]
    for slower, faster in zip(reports, reports[1:]):
        slack = 2 * np.hypot(slower.std_error, faster.std_error)
        assert faster.extrinsic_value >= slower.extrinsic_value - slack
    assert reports[-1].extrinsic_value > reports[0].extrinsic_value
