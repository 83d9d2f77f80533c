from datetime import date

import numpy as np
import pytest

from errors import DomainError, GridError

from .deltas import fit_delta1, fit_delta2, hedge_leg, hedge_targets, hedged_wealth

MATURITIES = [date(2008, 2, 1), date(2008, 3, 1)]
VOLUMES = [0.0, 1.0, 0.0, 1.0, 0.0, 0.0]


def flat_futures(s, level=4.0):
    return np.full((len(s.dates), len(MATURITIES)), level)


def test_targets_sum_remaining_changes(tiny_spec, futures_factory):
    market = futures_factory(tiny_spec, flat_futures(tiny_spec), MATURITIES)
    targets = hedge_targets('1', np.tile(VOLUMES, (20, 1)), market)
    assert targets.shape == (20, 5, 2)
    assert list(targets[0, :, 0]) == [0.0, -1.0, 0.0, -1.0, 0.0]
    # the back contract is never the prompt
    assert not targets[:, :, 1].any()


def test_constant_futures_make_both_deltas_agree(tiny_spec, futures_factory):
    market = futures_factory(tiny_spec, flat_futures(tiny_spec), MATURITIES)
    volumes = np.tile(VOLUMES, (20, 1))
    assert np.allclose(hedge_targets('1', volumes, market), hedge_targets('2', volumes, market))


def test_price_weighting(tiny_spec, futures_factory):
    rows = np.column_stack([np.arange(1.0, 7.0), np.full(6, 5.0)])
    market = futures_factory(tiny_spec, rows, MATURITIES)
    targets = hedge_targets('2', np.tile(VOLUMES, (20, 1)), market)
    # from step 1 on: -1 at F=2, +1 at F=3, -1 at F=4, in units of F(t_1) = 2
    assert targets[0, 1, 0] == pytest.approx((-2.0 + 3.0 - 4.0) / 2.0)
    assert targets[0, 3, 0] == pytest.approx(-1.0)


def test_unknown_kind_and_missing_futures(tiny_spec, paths_factory, futures_factory):
    market = futures_factory(tiny_spec, flat_futures(tiny_spec), MATURITIES)
    with pytest.raises(DomainError):
        hedge_targets('3', np.zeros((20, 6)), market)
    with pytest.raises(GridError):
        hedge_targets('1', np.zeros((20, 6)), paths_factory(tiny_spec, [4.0] * 6))


def test_idle_storage_needs_no_hedge(tiny_spec, futures_factory):
    market = futures_factory(tiny_spec, flat_futures(tiny_spec), MATURITIES)
    plan = fit_delta1(np.zeros((20, 6)), market)
    assert not plan.coefficients.any()
    assert not hedge_leg(plan, market).any()


def test_fitted_positions_on_identical_paths(tiny_spec, futures_factory):
    rows = np.column_stack([np.arange(1.0, 7.0), np.full(6, 5.0)])
    market = futures_factory(tiny_spec, rows, MATURITIES)
    volumes = np.tile(VOLUMES, (20, 1))
    plan = fit_delta1(volumes, market)
    positions = np.array([plan.deltas(i, market.features(i, plan.basis_spec))[0, 0] for i in range(5)])
    assert np.allclose(positions, [0.0, -1.0, 0.0, -1.0, 0.0], atol=1e-9)
    # the prompt rises by one per day
    assert hedge_leg(plan, market) == pytest.approx(np.full(20, -2.0))
    assert hedged_wealth(np.ones(20), plan, market) == pytest.approx(np.full(20, -1.0))
    assert not plan.deltas(5, market.features(5, plan.basis_spec)).any()


def test_positions_vanish_after_expiry(tiny_spec, futures_factory):
    maturities = [date(2008, 1, 3), date(2008, 3, 1)]
    rows = np.column_stack([np.arange(1.0, 7.0), np.full(6, 5.0)])
    market = futures_factory(tiny_spec, rows, maturities)
    plan = fit_delta2(np.tile(VOLUMES, (20, 1)), market)
    assert list(market.live[:, 0]) == [True, True, False, False, False, False]
    for i in range(2, 5):
        assert not plan.deltas(i, market.features(i, plan.basis_spec))[:, 0].any()


def test_plan_and_paths_must_share_maturities(tiny_spec, futures_factory):
    market = futures_factory(tiny_spec, flat_futures(tiny_spec), MATURITIES)
    plan = fit_delta1(np.tile(VOLUMES, (20, 1)), market)
    other = futures_factory(tiny_spec, flat_futures(tiny_spec), [date(2008, 2, 1), date(2008, 4, 1)])
    with pytest.raises(GridError):
        hedge_leg(plan, other)


def mean_gap_bound(report, hedged: np.ndarray) -> float:
    return 3 * np.hypot(report.std_error, np.std(hedged, ddof=1) / np.sqrt(len(hedged)))


@pytest.mark.parametrize('facility', ['slow', 'fast'])
@pytest.mark.parametrize('kind', ['1', '2'])
def test_hedge_keeps_the_mean_and_cuts_the_spread(lease_outcomes, facility, kind):
    report = lease_outcomes[facility].report
    hedged = report.hedged[kind]
    assert len(hedged) == report.n_paths
    assert abs(np.mean(hedged) - report.extrinsic_value) <= mean_gap_bound(report, hedged)
    assert np.std(hedged, ddof=1) < report.std_unhedged


def test_tangent_delta_hedges_slow_storage_best(lease_outcomes):
    report = lease_outcomes['slow'].report
    std_volume = np.std(report.hedged['1'], ddof=1)
    std_tangent = np.std(report.hedged['2'], ddof=1)
    assert report.std_unhedged >= 2 * std_tangent
    # the standard error of a sample standard deviation is std / sqrt(2 (n - 1))
    assert std_tangent <= std_volume + 2 * std_volume / np.sqrt(2 * (report.n_paths - 1))
