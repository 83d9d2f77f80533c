import itertools
from datetime import date

import numpy as np
import pytest

from errors import DomainError, EmptyInputError, InfeasibleError, OrderingError
from storage.contract import StorageSpec
from utils import month_range

from .lp import curve_series, intrinsic_value, rolling_intrinsic, strategy_value, tradable_months

NEW_YEAR = date(2007, 12, 31)


@pytest.fixture
def two_day_spec() -> StorageSpec:
    """one decision in January, one in February"""
    return StorageSpec(0.0, 1.0, 1.0, 1.0, 0.0, 0.0, date(2008, 1, 31), date(2008, 2, 2))


@pytest.fixture
def spring_spec() -> StorageSpec:
    return StorageSpec(0.0, 3.0, 1.0, 1.0, 0.0, 0.0, date(2008, 1, 1), date(2008, 5, 1))


def priced(prices, first=date(2008, 1, 1)):
    months = month_range(first, date(first.year + 2, 1, 1))[:len(prices)]
    return list(zip(months, prices))


def brute_force(curve, s: StorageSpec, v_current: float) -> float:
    """best integer schedule; the constraint matrix is an interval matrix, so integer vertices are optimal"""
    _, prices, days = tradable_months(curve, s, NEW_YEAR)
    best = -np.inf
    span = int(s.v_max - s.v_min)
    for alphas in itertools.product(range(-span, span + 1), repeat=len(prices)):
        alphas = np.array(alphas, dtype=float)
        volumes = v_current + np.cumsum(alphas)
        if np.any(alphas > days * s.inj_step) or np.any(-alphas > days * s.with_step):
            continue
        if np.any(volumes < s.v_min) or np.any(volumes > s.v_max) or volumes[-1] != s.v_end_target:
            continue
        best = max(best, strategy_value(alphas, prices, s.cost_per_unit))
    return best


def test_buy_january_sell_february(two_day_spec):
    solution = intrinsic_value(priced([3.0, 5.0]), 0.0, two_day_spec, NEW_YEAR)
    assert solution.value == pytest.approx(2.0)
    assert np.allclose(solution.positions, [1.0, -1.0])
    assert solution.position_of(date(2008, 2, 1)) == pytest.approx(-1.0)
    assert solution.position_of(date(2009, 2, 1)) == 0.0
    assert solution.binding == ['2008-01:injection_rate', '2008-01:v_max', '2008-02:withdrawal_rate', '2008-02:v_min']
    assert list(solution.to_frame().columns) == ['maturity', 'alpha']


def test_falling_curve_is_worth_nothing(two_day_spec):
    solution = intrinsic_value(priced([5.0, 3.0]), 0.0, two_day_spec, NEW_YEAR)
    assert solution.value == pytest.approx(0.0)
    assert np.allclose(solution.positions, 0.0)


def test_delivery_days_per_month(spring_spec):
    maturities, prices, days = tradable_months(priced([1.0] * 6), spring_spec, NEW_YEAR)
    assert [m.month for m in maturities] == [1, 2, 3, 4]
    assert list(days) == [31, 29, 31, 30]
    # from mid-February, January has expired and February has 15 decision days left
    maturities, _, days = tradable_months(priced([1.0] * 6), spring_spec, date(2008, 2, 15))
    assert [m.month for m in maturities] == [3, 4]
    maturities, _, days = tradable_months(priced([1.0] * 6), spring_spec, date(2008, 2, 15), expiry_offset_days=20)
    assert [m.month for m in maturities] == [2, 3, 4]
    assert days[0] == 15


# (end_date, v_current, v_end_target, cost_per_unit)
LEASE_CASES = [
    (date(2008, 5, 1), 0.0, 0.0, 0.0),
    (date(2008, 5, 1), 1.0, 3.0, 0.0),
    (date(2008, 4, 1), 3.0, 0.0, 0.1),
    (date(2008, 3, 1), 0.0, 0.0, 0.25),
    (date(2008, 4, 1), 2.0, 1.0, 0.5),
]


@pytest.mark.parametrize('seed', range(30))
def test_matches_integer_enumeration(spring_spec, seed):
    end, v_current, target, cost = LEASE_CASES[seed % len(LEASE_CASES)]
    s = spring_spec.copy(end_date=end, v_start=v_current, v_end_target=target, cost_per_unit=cost)
    curve = priced(np.random.default_rng(seed).uniform(2.0, 8.0, 6))
    solution = intrinsic_value(curve, v_current, s, NEW_YEAR)
    assert solution.value == pytest.approx(brute_force(curve, s, v_current), abs=1e-7)
    assert np.all(solution.volumes >= s.v_min - 1e-9) and np.all(solution.volumes <= s.v_max + 1e-9)
    assert solution.volumes[-1] == pytest.approx(target)


def test_price_scaling_and_shift(spring_spec):
    prices = np.array([6.0, 5.5, 4.0, 7.0, 6.5, 5.0])
    base = intrinsic_value(priced(prices), 0.0, spring_spec, NEW_YEAR).value
    assert base > 0
    assert intrinsic_value(priced(2 * prices), 0.0, spring_spec, NEW_YEAR).value == pytest.approx(2 * base)
    # a round trip pays no level
    assert intrinsic_value(priced(prices + 3.0), 0.0, spring_spec, NEW_YEAR).value == pytest.approx(base)


def test_costs_lower_the_value(spring_spec):
    curve = priced([6.0, 5.5, 4.0, 7.0, 6.5, 5.0])
    costly = spring_spec.copy(cost_per_unit=0.25)
    assert intrinsic_value(curve, 0.0, costly, NEW_YEAR).value < intrinsic_value(curve, 0.0, spring_spec, NEW_YEAR).value
    assert intrinsic_value(curve, 0.0, costly, NEW_YEAR).value == pytest.approx(brute_force(curve, costly, 0.0), abs=1e-7)


def test_unreachable_target_reports_prefix(two_day_spec):
    s = two_day_spec.copy(v_max=5.0, v_end_target=5.0)
    with pytest.raises(InfeasibleError) as info:
        intrinsic_value(priced([3.0, 5.0]), 0.0, s, NEW_YEAR)
    assert info.value.prefix == 0


def test_invalid_inputs(two_day_spec):
    with pytest.raises(EmptyInputError):
        intrinsic_value([], 0.0, two_day_spec, NEW_YEAR)
    with pytest.raises(OrderingError):
        intrinsic_value(list(reversed(priced([3.0, 5.0]))), 0.0, two_day_spec, NEW_YEAR)
    with pytest.raises(DomainError):
        intrinsic_value(priced([3.0, 5.0]), 2.0, two_day_spec, NEW_YEAR)


def test_rolling_intrinsic_never_loses(spring_spec):
    rng = np.random.default_rng(11)
    prices = np.array([6.0, 5.5, 4.0, 7.0, 6.5, 5.0])
    series = []
    for day in [NEW_YEAR] + [date(2008, 1, 1 + 7 * k) for k in range(4)] + [date(2008, 2, 10), date(2008, 3, 5)]:
        prices = prices * np.exp(rng.normal(0.0, 0.1, len(prices)))
        series.append((day, priced(prices)))
    ri = rolling_intrinsic(series, spring_spec)
    assert ri.final_value >= ri.initial.value - 1e-9
    assert np.all(np.diff(ri.values) >= -1e-9)
    assert ri.values[0] == pytest.approx(ri.initial.value)
    assert not ri.rebalanced[0]
    assert list(ri.to_frame().columns) == ['date', 'ri', 'rebalanced']
    # every held position respects the physical limits
    held = np.array([ri.positions[m] for m in sorted(ri.positions)])
    assert np.all(np.cumsum(held) <= spring_spec.v_max + 1e-9)
    assert np.cumsum(held)[-1] == pytest.approx(spring_spec.v_end_target)


def test_rolling_intrinsic_on_unchanged_curve(spring_spec):
    curve = priced([6.0, 5.5, 4.0, 7.0, 6.5, 5.0])
    ri = rolling_intrinsic([(NEW_YEAR, curve), (date(2008, 1, 1), curve), (date(2008, 1, 2), curve)], spring_spec)
    assert ri.final_value == pytest.approx(ri.initial.value)
    assert not ri.rebalanced.any()


def test_rolling_intrinsic_needs_increasing_dates(spring_spec):
    curve = priced([6.0, 5.5, 4.0, 7.0])
    with pytest.raises(EmptyInputError):
        rolling_intrinsic([(NEW_YEAR, curve)], spring_spec)
    with pytest.raises(OrderingError):
        rolling_intrinsic([(date(2008, 1, 2), curve), (date(2008, 1, 1), curve)], spring_spec)


def test_curve_series_from_history(synthetic_history):
    s = StorageSpec(0.0, 3.0, 1.0, 1.0, 0.0, 0.0, date(2007, 4, 1), date(2007, 4, 11))
    first = (date(2007, 3, 31), synthetic_history.curve_at(synthetic_history.index_of(date(2007, 3, 31))))
    series = curve_series(synthetic_history, s, first)
    assert [d for d, _ in series] == [date(2007, 3, 31)] + s.dates[:-1]
    ri = rolling_intrinsic(series, s)
    assert ri.final_value >= ri.initial.value - 1e-9
