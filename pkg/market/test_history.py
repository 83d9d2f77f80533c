from datetime import date

import numpy as np
import pytest

from errors import EmptyInputError, GapError, InsufficientCurveError, OrderingError, ParseError
from utils import daterange

from .history import (
    PriceHistory,
    constant_maturity_returns,
    live_contracts,
    load_price_history,
    read_price_csv,
    rolling_series,
    write_price_history,
)

SPOT_CSV = """date,price
2008-01-01,7.5
2008-01-02,7.6
2008-01-03,7.4
"""

CURVE_CSV = """date,maturity_month,price
2008-01-01,2008-02,7.8
2008-01-01,2008-03,7.9
2008-01-02,2008-02,7.7
2008-01-02,2008-03,7.95
2008-01-03,2008-02,7.6
2008-01-03,2008-03,7.7
"""


def write(tmp_path, name: str, text: str) -> str:
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_load_small_history(tmp_path):
    history = load_price_history(write(tmp_path, 'spot.csv', SPOT_CSV), write(tmp_path, 'curve.csv', CURVE_CSV))
    assert history.dates == daterange(date(2008, 1, 1), date(2008, 1, 3))
    assert history.maturities == [date(2008, 2, 1), date(2008, 3, 1)]
    assert history.curves[1, 1] == 7.95
    assert history.curve_at(2) == [(date(2008, 2, 1), 7.6), (date(2008, 3, 1), 7.7)]


@pytest.mark.parametrize('text, line', [
    ('date,price\n2008-01-01,7.5\n2008-13-02,7.6\n', 3),
    ('date,price\n2008-01-01,7.5\n2008-01-02,abc\n', 3),
    ('date,price\n2008-01-01,-7.5\n', 2),
    ('day,price\n2008-01-01,7.5\n', 1),
])
def test_parse_errors_name_the_line(tmp_path, text, line):
    with pytest.raises(ParseError) as info:
        read_price_csv(write(tmp_path, 'spot.csv', text), 'spot')
    assert info.value.line == line
    assert 'spot.csv' in str(info.value)


def test_spot_dates_must_increase(tmp_path):
    with pytest.raises(OrderingError) as info:
        read_price_csv(write(tmp_path, 'spot.csv', 'date,price\n2008-01-02,7.5\n2008-01-02,7.6\n'), 'spot')
    assert info.value.details['line'] == 3


def test_duplicated_curve_rows(tmp_path):
    with pytest.raises(OrderingError):
        read_price_csv(write(tmp_path, 'curve.csv', 'date,maturity_month,price\n2008-01-01,2008-02,7\n2008-01-01,2008-02,8\n'), 'curve')


def test_empty_inputs(tmp_path):
    with pytest.raises(EmptyInputError):
        read_price_csv(write(tmp_path, 'spot.csv', ''), 'spot')
    with pytest.raises(EmptyInputError):
        read_price_csv(write(tmp_path, 'spot.csv', 'date,price\n'), 'spot')


def test_every_spot_date_needs_a_curve(tmp_path):
    curve = '\n'.join(CURVE_CSV.splitlines()[:-2]) + '\n'
    with pytest.raises(InsufficientCurveError):
        load_price_history(write(tmp_path, 'spot.csv', SPOT_CSV), write(tmp_path, 'curve.csv', curve))


def test_delivered_month_is_rejected():
    with pytest.raises(OrderingError):
        PriceHistory([date(2008, 2, 5)], np.array([7.0]), [date(2008, 1, 1)], np.array([[7.0]]))


def test_every_curve_needs_two_maturities(tmp_path):
    with pytest.raises(InsufficientCurveError) as info:
        PriceHistory([date(2008, 1, 1), date(2008, 1, 2)], np.ones(2), [date(2008, 2, 1), date(2008, 3, 1)], np.array([[7.0, 7.1], [7.0, np.nan]]))
    assert info.value.details['date'] == '2008-01-02'
    curve = '\n'.join(line for line in CURVE_CSV.splitlines() if not line.startswith('2008-01-03,2008-03')) + '\n'
    with pytest.raises(InsufficientCurveError):
        load_price_history(write(tmp_path, 'spot.csv', SPOT_CSV), write(tmp_path, 'curve.csv', curve))


def test_round_trip(synthetic_history, tmp_path):
    part = synthetic_history.window(date(2007, 1, 1), date(2007, 2, 28))
    spot_path, curve_path = str(tmp_path / 'spot.csv'), str(tmp_path / 'curve.csv')
    write_price_history(part, spot_path, curve_path)
    loaded = load_price_history(spot_path, curve_path)
    assert loaded.dates == part.dates
    assert np.allclose(loaded.spot, part.spot, rtol=1e-9)
    quoted = [m for m in part.maturities if m in loaded.maturities]
    assert quoted == loaded.maturities
    columns = [part.maturities.index(m) for m in quoted]
    assert np.allclose(loaded.curves, part.curves[:, columns], rtol=1e-9, equal_nan=True)


def test_windows(synthetic_history):
    window = synthetic_history.window(date(2007, 3, 1), date(2007, 3, 31))
    assert len(window) == 31
    assert window.index_of(date(2007, 3, 2)) == 1
    with pytest.raises(GapError):
        window.index_of(date(2007, 4, 1))
    assert synthetic_history.before(date(2003, 1, 3)).dates == [date(2003, 1, 1), date(2003, 1, 2)]
    with pytest.raises(EmptyInputError):
        synthetic_history.before(date(2003, 1, 1))
    gappy = PriceHistory([date(2008, 1, 1), date(2008, 1, 3)], np.ones(2), [date(2008, 2, 1), date(2008, 3, 1)], np.ones((2, 2)))
    with pytest.raises(GapError):
        gappy.window(date(2008, 1, 1), date(2008, 1, 3))


def test_prompt_rolls_on_expiry(synthetic_history):
    april = synthetic_history.index_of(date(2007, 4, 30))
    may = synthetic_history.maturities.index(date(2007, 5, 1))
    assert live_contracts(synthetic_history, april)[0] == may
    assert live_contracts(synthetic_history, april, expiry_offset_days=-2)[0] == may + 1
    series = rolling_series(synthetic_history.window(date(2007, 4, 29), date(2007, 5, 2)))
    assert series.prompt_maturity == [date(2007, 5, 1)] * 2 + [date(2007, 6, 1)] * 2
    assert series.back_maturity[-1] == date(2007, 7, 1)
    assert np.allclose(series.spread, (series.spot - series.prompt) / series.prompt)


def test_constant_maturity_returns(synthetic_history):
    part = synthetic_history.window(date(2007, 4, 25), date(2007, 5, 5))
    prompt_returns, long_returns = constant_maturity_returns(part, 1.0)
    assert len(prompt_returns) == len(long_returns) == len(part) - 1
    assert np.all(np.abs(prompt_returns) < 0.5)
    with pytest.raises(InsufficientCurveError):
        constant_maturity_returns(part, 10.0)
