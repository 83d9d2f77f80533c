from datetime import date

import numpy as np
import pytest

from errors import DomainError, InsufficientDataError
from utils import daterange

from .history import PriceHistory, rolling_series
from .spikes import detect_spikes

DATES = daterange(date(2008, 1, 1), date(2008, 4, 9))


def test_outliers_are_flagged():
    spread = np.zeros(len(DATES))
    spread[50] = 1.0
    spread[80] = -1.0
    report = detect_spikes(DATES, spread)
    assert list(np.flatnonzero(report.flags)) == [50, 80]
    assert [e.sign for e in report.events] == ['positive', 'negative']
    assert report.events[0].date == date(2008, 2, 20)
    assert report.events[0].spread == 1.0
    assert report.monthly_counts[2] == {'positive': 1, 'negative': 0}
    assert report.monthly_counts[3] == {'positive': 0, 'negative': 1}
    assert len(report.count_rows()) == 12
    assert len(report.of_sign('negative')) == 1


def test_lower_threshold_flags_more():
    spread = np.random.default_rng(2).normal(0.0, 0.05, len(DATES))
    assert detect_spikes(DATES, spread, 1.0).flags.sum() > detect_spikes(DATES, spread, 3.0).flags.sum()


def test_short_series():
    with pytest.raises(InsufficientDataError):
        detect_spikes(DATES[:29], np.zeros(29))


def test_threshold_must_be_positive():
    with pytest.raises(DomainError):
        detect_spikes(DATES, np.zeros(len(DATES)), 0.0)


def test_price_scale_does_not_move_the_spikes(synthetic_history):
    part = synthetic_history.window(date(2006, 1, 1), date(2006, 12, 31))
    base = detect_spikes(part.dates, rolling_series(part).spread)
    for factor in [0.01, 3.7, 250.0]:
        scaled = PriceHistory(part.dates, part.spot * factor, part.maturities, part.curves * factor)
        report = detect_spikes(scaled.dates, rolling_series(scaled).spread)
        assert np.array_equal(report.flags, base.flags)
        assert [(e.date, e.sign) for e in report.events] == [(e.date, e.sign) for e in base.events]
        assert report.std == pytest.approx(base.std, rel=1e-9)


@pytest.mark.parametrize('scale, shift', [(1.0, 0.4), (5.0, -2.0), (0.2, 0.0)])
def test_affine_spread_keeps_the_flags(scale, shift):
    spread = np.random.default_rng(11).standard_t(3, len(DATES)) * 0.05
    spread[40] = 1.0
    base = detect_spikes(DATES, spread)
    moved = detect_spikes(DATES, scale * spread + shift)
    assert base.events
    assert np.array_equal(moved.flags, base.flags)
    assert [e.sign for e in moved.events] == [e.sign for e in base.events]
    assert [e.deviation for e in moved.events] == pytest.approx([scale * e.deviation for e in base.events])
