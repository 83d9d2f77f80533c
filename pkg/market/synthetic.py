import logging
from datetime import date

import numpy as np

from curve.params import GabillonParams
from curve.simulate import simulate_curves
from errors import DomainError
from spot.params import SpotParams
from spot.simulate import simulate_spot_paths
from utils import daterange, month_range, next_month

from .history import PriceHistory, contract_expiry

SYNTHETIC_LEVEL = 7.0
SYNTHETIC_SEASONALITY = 0.1
QUOTED_MONTHS = 24


def seasonal_curve(maturities: list[date], level: float = SYNTHETIC_LEVEL, seasonality: float = SYNTHETIC_SEASONALITY) -> np.ndarray:
    """flat `level` with a winter premium peaking on January deliveries"""
    months = np.array([m.month for m in maturities])
    return level * (1 + seasonality * np.cos(2 * np.pi * (months - 1) / 12))


def synthesize_history(
    futures_params: GabillonParams,
    spot_params: SpotParams,
    start: date,
    end: date,
    seed: int,
    level: float = SYNTHETIC_LEVEL,
    seasonality: float = SYNTHETIC_SEASONALITY,
    quoted_months: int = QUOTED_MONTHS,
    expiry_offset_days: int = 0,
    spikes: bool = True,
) -> PriceHistory:
    """
    One joint path of the futures and spot models on every calendar day of [start, end].
    Each day quotes the `quoted_months` nearest contracts still trading.
    """
    if end <= start:
        raise DomainError(f'history end {end} is not after its start {start}')
    if quoted_months < 2:
        raise DomainError(f'need at least two quoted months, got {quoted_months}')
    dates = daterange(start, end)
    maturities = month_range(next_month(start), end)
    last = maturities[-1] if maturities else start.replace(day=1)
    for _ in range(quoted_months + 1):
        last = next_month(last)
        maturities.append(last)
    curve = list(zip(maturities, seasonal_curve(maturities, level, seasonality)))
    curves = simulate_curves(futures_params, curve, dates, 1, seed, expiry_offset_days)
    spot = simulate_spot_paths(spot_params, curves, seed, spikes=spikes)

    quotes = np.full((len(dates), len(maturities)), np.nan)
    for i, d in enumerate(dates):
        live = [j for j, m in enumerate(maturities) if contract_expiry(m, expiry_offset_days) > d][:quoted_months]
        quotes[i, live] = curves.prices[0, i, live]
    history = PriceHistory(dates, spot.spiked[0], maturities, quotes)
    logging.info(f'Synthesized {history} with seed {seed}')
    return history
