from datetime import date, timedelta

import numpy as np
import pytest

from config import CONFIG_DEFAULTS, ConfigStateHolder, merge_configs
from curve.params import GabillonParams
from market.history import PriceHistory, write_price_history
from market.synthetic import seasonal_curve, synthesize_history
from spot.params import SpotParams
from storage.contract import StorageSpec
from utils import month_range
from valuation.market import MarketPaths
from valuation.pipeline import ValuationOutcome, ValuationSetup, value_storage


@pytest.fixture
def tiny_spec() -> StorageSpec:
    """five daily decisions, two units of space, one unit per day"""
    return StorageSpec(0.0, 2.0, 1.0, 1.0, 0.0, 0.0, date(2008, 1, 1), date(2008, 1, 6))


def identical_paths(s: StorageSpec, spot, n_paths: int = 20) -> MarketPaths:
    """`n_paths` copies of one deterministic spot path with the prompt equal to the spot"""
    row = np.asarray(spot, dtype=float)
    assert len(row) == len(s.dates)
    prices = np.tile(row, (n_paths, 1))
    return MarketPaths(s.dates, prices, prices.copy())


@pytest.fixture
def paths_factory():
    return identical_paths


@pytest.fixture(scope='session')
def synthetic_history() -> PriceHistory:
    """one joint path of the reference models, 2003 through 2008"""
    return synthesize_history(GabillonParams.reference(), SpotParams.reference(1), date(2003, 1, 1), date(2008, 12, 31), seed=7)


@pytest.fixture
def config_holder(tmp_path) -> ConfigStateHolder:
    """a loaded config writing its runs below `tmp_path`"""
    holder = ConfigStateHolder(file_conf_base=merge_configs({'paths': {'cache_dir': str(tmp_path / 'cache')}}, CONFIG_DEFAULTS))
    holder.file_state.load_finished = True
    holder.runtime['output'] = str(tmp_path / 'out')
    return holder


def write_history_csv(history: PriceHistory, directory) -> tuple[str, str]:
    spot_path, curve_path = str(directory / 'spot.csv'), str(directory / 'curve.csv')
    write_price_history(history, spot_path, curve_path)
    return spot_path, curve_path


@pytest.fixture
def history_files(synthetic_history, tmp_path) -> tuple[str, str]:
    return write_history_csv(synthetic_history, tmp_path)


def identical_futures_paths(s: StorageSpec, futures_row, maturities, n_paths: int = 20) -> MarketPaths:
    """identical paths with a futures curve per date; the first maturity is the prompt throughout and the spot follows it"""
    futures = np.tile(np.asarray(futures_row, dtype=float), (n_paths, 1, 1))
    spot = futures[:, :, 0].copy()
    return MarketPaths(s.dates, spot, spot.copy(), maturities, futures, np.zeros(len(s.dates), dtype=int))


@pytest.fixture
def futures_factory():
    return identical_futures_paths


LEASE_START = date(2007, 4, 1)


def lease_specs() -> dict[str, StorageSpec]:
    """the two presets and a facility in between, all on the same April to April lease"""
    slow = StorageSpec.from_preset('slow', LEASE_START)
    fast = StorageSpec.from_preset('fast', LEASE_START)
    medium = fast.copy(a_inj=2.0, a_with=3.0)
    return {'slow': slow, 'medium': medium, 'fast': fast}


@pytest.fixture(scope='session')
def lease_outcomes() -> dict[str, ValuationOutcome]:
    """seeded valuations with both deltas, one per facility in `lease_specs`"""
    months = month_range(LEASE_START, LEASE_START + timedelta(days=450))
    curve = list(zip(months, seasonal_curve(months)))
    outcomes = {}
    for name, s in lease_specs().items():
        setup = ValuationSetup(s, GabillonParams.reference(), SpotParams.reference(1), curve, n_paths=2000, deltas=['1', '2'])
        outcomes[name] = value_storage(setup, seed_backward=101, seed_forward=202)
    return outcomes
