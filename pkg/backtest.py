import click
import logging
from datetime import date
from typing import Any, Optional

import pandas as pd
from joblib import Parallel, delayed

from config import comma_str_to_list
from errors import GasStorageError
from intrinsic.lp import curve_series, intrinsic_value, rolling_intrinsic
from market.history import PriceHistory
from report import write_csv, write_json, write_manifest
from runconfig import RunConfig, paths_option, preset_option
from spot.params import MODEL_IDS
from utils import get_n_jobs
from valuation.pipeline import evaluate_historical, starting_curve, value_storage

# leases start at the beginning of the injection season
START_MONTH = 4

BACKTEST_COLUMNS = [
    'year',
    'model_id',
    'start_date',
    'IV',
    'EV_sim',
    'IV_hist',
    'EV_hist',
    'std_unhedged',
    'std_hedged',
    'EV_hist_hedged',
]


def backtest_year(rc: RunConfig, history: PriceHistory, year: int, model_id: int) -> dict[str, Any]:
    """
    One lease starting in April of `year`: models calibrated on the prior history (unless parameter files
    are configured), intrinsic and rolling intrinsic values, simulated valuation and the historical run.
    """
    start = date(year, START_MONTH, 1)
    spec = rc.spec_starting(start)
    history.window(spec.start_date, spec.dates[-1])
    futures = rc.resolve_futures_params(history, start)
    spot = rc.resolve_spot_params(history, start, model_id)
    observed, curve, _ = starting_curve(history, start)
    iv = intrinsic_value(curve, spec.v_start, spec, observed, rc.expiry_offset_days)
    ri = rolling_intrinsic(curve_series(history, spec, (observed, curve)), spec, rc.expiry_offset_days)
    outcome = value_storage(rc.valuation_setup(history, futures, spot, spec), rc.seed_backward, rc.seed_forward)
    historical = evaluate_historical(outcome, history)
    kind = '2' if '2' in historical.hedged else next(iter(historical.hedged), None)
    row = {
        'year': year,
        'model_id': model_id,
        'start_date': start.isoformat(),
        'IV': iv.value,
        'EV_sim': outcome.report.extrinsic_value,
        'IV_hist': ri.final_value,
        'EV_hist': historical.wealth,
        'std_unhedged': outcome.report.std_unhedged,
        'std_hedged': outcome.report.std_hedged,
        'EV_hist_hedged': historical.hedged[kind] if kind else historical.wealth,
    }
    logging.info(f'Backtest {year} model {model_id}: IV {iv.value:.4f}, EV {row["EV_sim"]:.4f}, historical EV {row["EV_hist"]:.4f}')
    return row


def _try_year(rc: RunConfig, history: PriceHistory, year: int, model_id: int) -> dict[str, Any]:
    try:
        return backtest_year(rc, history, year, model_id)
    except GasStorageError as ex:
        logging.warning(f'Skipping {year} with model {model_id}: {ex}')
        return {'year': year, 'model_id': model_id, 'error': ex.record()}


def run_backtest(rc: RunConfig, history: PriceHistory, years: list[int], models: list[int]) -> tuple[pd.DataFrame, list[dict[str, Any]]]:
    tasks = [(year, model_id) for year in years for model_id in models]
    if get_n_jobs(rc.threads) > 1 and len(tasks) > 1:
        results = Parallel(n_jobs=get_n_jobs(rc.threads))(delayed(_try_year)(rc, history, y, m) for y, m in tasks)
    else:
        results = [_try_year(rc, history, y, m) for y, m in tasks]
    rows = [r for r in results if 'error' not in r]
    skipped = [r for r in results if 'error' in r]
    return pd.DataFrame(rows, columns=BACKTEST_COLUMNS), skipped


@click.command(name='backtest')
@click.option('--years', required=True, help='Comma separated lease start years, e.g. 2007,2008')
@click.option('--models', default=None, help='Comma separated spot models (default: simulation.model_id)')
@preset_option
@paths_option
def cmd_backtest(years: str, models: Optional[str] = None, preset: Optional[str] = None, n_paths: Optional[int] = None):
    """Yearly backtest of intrinsic and extrinsic values on simulated and historical paths"""
    year_list = comma_str_to_list(years, default=[], item_type=int)
    if not year_list:
        raise click.UsageError('--years needs at least one year')
    rc = RunConfig(preset=preset, n_paths=n_paths)
    model_list = comma_str_to_list(models, default=[rc.model_id], item_type=int)
    unknown = [m for m in model_list if m not in MODEL_IDS]
    if unknown:
        raise click.UsageError(f'unknown spot models {unknown}, expected some of {MODEL_IDS}')
    history = rc.load_history()
    table, skipped = run_backtest(rc, history, year_list, model_list)
    files = [rc.output_path('backtest.csv'), rc.output_path('backtest.json')]
    write_csv(files[0], table)
    write_json(files[1], {'processed': len(table), 'skipped': skipped})
    write_manifest(rc.output_dir, 'backtest', rc.to_dict() | {'years': year_list, 'models': model_list}, files, {
        'spot_csv': rc.spot_csv,
        'curve_csv': rc.curve_csv,
        'futures_params': rc.futures_params,
        'spot_params': rc.spot_params,
    })
    if table.empty:
        raise GasStorageError(f'no backtest year could be processed, {len(skipped)} skipped', {'skipped': skipped})
