import click
import logging
import os
from typing import Optional

import pandas as pd

from constants import DELTA_CHOICES, PATH_FORMATS
from curve.params import GabillonParams
from market.history import PriceHistory, write_price_history
from market.synthetic import seasonal_curve, synthesize_history
from report import write_csv, write_json, write_manifest
from runconfig import RunConfig, model_option, paths_option, preset_option, start_option
from spot.params import SpotParams
from utils import month_range, next_month, parse_date
from valuation.container import save_policy
from valuation.pipeline import contract_curve, simulate_market, value_storage


def _parameter_files(rc: RunConfig) -> dict[str, str]:
    return {'futures_params': rc.futures_params, 'spot_params': rc.spot_params, 'spot_csv': rc.spot_csv, 'curve_csv': rc.curve_csv}


@click.command(name='value')
@preset_option
@model_option
@paths_option
@start_option
@click.option('--no-spikes', is_flag=True, default=False, help='Disable both spike processes')
@click.option('--delta', type=click.Choice(DELTA_CHOICES), default=None, help='Hedge delta (default: valuation.delta)')
def cmd_value(
    preset: Optional[str] = None,
    model_id: Optional[str] = None,
    n_paths: Optional[int] = None,
    start_date: Optional[str] = None,
    no_spikes: bool = False,
    delta: Optional[str] = None,
):
    """Value a storage contract and its futures hedge by regression Monte Carlo"""
    rc = RunConfig(preset=preset, model_id=model_id, n_paths=n_paths, start_date=start_date, spikes=False if no_spikes else None, delta=delta)
    history = rc.load_history()
    futures = rc.resolve_futures_params(history, rc.spec.start_date)
    spot = rc.resolve_spot_params(history, rc.spec.start_date)
    setup = rc.valuation_setup(history, futures, spot)
    outcome = value_storage(setup, rc.seed_backward, rc.seed_forward)
    report = outcome.report

    summary = rc.output_path('value.json')
    write_json(summary, report.to_dict() | {'model_id': rc.model_id, 'spikes': rc.spikes, 'start_date': rc.spec.start_date.isoformat()})
    wealth = pd.DataFrame({'path': range(report.n_paths), 'wealth': report.per_path_wealth})
    for kind, values in sorted(report.hedged.items()):
        wealth[f'hedged_delta{kind}'] = values
    wealth_path = rc.output_path('wealth.csv')
    write_csv(wealth_path, wealth)
    policy_path = rc.output_path('policy.npz')
    save_policy(policy_path, outcome.policy, outcome.plans)
    futures_path = rc.output_path('value_futures_params.toml')
    spot_path = rc.output_path('value_spot_params.toml')
    futures.save(futures_path)
    spot.save(spot_path)
    logging.info(f'Extrinsic value {report.extrinsic_value:.4f} (std error {report.std_error:.4f}), '
                 f'std {report.std_unhedged:.4f} unhedged, {report.std_hedged:.4f} hedged')
    write_manifest(rc.output_dir, 'value', rc.to_dict(), [summary, wealth_path, policy_path, futures_path, spot_path], _parameter_files(rc))


def reference_or_configured(rc: RunConfig, history: Optional[PriceHistory]) -> tuple[GabillonParams, SpotParams]:
    futures = rc.resolve_futures_params(history) if rc.futures_params or history else GabillonParams.reference()
    spot = rc.resolve_spot_params(history) if rc.spot_params or history else SpotParams.reference(rc.model_id)
    return futures, spot


@click.command(name='simulate')
@preset_option
@model_option
@paths_option
@start_option
@click.option('--no-spikes', is_flag=True, default=False, help='Disable both spike processes')
@click.option('--path-format', type=click.Choice(PATH_FORMATS), default=None, help='Format of the path file (default: simulation.path_format)')
@click.option('--history-out', default=None, help='Write one long synthetic market history (spot.csv, curve.csv) into this directory instead')
@click.option('--history-start', default='2000-01-01', show_default=True, help='First day of the synthetic history')
@click.option('--history-end', default=None, help='Last day of the synthetic history (default: contract end date)')
def cmd_simulate(
    preset: Optional[str] = None,
    model_id: Optional[str] = None,
    n_paths: Optional[int] = None,
    start_date: Optional[str] = None,
    no_spikes: bool = False,
    path_format: Optional[str] = None,
    history_out: Optional[str] = None,
    history_start: str = '2000-01-01',
    history_end: Optional[str] = None,
):
    """
    Simulate joint spot and futures paths over the contract window.
    Without parameter files or market data the reference parameters and a seasonal curve are used.
    """
    rc = RunConfig(preset=preset, model_id=model_id, n_paths=n_paths, start_date=start_date, spikes=False if no_spikes else None, path_format=path_format)
    history = rc.load_history() if rc.spot_csv and rc.curve_csv else None
    futures, spot = reference_or_configured(rc, history)

    if history_out:
        synthetic = synthesize_history(
            futures,
            spot,
            parse_date(history_start),
            parse_date(history_end) if history_end else rc.spec.dates[-1],
            rc.seed_backward,
            expiry_offset_days=rc.expiry_offset_days,
            spikes=rc.spikes,
        )
        files = [os.path.join(history_out, 'spot.csv'), os.path.join(history_out, 'curve.csv')]
        os.makedirs(history_out, exist_ok=True)
        write_price_history(synthetic, *files)
        logging.info(f'Wrote synthetic history to {history_out}')
        params = [rc.output_path('simulate_futures_params.toml'), rc.output_path('simulate_spot_params.toml')]
        futures.save(params[0])
        spot.save(params[1])
        write_manifest(rc.output_dir, 'simulate', rc.to_dict() | {'history_start': history_start, 'history_end': history_end}, files + params)
        return

    curve = None
    if history is None:
        maturities = month_range(next_month(rc.spec.start_date), next_month(next_month(rc.spec.dates[-1])))
        curve = list(zip(maturities, seasonal_curve(maturities)))
        curve = contract_curve(curve, rc.spec, rc.expiry_offset_days)
    setup = rc.valuation_setup(history, futures, spot, curve=curve)
    market = simulate_market(setup, rc.seed_backward)
    path = rc.output_path(f'paths.{rc.path_format}')
    market.save(path, rc.path_format)
    write_manifest(rc.output_dir, 'simulate', rc.to_dict(), [path], _parameter_files(rc))
