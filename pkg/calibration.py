import click
import logging
from typing import Optional

import numpy as np
import pandas as pd

from curve.calibrate import calibrate_mle, initial_guess
from market.history import rolling_series
from market.spikes import detect_spikes
from report import write_csv, write_json, write_manifest
from runconfig import RunConfig, model_option
from spot.params import THETA_NAMES
from utils import parse_date


@click.command(name='calibrate-futures')
@click.option('--until', default=None, help='Only use observations before this date (YYYY-MM-DD)')
@click.option('--params-out', default=None, help='Parameter file to write (default: <out>/futures_params.toml)')
def cmd_calibrate_futures(until: Optional[str] = None, params_out: Optional[str] = None):
    """Estimate the futures curve model by maximum likelihood"""
    rc = RunConfig()
    history = rc.load_history()
    if until:
        history = history.before(parse_date(until))
    init = initial_guess(history, rc.long_horizon_years, rc.expiry_offset_days)
    calibration = calibrate_mle(history, init, rc.n_maturities, rc.expiry_offset_days)
    params_out = params_out or rc.output_path('futures_params.toml')
    calibration.params.save(params_out)
    intervals = f'{params_out}.ci.csv'
    calibration.write_intervals(intervals)
    summary = rc.output_path('calibrate-futures.json')
    write_json(summary, {
        'params': calibration.params.to_dict(),
        'objective': calibration.objective,
        'n_obs': calibration.n_obs,
        'n_maturities': calibration.n_maturities,
        'std_errors': dict(zip(calibration.confidence_intervals()['name'], calibration.std_errors())),
    })
    write_manifest(rc.output_dir, 'calibrate-futures', rc.to_dict() | {'until': until}, [params_out, intervals, summary])


@click.command(name='calibrate-spot')
@model_option
@click.option('--until', default=None, help='Only use observations before this date (YYYY-MM-DD)')
@click.option('--params-out', default=None, help='Parameter file to write (default: <out>/spot_params_model<N>.toml)')
def cmd_calibrate_spot(model_id: Optional[str] = None, until: Optional[str] = None, params_out: Optional[str] = None):
    """Estimate a spot model: regression, GARCH(1,1) and spikes"""
    rc = RunConfig(model_id=model_id)
    history = rc.load_history()
    estimate = rc.estimate_spot(history, parse_date(until) if until else None)
    params_out = params_out or rc.output_path(f'spot_params_model{rc.model_id}.toml')
    estimate.params.save(params_out)
    covariance = f'{params_out}.cov.csv'
    write_csv(covariance, covariance_frame(estimate.covariance))
    summary = rc.output_path('calibrate-spot.json')
    write_json(summary, {
        'model_id': rc.model_id,
        'loglik': estimate.loglik,
        'n_rows': len(estimate.sample),
        'n_spikes': len(estimate.sample.spikes.events),
        'std_errors': estimate.std_errors(),
    })
    write_manifest(rc.output_dir, 'calibrate-spot', rc.to_dict() | {'until': until}, [params_out, covariance, summary])


def covariance_frame(covariance: np.ndarray) -> pd.DataFrame:
    frame = pd.DataFrame(covariance, columns=THETA_NAMES)
    frame.insert(0, 'name', THETA_NAMES)
    return frame


@click.command(name='spikes')
@click.option('-k', 'k', type=float, default=None, help='Threshold in standard deviations (default: market.spike_k)')
def cmd_spikes(k: Optional[float] = None):
    """Detect spot spikes and count them per calendar month and sign"""
    rc = RunConfig()
    k = k or rc.spike_k
    history = rc.load_history()
    series = rolling_series(history, rc.expiry_offset_days)
    report = detect_spikes(series.dates, series.spread, k)
    events = pd.DataFrame(
        [(e.date.isoformat(), e.spread, e.deviation, e.sign) for e in report.events],
        columns=['date', 'spread', 'deviation', 'sign'],
    )
    monthly = pd.DataFrame(report.count_rows(), columns=['month', 'positive', 'negative'])
    files = [rc.output_path('spikes_events.csv'), rc.output_path('spikes_monthly.csv')]
    write_csv(files[0], events)
    write_csv(files[1], monthly)
    logging.info(f'{len(report.events)} spikes beyond {k:g} standard deviations ({len(report.of_sign("positive"))} positive)')
    write_manifest(rc.output_dir, 'spikes', rc.to_dict() | {'spike_k': k}, files, {'spot_csv': rc.spot_csv, 'curve_csv': rc.curve_csv})
