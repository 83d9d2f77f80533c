from typing import Optional

import click
import pandas as pd

from report import write_csv, write_json, write_manifest
from runconfig import RunConfig, preset_option, start_option
from utils import format_month, parse_date
from valuation.pipeline import starting_curve

from .lp import curve_series, intrinsic_value, rolling_intrinsic


@click.command(name='intrinsic')
@preset_option
@start_option
@click.option('--as-of', default=None, help='Curve date (default: the last observation before the contract start)')
def cmd_intrinsic(preset: Optional[str] = None, start_date: Optional[str] = None, as_of: Optional[str] = None):
    """Intrinsic value: the best static futures strategy on one curve"""
    rc = RunConfig(preset=preset, start_date=start_date)
    history = rc.load_history()
    if as_of:
        observed = parse_date(as_of)
        curve = history.curve_at(history.index_of(observed))
    else:
        observed, curve, _ = starting_curve(history, rc.spec.start_date)
    solution = intrinsic_value(curve, rc.spec.v_start, rc.spec, observed, rc.expiry_offset_days)
    files = [rc.output_path('intrinsic.json'), rc.output_path('intrinsic_positions.csv')]
    write_json(files[0], {
        'as_of': observed.isoformat(),
        'value': solution.value,
        'v_current': solution.v_current,
        'binding': solution.binding,
    })
    write_csv(files[1], solution.to_frame())
    write_manifest(rc.output_dir, 'intrinsic', rc.to_dict() | {'as_of': observed.isoformat()}, files, {'curve_csv': rc.curve_csv})


@click.command(name='rolling-intrinsic')
@preset_option
@start_option
def cmd_rolling_intrinsic(preset: Optional[str] = None, start_date: Optional[str] = None):
    """Rolling intrinsic value: re-optimize the futures strategy on every curve of the contract window"""
    rc = RunConfig(preset=preset, start_date=start_date)
    history = rc.load_history()
    observed, curve, _ = starting_curve(history, rc.spec.start_date)
    ri = rolling_intrinsic(curve_series(history, rc.spec, (observed, curve)), rc.spec, rc.expiry_offset_days)
    positions = pd.DataFrame(
        [(format_month(m), alpha) for m, alpha in sorted(ri.positions.items())],
        columns=['maturity', 'alpha'],
    )
    files = [rc.output_path('rolling_intrinsic.csv'), rc.output_path('rolling_intrinsic_positions.csv'), rc.output_path('rolling_intrinsic.json')]
    write_csv(files[0], ri.to_frame())
    write_csv(files[1], positions)
    write_json(files[2], {
        'intrinsic_value': ri.initial.value,
        'rolling_intrinsic_value': ri.final_value,
        'rebalancings': int(ri.rebalanced.sum()),
    })
    write_manifest(rc.output_dir, 'rolling-intrinsic', rc.to_dict(), files, {'curve_csv': rc.curve_csv})
