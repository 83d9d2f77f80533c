import click
from typing import Optional

from report import write_csv, write_json, write_manifest
from runconfig import RunConfig, model_option, paths_option, preset_option, start_option

from .family import generate_family
from .measures import value_family


@click.command(name='model-risk')
@preset_option
@model_option
@start_option
@paths_option
@click.option('--n-target', type=int, default=None, help='Accepted family size (default: model_risk.n_target)')
@click.option('--epsilon', type=float, default=None, help='Relative log-likelihood slack (default: model_risk.epsilon)')
@click.option('--ks-level', type=float, default=None, help='Normality test level (default: model_risk.ks_level)')
@click.option('--no-historical', is_flag=True, default=False, help='Skip the historical wealth measure')
def cmd_model_risk(
    preset: Optional[str] = None,
    model_id: Optional[str] = None,
    start_date: Optional[str] = None,
    n_paths: Optional[int] = None,
    n_target: Optional[int] = None,
    epsilon: Optional[float] = None,
    ks_level: Optional[float] = None,
    no_historical: bool = False,
):
    """Model risk of the spot model: value ranges over a family of perturbed, statistically acceptable models"""
    rc = RunConfig(preset=preset, model_id=model_id, start_date=start_date)
    risk = rc.model_risk
    n_paths = n_paths or int(risk['n_paths'])
    history = rc.load_history()
    start = rc.spec.start_date
    estimate = rc.estimate_spot(history, start)
    futures = rc.resolve_futures_params(history, start)
    family = generate_family(
        estimate.params,
        estimate.covariance,
        history.before(start),
        n_target or int(risk['n_target']),
        epsilon if epsilon is not None else float(risk['epsilon']),
        ks_level if ks_level is not None else float(risk['ks_level']),
        seed=rc.seed_risk,
        attempt_factor=int(risk['attempt_factor']),
        sample=estimate.sample,
    )
    setup = rc.valuation_setup(history, futures, estimate.params, n_paths=n_paths)
    report = value_family(family, setup, rc.seed_backward, rc.seed_forward, None if no_historical else history, rc.threads)

    files = [rc.output_path('model_risk.json'), rc.output_path('model_risk_members.csv'), rc.output_path('model_risk_base_params.toml')]
    write_json(files[0], report.summary() | {'model_id': rc.model_id, 'n_paths': n_paths})
    write_csv(files[1], report.to_frame())
    estimate.params.save(files[2])
    write_manifest(rc.output_dir, 'model-risk', rc.to_dict() | {'model_risk_n_paths': n_paths, 'historical': not no_historical}, files, {
        'spot_csv': rc.spot_csv,
        'curve_csv': rc.curve_csv,
        'futures_params': rc.futures_params,
    })
