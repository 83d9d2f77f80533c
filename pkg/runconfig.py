import logging
import os
from datetime import date, timedelta
from typing import Any, Optional

import click

from config import ConfigStateHolder, config
from constants import BASIS_SPECS, DELTA_CHOICES, MIN_PATHS, PATH_FORMATS, STORAGE_PRESETS
from curve.calibrate import calibrate_mle, initial_guess
from curve.params import GabillonParams
from errors import ConfigError
from market.history import PriceHistory, load_price_history
from spot.estimate import SpotEstimate, estimate_spot
from spot.params import MODEL_IDS, SpikeParams, SpotParams
from storage.contract import StorageSpec
from utils import parse_date
from valuation.pipeline import ValuationSetup, starting_curve


class RunConfig:
    """Validated settings of one command run, merged from the config file and the command line"""
    spot_csv: str
    curve_csv: str
    futures_params: str
    spot_params: str
    contract: dict[str, Any]
    preset: str
    spec: StorageSpec
    model_id: int
    n_paths: int
    spikes: bool
    threads: int
    path_format: str
    initial_spread: float
    spread_floor: float
    basis: str
    max_nodes: int
    delta: str
    seed_backward: int
    seed_forward: int
    seed_risk: int
    output_dir: str
    expiry_offset_days: int
    spike_k: float
    n_maturities: int
    long_horizon_years: float
    spike_defaults: tuple[SpikeParams, SpikeParams]
    model_risk: dict[str, Any]

    def __init__(self, holder: ConfigStateHolder = config, **overrides):
        """`overrides` take precedence over the config file; None means not given"""
        if holder.file_state.exception:
            holder.enforce_config_loaded()
        conf = holder.file
        given = {key: value for key, value in overrides.items() if value is not None}
        data = conf['data']
        self.spot_csv = data['spot_csv']
        self.curve_csv = data['curve_csv']
        self.futures_params = given.get('futures_params', data['futures_params'])
        self.spot_params = given.get('spot_params', data['spot_params'])
        sim = conf['simulation']
        self.model_id = int(given.get('model_id', sim['model_id']))
        self.n_paths = int(given.get('n_paths', sim['n_paths']))
        self.spikes = bool(given.get('spikes', sim['spikes']))
        self.threads = int(sim['threads'])
        self.path_format = given.get('path_format', sim['path_format'])
        self.initial_spread = float(sim['initial_spread'])
        self.spread_floor = float(sim['spread_floor'])
        val = conf['valuation']
        self.basis = val['basis']
        self.max_nodes = int(val['max_nodes'])
        self.delta = str(given.get('delta', val['delta']))
        self.seed_backward = holder.get_seed('backward')
        self.seed_forward = holder.get_seed('forward')
        self.seed_risk = holder.get_seed('risk')
        self.output_dir = holder.get_output_dir()
        market = conf['market']
        self.expiry_offset_days = int(market['expiry_offset_days'])
        self.spike_k = float(market['spike_k'])
        self.n_maturities = int(market['n_maturities'])
        self.long_horizon_years = float(market['long_horizon_years'])
        spikes = conf['spikes']
        self.spike_defaults = (
            SpikeParams(spikes['beta'], 0.0, spikes['fallback_pos_mean'], spikes['fallback_pos_std'], list(spikes['window_pos'])),
            SpikeParams(spikes['beta'], 0.0, spikes['fallback_neg_mean'], spikes['fallback_neg_std'], list(spikes['window_neg'])),
        )
        self.model_risk = dict(conf['model_risk'])
        self.contract = dict(conf['contract'])
        self.preset = given.get('preset', self.contract['preset'])
        self.spec = build_spec(self.contract, self.preset, given.get('start_date'))
        self.validate()

    def __repr__(self):
        return f'RunConfig({self.spec}, model {self.model_id}, {self.n_paths} paths, seeds {self.seeds})'

    @property
    def seeds(self) -> dict[str, int]:
        return {'backward': self.seed_backward, 'forward': self.seed_forward, 'risk': self.seed_risk}

    def validate(self):
        if self.n_paths < MIN_PATHS:
            raise ConfigError(f'at least {MIN_PATHS} paths are required, got {self.n_paths}')
        if self.seed_backward == self.seed_forward:
            raise ConfigError(f'backward and forward phases need different seeds, both are {self.seed_backward}')
        if self.model_id not in MODEL_IDS:
            raise ConfigError(f'unknown spot model {self.model_id}, expected one of {MODEL_IDS}')
        if self.delta not in DELTA_CHOICES:
            raise ConfigError(f'unknown delta "{self.delta}", expected one of {DELTA_CHOICES}')
        if self.path_format not in PATH_FORMATS:
            raise ConfigError(f'unknown path format "{self.path_format}", expected one of {PATH_FORMATS}')
        if self.basis not in BASIS_SPECS:
            raise ConfigError(f'unknown regression basis "{self.basis}", expected one of {BASIS_SPECS}')
        if self.max_nodes < 2:
            raise ConfigError(f'volume grid needs at least two nodes, got {self.max_nodes}')
        if not 0 <= float(self.model_risk['epsilon']) < 1:
            raise ConfigError(f'model_risk.epsilon must be in [0, 1), got {self.model_risk["epsilon"]}')

    @property
    def delta_kinds(self) -> list[str]:
        return ['1', '2'] if self.delta == 'both' else [self.delta]

    def to_dict(self) -> dict[str, Any]:
        return {
            'data': {
                'spot_csv': self.spot_csv,
                'curve_csv': self.curve_csv,
                'futures_params': self.futures_params,
                'spot_params': self.spot_params,
            },
            'contract': {name: getattr(self.spec, name) for name in StorageSpec.__annotations__},
            'model_id': self.model_id,
            'n_paths': self.n_paths,
            'spikes': self.spikes,
            'basis': self.basis,
            'max_nodes': self.max_nodes,
            'delta': self.delta,
            'seeds': self.seeds,
            'expiry_offset_days': self.expiry_offset_days,
            'initial_spread': self.initial_spread,
            'spread_floor': self.spread_floor,
            'model_risk': self.model_risk,
        }

    def spec_starting(self, start: date) -> StorageSpec:
        """the configured contract moved to `start`, keeping its lease length"""
        return build_spec(self.contract | {'end_date': ''}, self.preset, start.isoformat())

    def output_path(self, *names: str) -> str:
        os.makedirs(self.output_dir, exist_ok=True)
        return os.path.join(self.output_dir, *names)

    def load_history(self) -> PriceHistory:
        if not (self.spot_csv and self.curve_csv):
            raise ConfigError('no market data configured, set data.spot_csv and data.curve_csv')
        return load_price_history(self.spot_csv, self.curve_csv)

    def resolve_futures_params(self, history: Optional[PriceHistory] = None, until: Optional[date] = None) -> GabillonParams:
        """the configured parameter file, or a calibration on the history observed before `until`"""
        if self.futures_params:
            logging.info(f'Using futures parameters from {self.futures_params}')
            return GabillonParams.load(self.futures_params)
        if history is None:
            raise ConfigError('no futures parameters configured, set data.futures_params or run calibrate-futures first')
        past = history.before(until) if until else history
        init = initial_guess(past, self.long_horizon_years, self.expiry_offset_days)
        return calibrate_mle(past, init, self.n_maturities, self.expiry_offset_days).params

    def estimate_spot(self, history: PriceHistory, until: Optional[date] = None, model_id: Optional[int] = None) -> SpotEstimate:
        past = history.before(until) if until else history
        return estimate_spot(past, model_id or self.model_id, self.spike_k, self.expiry_offset_days, self.spike_defaults)

    def resolve_spot_params(self, history: Optional[PriceHistory] = None, until: Optional[date] = None, model_id: Optional[int] = None) -> SpotParams:
        model_id = model_id or self.model_id
        if self.spot_params:
            params = SpotParams.load(self.spot_params)
            params.garch.check_order()
            if params.model_id != model_id:
                raise ConfigError(f'{self.spot_params} holds spot model {params.model_id}, model {model_id} was requested')
            logging.info(f'Using spot parameters from {self.spot_params}')
            return params
        if history is None:
            raise ConfigError('no spot parameters configured, set data.spot_params or run calibrate-spot first')
        return self.estimate_spot(history, until, model_id).params

    def valuation_setup(
        self,
        history: Optional[PriceHistory],
        futures_params: GabillonParams,
        spot_params: SpotParams,
        spec: Optional[StorageSpec] = None,
        n_paths: Optional[int] = None,
        curve: Optional[list] = None,
    ) -> ValuationSetup:
        """valuation of `spec` (default: the configured contract) from the curve observed just before it starts"""
        spec = spec or self.spec
        initial_spot = None
        if curve is None:
            if history is None:
                raise ConfigError('valuation needs an initial futures curve, configure data.spot_csv and data.curve_csv')
            observed, curve, initial_spot = starting_curve(history, spec.start_date)
            logging.info(f'Initial curve observed on {observed}')
        return ValuationSetup(
            spec,
            futures_params,
            spot_params,
            curve,
            n_paths or self.n_paths,
            initial_spot=initial_spot,
            initial_spread=self.initial_spread,
            spikes=self.spikes,
            spread_floor=self.spread_floor,
            basis_spec=self.basis,
            max_nodes=self.max_nodes,
            deltas=self.delta_kinds,
            expiry_offset_days=self.expiry_offset_days,
            n_jobs=self.threads,
        )


def build_spec(contract: dict[str, Any], preset: Optional[str] = None, start_date: Optional[str] = None) -> StorageSpec:
    preset = preset or contract['preset']
    start = parse_date(start_date or contract['start_date'])
    end = parse_date(contract['end_date']) if contract['end_date'] else None
    if preset in STORAGE_PRESETS:
        spec = StorageSpec.from_preset(preset, start, end, int(contract['dt']))
        return spec.copy(cost_per_unit=float(contract['cost_per_unit']))
    if preset != 'custom':
        raise ConfigError(f'unknown storage preset "{preset}", expected one of {", ".join(list(STORAGE_PRESETS) + ["custom"])}')
    return StorageSpec(
        contract['v_min'],
        contract['v_max'],
        contract['a_inj'],
        contract['a_with'],
        contract['v_start'],
        contract['v_end_target'],
        start,
        end or start + timedelta(days=365),
        dt=int(contract['dt']),
        cost_per_unit=float(contract['cost_per_unit']),
    )


preset_option = click.option('--preset', type=click.Choice(list(STORAGE_PRESETS) + ['custom']), default=None, help='Storage preset (default: contract.preset)')
model_option = click.option('--model', 'model_id', type=click.Choice([str(m) for m in MODEL_IDS]), default=None, help='Spot model (default: simulation.model_id)')
paths_option = click.option('--paths', 'n_paths', type=int, default=None, help='Number of simulated paths (default: simulation.n_paths)')
start_option = click.option('--start', 'start_date', default=None, help='Contract start date YYYY-MM-DD (default: contract.start_date)')
