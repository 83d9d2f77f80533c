import logging
from copy import copy
from datetime import date
from typing import Any, Optional, Sequence

import numpy as np

from constants import BASIS_QUADRATIC, MAX_VOLUME_NODES, MODEL2_SPREAD_FLOOR
from curve.params import GabillonParams
from curve.simulate import simulate_curves
from errors import DomainError, InsufficientCurveError
from hedging.deltas import HedgePlan, fit_delta, hedged_wealth
from market.history import PriceHistory, contract_expiry
from spot.params import SpotParams
from spot.simulate import simulate_spot_paths
from storage.contract import StorageSpec
from utils import format_month

from .lsmc import ForwardResult, evaluate_policy_forward, fit_policy_backward, run_on_historical
from .market import MarketPaths
from .policy import Policy


def contract_curve(curve: Sequence[tuple[date, float]], s: StorageSpec, expiry_offset_days: int = 0) -> list[tuple[date, float]]:
    """
    The maturities a contract window needs: every quoted month still trading on the start date,
    up to the first two that are still trading on the end date.
    """
    last = s.dates[-1]
    selected = []
    after_end = 0
    for maturity, price in sorted(curve):
        expiry = contract_expiry(maturity, expiry_offset_days)
        if expiry <= s.start_date:
            continue
        selected.append((maturity, price))
        if expiry > last:
            after_end += 1
            if after_end == 2:
                return selected
    raise InsufficientCurveError(
        f'curve quotes only {after_end} contracts trading after {last}, need a prompt and a back contract',
        {'last_quoted': format_month(max(m for m, _ in curve)) if curve else None},
    )


def starting_curve(history: PriceHistory, start: date) -> tuple[date, list[tuple[date, float]], float]:
    """(observation date, curve, spot) of the last observation before `start`, or of `start` itself"""
    candidates = [i for i, d in enumerate(history.dates) if d < start]
    i = candidates[-1] if candidates else history.index_of(start)
    return history.dates[i], history.curve_at(i), float(history.spot[i])


class ValuationSetup:
    """Everything a valuation run needs besides its seeds"""
    spec: StorageSpec
    futures_params: GabillonParams
    spot_params: SpotParams
    curve: list[tuple[date, float]]
    n_paths: int
    initial_spot: Optional[float]
    initial_spread: float
    spikes: bool
    spread_floor: float
    basis_spec: str
    max_nodes: int
    deltas: list[str]
    expiry_offset_days: int
    n_jobs: int

    def __init__(
        self,
        spec: StorageSpec,
        futures_params: GabillonParams,
        spot_params: SpotParams,
        curve: Sequence[tuple[date, float]],
        n_paths: int,
        initial_spot: Optional[float] = None,
        initial_spread: float = 0.0,
        spikes: bool = True,
        spread_floor: float = MODEL2_SPREAD_FLOOR,
        basis_spec: str = BASIS_QUADRATIC,
        max_nodes: int = MAX_VOLUME_NODES,
        deltas: Sequence[str] = ('2', ),
        expiry_offset_days: int = 0,
        n_jobs: int = 1,
    ):
        self.spec = spec
        self.futures_params = futures_params
        self.spot_params = spot_params
        self.curve = contract_curve(curve, spec, expiry_offset_days)
        self.n_paths = n_paths
        self.initial_spot = initial_spot
        self.initial_spread = initial_spread
        self.spikes = spikes
        self.spread_floor = spread_floor
        self.basis_spec = basis_spec
        self.max_nodes = max_nodes
        self.deltas = list(deltas)
        self.expiry_offset_days = expiry_offset_days
        self.n_jobs = n_jobs

    def __repr__(self):
        return f'ValuationSetup({self.spec}, model {self.spot_params.model_id}, {self.n_paths} paths)'

    @property
    def maturities(self) -> list[date]:
        return [m for m, _ in self.curve]

    def with_spot_params(self, spot_params: SpotParams) -> 'ValuationSetup':
        setup = copy(self)
        setup.spot_params = spot_params
        return setup


def simulate_market(setup: ValuationSetup, seed: int, n_paths: Optional[int] = None) -> MarketPaths:
    curves = simulate_curves(
        setup.futures_params,
        setup.curve,
        setup.spec.dates,
        n_paths or setup.n_paths,
        seed,
        setup.expiry_offset_days,
        setup.n_jobs,
    )
    spot = simulate_spot_paths(
        setup.spot_params,
        curves,
        seed,
        initial_spot=setup.initial_spot,
        initial_spread=setup.initial_spread,
        spikes=setup.spikes,
        spread_floor=setup.spread_floor,
        n_jobs=setup.n_jobs,
    )
    market = MarketPaths.from_simulation(curves, spot)
    logging.info(f'Simulated {market.n_paths} joint spot and futures paths with seed {seed}')
    return market


def _std(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


class ValuationReport:
    extrinsic_value: float
    std_error: float
    std_unhedged: float
    std_hedged: float
    per_path_wealth: np.ndarray
    hedged: dict[str, np.ndarray]
    backward_value: float
    n_paths: int
    off_node: int

    def __init__(self, per_path_wealth: np.ndarray, hedged: dict[str, np.ndarray], backward_value: float = float('nan'), off_node: int = 0):
        self.per_path_wealth = np.asarray(per_path_wealth, dtype=float)
        self.n_paths = len(self.per_path_wealth)
        if not self.n_paths:
            raise DomainError('valuation report needs at least one path')
        self.extrinsic_value = float(np.mean(self.per_path_wealth))
        self.std_unhedged = _std(self.per_path_wealth)
        self.std_error = self.std_unhedged / np.sqrt(self.n_paths)
        self.hedged = dict(hedged)
        primary = '2' if '2' in self.hedged else next(iter(self.hedged), None)
        self.std_hedged = _std(self.hedged[primary]) if primary else self.std_unhedged
        self.backward_value = backward_value
        self.off_node = off_node

    def __repr__(self):
        return f'ValuationReport(EV {self.extrinsic_value:.4f} +- {self.std_error:.4f}, std {self.std_unhedged:.4f} -> {self.std_hedged:.4f})'

    def to_dict(self) -> dict[str, Any]:
        values: dict[str, Any] = {
            'extrinsic_value': self.extrinsic_value,
            'std_error': self.std_error,
            'std_unhedged': self.std_unhedged,
            'std_hedged': self.std_hedged,
            'backward_value': self.backward_value,
            'n_paths': self.n_paths,
            'off_node_steps': self.off_node,
        }
        for kind, wealth in sorted(self.hedged.items()):
            values[f'mean_hedged_delta{kind}'] = float(np.mean(wealth))
            values[f'std_hedged_delta{kind}'] = _std(wealth)
        return values


class ValuationOutcome:
    setup: ValuationSetup
    policy: Policy
    plans: dict[str, HedgePlan]
    forward: ForwardResult
    report: ValuationReport

    def __init__(self, setup: ValuationSetup, policy: Policy, plans: dict[str, HedgePlan], forward: ForwardResult, report: ValuationReport):
        self.setup = setup
        self.policy = policy
        self.plans = plans
        self.forward = forward
        self.report = report


def fit_hedges(policy: Policy, market: MarketPaths, s: StorageSpec, kinds: Sequence[str]) -> dict[str, HedgePlan]:
    """delta plans regressed on the volume trajectories the policy produces on its own backward paths"""
    if not kinds:
        return {}
    trajectories = evaluate_policy_forward(policy, market, s)
    return {kind: fit_delta(kind, trajectories.volumes, market, policy.basis_spec) for kind in kinds}


def value_storage(setup: ValuationSetup, seed_backward: int, seed_forward: int) -> ValuationOutcome:
    """backward fit of policy and hedges on one path set, evaluation of both on an independent one"""
    if seed_backward == seed_forward:
        logging.warning(f'Backward and forward phases share seed {seed_backward}, the forward value is biased upwards')
    s = setup.spec
    backward = simulate_market(setup, seed_backward)
    policy = fit_policy_backward(backward, s, setup.basis_spec, setup.max_nodes)
    plans = fit_hedges(policy, backward, s, setup.deltas)
    del backward

    forward_market = simulate_market(setup, seed_forward)
    forward = evaluate_policy_forward(policy, forward_market, s)
    hedged = {kind: hedged_wealth(forward.wealth, plan, forward_market) for kind, plan in plans.items()}
    report = ValuationReport(forward.wealth, hedged, policy.backward_value, forward.off_node)
    logging.info(f'Valued {s}: {report}')
    return ValuationOutcome(setup, policy, plans, forward, report)


class HistoricalOutcome:
    """the fitted policy and hedges applied along the observed path"""
    forward: ForwardResult
    market: MarketPaths
    wealth: float
    hedged: dict[str, float]

    def __init__(self, forward: ForwardResult, market: MarketPaths, hedged: dict[str, float]):
        self.forward = forward
        self.market = market
        self.wealth = float(forward.wealth[0])
        self.hedged = hedged

    def __repr__(self):
        return f'HistoricalOutcome(wealth {self.wealth:.4f}, hedged {self.hedged})'


def evaluate_historical(outcome: ValuationOutcome, history: PriceHistory) -> HistoricalOutcome:
    setup = outcome.setup
    forward, market = run_on_historical(outcome.policy, history, setup.spec, setup.expiry_offset_days, setup.maturities)
    hedged = {kind: float(hedged_wealth(forward.wealth, plan, market)[0]) for kind, plan in outcome.plans.items()}
    return HistoricalOutcome(forward, market, hedged)
