import logging
from datetime import date

import numpy as np

from constants import BASIS_QUADRATIC
from errors import DomainError, GridError
from valuation.market import MarketPaths
from valuation.regression import basis_size, regress_condexp

DELTA_KINDS = ['1', '2']


class HedgePlan:
    """
    Futures positions per rebalance step: `coefficients[i][:, j]` regresses the position in `maturities[j]`
    on the state features of step i. Positions are zero from the contract's expiry on.
    """
    kind: str
    basis_spec: str
    dates: list[date]
    maturities: list[date]
    coefficients: np.ndarray
    live: np.ndarray

    def __init__(self, kind: str, basis_spec: str, dates: list[date], maturities: list[date], coefficients: np.ndarray, live: np.ndarray):
        self.kind = kind
        self.basis_spec = basis_spec
        self.dates = list(dates)
        self.maturities = list(maturities)
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.live = np.asarray(live, dtype=bool)

    def __repr__(self):
        return f'HedgePlan(delta {self.kind}, {len(self.maturities)} maturities, {self.n_steps} steps)'

    @property
    def n_steps(self) -> int:
        return self.coefficients.shape[0]

    def deltas(self, i: int, features: np.ndarray) -> np.ndarray:
        """positions per path and maturity at step i; zero once expired and on steps after the last decision"""
        if i >= self.n_steps:
            return np.zeros((features.shape[0], len(self.maturities)))
        return (features @ self.coefficients[i]) * self.live[i]


def hedge_targets(kind: str, volumes: np.ndarray, market: MarketPaths) -> np.ndarray:
    """
    Realized future volume changes per path, step and maturity: the volume moved on steps l >= i whose prompt
    contract is maturity j, weighted by F(t_l, T_j) / F(t_i, T_j) for the second kind.
    """
    if kind not in DELTA_KINDS:
        raise DomainError(f'unknown delta kind "{kind}", expected one of {DELTA_KINDS}')
    if market.futures is None:
        raise GridError('hedging needs futures paths')
    changes = np.diff(volumes, axis=1)
    n = changes.shape[1]
    targets = np.zeros(changes.shape + (len(market.maturities), ))
    for j in range(len(market.maturities)):
        bucket = market.prompt_index[:n] == j
        if not bucket.any():
            continue
        flows = changes * bucket
        if kind == '2':
            flows = flows * market.futures[:, :n, j]
        remaining = np.cumsum(flows[:, ::-1], axis=1)[:, ::-1]
        if kind == '2':
            remaining = remaining / market.futures[:, :n, j]
        targets[:, :, j] = remaining
    return targets


def fit_delta(kind: str, volumes: np.ndarray, market: MarketPaths, basis_spec: str = BASIS_QUADRATIC) -> HedgePlan:
    targets = hedge_targets(kind, volumes, market)
    n = targets.shape[1]
    k = basis_size(basis_spec)
    coefficients = np.zeros((n, k, len(market.maturities)))
    live = market.live[:n]
    for i in range(n):
        columns = live[i] & np.any(targets[:, i, :] != 0, axis=0)
        if columns.any():
            coefficients[i][:, columns] = regress_condexp(market.features(i, basis_spec), targets[:, i, columns])
    plan = HedgePlan(kind, basis_spec, market.dates, market.maturities, coefficients, live)
    logging.debug(f'Fitted {plan}')
    return plan


def fit_delta1(volumes: np.ndarray, market: MarketPaths, basis_spec: str = BASIS_QUADRATIC) -> HedgePlan:
    """expected future volume change within each contract's prompt period"""
    return fit_delta('1', volumes, market, basis_spec)


def fit_delta2(volumes: np.ndarray, market: MarketPaths, basis_spec: str = BASIS_QUADRATIC) -> HedgePlan:
    """same as `fit_delta1` with each change weighted by the futures price ratio (tangent process)"""
    return fit_delta('2', volumes, market, basis_spec)


def hedge_leg(plan: HedgePlan, market: MarketPaths) -> np.ndarray:
    """futures profit and loss of rebalancing to the plan's positions at every step"""
    if market.futures is None or plan.maturities != market.maturities:
        raise GridError('hedge plan and paths have different maturities')
    market.check_grid(plan.dates)
    leg = np.zeros(market.n_paths)
    for i in range(plan.n_steps):
        increments = market.futures[:, i + 1, :] - market.futures[:, i, :]
        leg += np.sum(plan.deltas(i, market.features(i, plan.basis_spec)) * increments, axis=1)
    return leg


def hedged_wealth(spot_wealth: np.ndarray, plan: HedgePlan, market: MarketPaths) -> np.ndarray:
    return np.asarray(spot_wealth) + hedge_leg(plan, market)
