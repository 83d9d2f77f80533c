import logging
from datetime import date
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy.optimize import linprog

from constants import REBALANCE_TOLERANCE, VOLUME_TOLERANCE
from errors import DomainError, EmptyInputError, InfeasibleError, OrderingError, UnboundedError
from market.history import PriceHistory, contract_expiry
from storage.contract import StorageSpec
from utils import format_month

Curve = Sequence[tuple[date, float]]


class IntrinsicSolution:
    """
    Static futures strategy: `positions[j]` is the volume bought (positive) or sold for delivery month `maturities[j]`.
    `locked` holds months that can no longer be traded, with the position fixed earlier.
    """
    as_of: date
    value: float
    maturities: list[date]
    prices: np.ndarray
    positions: np.ndarray
    delivery_days: np.ndarray
    v_current: float
    binding: list[str]

    def __init__(
        self,
        as_of: date,
        value: float,
        maturities: list[date],
        prices: np.ndarray,
        positions: np.ndarray,
        delivery_days: np.ndarray,
        v_current: float,
        binding: Optional[list[str]] = None,
    ):
        self.as_of = as_of
        self.value = value
        self.maturities = maturities
        self.prices = prices
        self.positions = positions
        self.delivery_days = delivery_days
        self.v_current = v_current
        self.binding = list(binding or [])

    def __repr__(self):
        return f'IntrinsicSolution({self.as_of}: IV {self.value:.4f} over {len(self.maturities)} months)'

    @property
    def volumes(self) -> np.ndarray:
        """storage level after each delivery month"""
        return self.v_current + np.cumsum(self.positions)

    def position_of(self, maturity: date) -> float:
        return float(self.positions[self.maturities.index(maturity)]) if maturity in self.maturities else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'maturity': [format_month(m) for m in self.maturities],
            'alpha': self.positions,
        })


def strategy_value(positions: np.ndarray, prices: np.ndarray, cost_per_unit: float = 0.0) -> float:
    """cash of buying `positions` at `prices`, net of injection and withdrawal costs"""
    return float(-np.dot(positions, prices) - cost_per_unit * np.abs(positions).sum())


def tradable_months(curve: Curve, s: StorageSpec, as_of: date, expiry_offset_days: int = 0) -> tuple[list[date], np.ndarray, np.ndarray]:
    """(maturities, prices, decision days in the remaining window) of the quoted months still trading on `as_of`"""
    if not curve:
        raise EmptyInputError(f'empty futures curve on {as_of}')
    months = [m for m, _ in curve]
    if any(b <= a for a, b in zip(months, months[1:])):
        raise OrderingError(f'curve of {as_of} is not sorted by maturity')
    decisions = [d for d in s.dates[:-1] if d >= as_of]
    maturities, prices, days = [], [], []
    for m, price in curve:
        if contract_expiry(m, expiry_offset_days) <= as_of:
            continue
        count = sum(1 for d in decisions if (d.year, d.month) == (m.year, m.month))
        if count:
            maturities.append(m)
            prices.append(price)
            days.append(count)
    return maturities, np.array(prices, dtype=float), np.array(days, dtype=int)


def _diagnose(v_current: float, inj: np.ndarray, wth: np.ndarray, s: StorageSpec) -> Optional[int]:
    """first prefix (1-based, 0 for the start) where the volume reachable from `v_current` cannot still reach the target"""
    n = len(inj)
    need_low, need_high = np.empty(n + 1), np.empty(n + 1)
    need_low[n] = need_high[n] = s.v_end_target
    for k in range(n, 0, -1):
        need_low[k - 1] = max(s.v_min, need_low[k] - inj[k - 1])
        need_high[k - 1] = min(s.v_max, need_high[k] + wth[k - 1])
    low = high = v_current
    for k in range(n + 1):
        if k:
            low, high = max(s.v_min, low - wth[k - 1]), min(s.v_max, high + inj[k - 1])
        if low > need_high[k] + VOLUME_TOLERANCE or high < need_low[k] - VOLUME_TOLERANCE:
            return k
    return None


def intrinsic_value(curve: Curve, v_current: float, s: StorageSpec, as_of: Optional[date] = None, expiry_offset_days: int = 0) -> IntrinsicSolution:
    """
    Best static futures strategy from `as_of` with `v_current` in storage:
    maximize the cash of the positions subject to per-month rate limits,
    storage bounds after every month and the final volume target.
    """
    as_of = as_of or s.start_date
    if not s.v_min - VOLUME_TOLERANCE <= v_current <= s.v_max + VOLUME_TOLERANCE:
        raise DomainError(f'current volume {v_current} outside [{s.v_min}, {s.v_max}]')
    maturities, prices, days = tradable_months(curve, s, as_of, expiry_offset_days)
    inj = days * s.inj_step
    wth = days * s.with_step
    prefix = _diagnose(v_current, inj, wth, s)
    if prefix is not None:
        where = 'at the start' if prefix == 0 else f'after {format_month(maturities[prefix - 1])}'
        raise InfeasibleError(f'final volume {s.v_end_target} is unreachable from {v_current} on {as_of}: storage bounds violated {where}', prefix)
    n = len(maturities)
    if not n:
        return IntrinsicSolution(as_of, 0.0, [], prices, np.zeros(0), days, v_current)

    # x = [bought, sold], positions = bought - sold
    net = np.hstack([np.eye(n), -np.eye(n)])
    prefix_sums = np.tril(np.ones((n, n))) @ net
    result = linprog(
        np.concatenate([prices, -prices]) + s.cost_per_unit,
        A_ub=np.vstack([prefix_sums, -prefix_sums]),
        b_ub=np.concatenate([np.full(n, s.v_max - v_current), np.full(n, v_current - s.v_min)]),
        A_eq=np.ones((1, n)) @ net,
        b_eq=[s.v_end_target - v_current],
        bounds=list(zip(np.zeros(2 * n), np.concatenate([inj, wth]))),
        method='highs-ds',
    )
    if result.status == 2:
        raise InfeasibleError(f'intrinsic problem on {as_of} is infeasible: {result.message}')
    if result.status == 3:
        raise UnboundedError(f'intrinsic problem on {as_of} is unbounded')
    if result.status != 0:
        raise DomainError(f'intrinsic problem on {as_of} failed: {result.message}')
    positions = net @ result.x
    solution = IntrinsicSolution(as_of, strategy_value(positions, prices, s.cost_per_unit), maturities, prices, positions, days, v_current)
    solution.binding = binding_constraints(solution, s)
    logging.debug(f'{solution}, binding: {", ".join(solution.binding) or "none"}')
    return solution


def binding_constraints(solution: IntrinsicSolution, s: StorageSpec, tolerance: float = 1e-7) -> list[str]:
    binding = []
    for m, alpha, days, volume in zip(solution.maturities, solution.positions, solution.delivery_days, solution.volumes):
        label = format_month(m)
        if abs(alpha - days * s.inj_step) < tolerance:
            binding.append(f'{label}:injection_rate')
        if abs(alpha + days * s.with_step) < tolerance:
            binding.append(f'{label}:withdrawal_rate')
        if abs(volume - s.v_max) < tolerance:
            binding.append(f'{label}:v_max')
        if abs(volume - s.v_min) < tolerance:
            binding.append(f'{label}:v_min')
    return binding


class RollingIntrinsic:
    """rolling intrinsic value after each re-optimization date"""
    dates: list[date]
    values: np.ndarray
    rebalanced: np.ndarray
    initial: IntrinsicSolution
    positions: dict[date, float]

    def __init__(self, dates: list[date], values: np.ndarray, rebalanced: np.ndarray, initial: IntrinsicSolution, positions: dict[date, float]):
        self.dates = dates
        self.values = values
        self.rebalanced = rebalanced
        self.initial = initial
        self.positions = positions

    def __repr__(self):
        return f'RollingIntrinsic(IV {self.initial.value:.4f} -> RI {self.final_value:.4f}, {int(self.rebalanced.sum())} rebalancings)'

    @property
    def final_value(self) -> float:
        return float(self.values[-1])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'date': [d.isoformat() for d in self.dates],
            'ri': self.values,
            'rebalanced': self.rebalanced,
        })


def rolling_intrinsic(curve_series: Sequence[tuple[date, Curve]], s: StorageSpec, expiry_offset_days: int = 0) -> RollingIntrinsic:
    """
    Start from the intrinsic strategy of the first curve, then on every later curve re-solve with the months
    that stopped trading locked in, and switch to the new strategy when that earns money at the day's prices.
    The earnings of each switch are added to the value.
    """
    if len(curve_series) < 2:
        raise EmptyInputError(f'rolling intrinsic needs at least two curve dates, got {len(curve_series)}')
    first_date, first_curve = curve_series[0]
    initial = intrinsic_value(first_curve, s.v_start, s, first_date, expiry_offset_days)
    held = dict(zip(initial.maturities, initial.positions))
    values = [initial.value]
    rebalanced = [False]
    for as_of, curve in curve_series[1:]:
        if as_of <= first_date:
            raise OrderingError(f'curve dates not increasing: {as_of} after {first_date}')
        first_date = as_of
        tradable = {m for m, _ in curve if contract_expiry(m, expiry_offset_days) > as_of}
        locked = sum(alpha for m, alpha in held.items() if m not in tradable)
        solution = intrinsic_value(curve, s.v_start + locked, s, as_of, expiry_offset_days)
        old = np.array([held.get(m, 0.0) for m in solution.maturities])
        gain = strategy_value(solution.positions, solution.prices, s.cost_per_unit) - strategy_value(old, solution.prices, s.cost_per_unit)
        switched = gain > REBALANCE_TOLERANCE
        if switched:
            held = {m: alpha for m, alpha in held.items() if m not in solution.maturities}
            held.update(zip(solution.maturities, solution.positions))
        values.append(values[-1] + (gain if switched else 0.0))
        rebalanced.append(switched)
    ri = RollingIntrinsic([d for d, _ in curve_series], np.array(values), np.array(rebalanced), initial, held)
    logging.info(f'{ri}')
    return ri


def curve_series(history: PriceHistory, s: StorageSpec, first: Optional[tuple[date, Curve]] = None) -> list[tuple[date, Curve]]:
    """
    The curves of every decision date of `s` found in `history`, preceded by `first` when given.
    Decision dates without an observation are a gap.
    """
    series = [first] if first else []
    for d in s.dates[:-1]:
        if series and d <= series[-1][0]:
            continue
        series.append((d, history.curve_at(history.index_of(d))))
    return series
