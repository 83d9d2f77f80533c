import logging
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from errors import DomainError, GasStorageError, MemberValuationError
from market.history import PriceHistory
from spot.params import SpotParams
from utils import get_n_jobs
from valuation.pipeline import ValuationSetup, evaluate_historical, value_storage

from .family import ModelFamily

BASE_MEMBER = 0


def risk_range(values: Sequence[float], base: float) -> float:
    """spread of `values` relative to the base model's value"""
    if not len(values):
        raise DomainError('risk measure of an empty family')
    if base == 0 or not np.isfinite(base):
        raise DomainError(f'risk measure relative to a base value of {base}')
    values = np.asarray(values, dtype=float)
    return float((values.max() - values.min()) / abs(base))


class MemberValue:
    member_id: int
    j_star: float
    wealth_hist: float

    def __init__(self, member_id: int, j_star: float, wealth_hist: float = float('nan')):
        self.member_id = member_id
        self.j_star = j_star
        self.wealth_hist = wealth_hist

    def __repr__(self):
        return f'MemberValue({self.member_id}: J* {self.j_star:.4f}, historical {self.wealth_hist:.4f})'


def value_member(
    member_id: int,
    params: SpotParams,
    setup: ValuationSetup,
    seed_backward: int,
    seed_forward: int,
    history: Optional[PriceHistory] = None,
) -> MemberValue:
    """
    Full valuation with paths simulated under `params`; every member shares the run's seeds.
    With a history, also the hedged wealth of the member's strategy along the observed path.
    """
    try:
        outcome = value_storage(setup.with_spot_params(params), seed_backward, seed_forward)
        wealth = float('nan')
        if history is not None:
            historical = evaluate_historical(outcome, history)
            kind = '2' if '2' in historical.hedged else next(iter(historical.hedged), None)
            wealth = historical.hedged[kind] if kind else historical.wealth
    except GasStorageError as ex:
        raise MemberValuationError(f'valuation of model family member {member_id} failed: {ex}', {'member_id': member_id, 'cause': ex.record()})
    return MemberValue(member_id, outcome.report.extrinsic_value, wealth)


class RiskReport:
    """values of the base model and of every family member, and the two relative ranges"""
    family: ModelFamily
    base: MemberValue
    members: list[MemberValue]

    def __init__(self, family: ModelFamily, base: MemberValue, members: list[MemberValue]):
        self.family = family
        self.base = base
        self.members = members

    def __repr__(self):
        return f'RiskReport(pi1 {self.pi1:.4%}, pi2 {self.pi2:.4%}, {len(self.members)} members)'

    @property
    def pi1(self) -> float:
        return risk_range([m.j_star for m in self.members], self.base.j_star)

    @property
    def pi2(self) -> float:
        if np.isnan(self.base.wealth_hist):
            return float('nan')
        return risk_range([m.wealth_hist for m in self.members], self.base.wealth_hist)

    def to_frame(self) -> pd.DataFrame:
        values = {m.member_id: m for m in self.members}
        rows = [(BASE_MEMBER, self.base.j_star, self.base.wealth_hist, True, 'base')]
        for draw in self.family.draws:
            value = values.get(draw.draw_id)
            rows.append((
                draw.draw_id,
                value.j_star if value else np.nan,
                value.wealth_hist if value else np.nan,
                draw.accepted,
                draw.reject_reason,
            ))
        return pd.DataFrame(rows, columns=['member_id', 'J_star', 'wealth_hist', 'accepted', 'reject_reason'])

    def summary(self) -> dict:
        return {
            'pi1': self.pi1,
            'pi2': None if np.isnan(self.pi2) else self.pi2,
            'base_J_star': self.base.j_star,
            'base_wealth_hist': None if np.isnan(self.base.wealth_hist) else self.base.wealth_hist,
            'n_members': len(self.members),
            'n_draws': len(self.family.draws),
            'rejected': self.family.rejected,
            'epsilon': self.family.epsilon,
            'ks_level': self.family.ks_level,
            'base_loglik': self.family.base_loglik,
        }


def value_family(
    family: ModelFamily,
    setup: ValuationSetup,
    seed_backward: int,
    seed_forward: int,
    history: Optional[PriceHistory] = None,
    n_jobs: Optional[int] = 1,
) -> RiskReport:
    """base model and accepted members valued independently, in parallel across members"""
    jobs = [(BASE_MEMBER, family.base)] + [(d.draw_id, d.params) for d in family.accepted]
    if get_n_jobs(n_jobs) > 1 and len(jobs) > 1:
        values = Parallel(n_jobs=get_n_jobs(n_jobs))(delayed(value_member)(i, p, setup, seed_backward, seed_forward, history) for i, p in jobs)
    else:
        values = [value_member(i, p, setup, seed_backward, seed_forward, history) for i, p in jobs]
    report = RiskReport(family, values[0], values[1:])
    logging.info(f'{report}')
    return report


def risk_pi1(family: ModelFamily, setup: ValuationSetup, seed_backward: int, seed_forward: int, n_jobs: Optional[int] = 1) -> float:
    """relative range of the simulated storage values across the family"""
    return value_family(family, setup, seed_backward, seed_forward, n_jobs=n_jobs).pi1


def risk_pi2(family: ModelFamily, history: PriceHistory, setup: ValuationSetup, seed_backward: int, seed_forward: int, n_jobs: Optional[int] = 1) -> float:
    """relative range of the hedged wealth realized on the historical path across the family"""
    return value_family(family, setup, seed_backward, seed_forward, history, n_jobs).pi2
