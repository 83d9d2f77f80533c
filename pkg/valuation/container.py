import json
import logging
import os

import numpy as np

from constants import CONTAINER_VERSION
from errors import ContainerError
from hedging.deltas import HedgePlan
from storage.contract import StorageSpec
from utils import format_month, parse_date, parse_month

from .policy import Policy


def _spec_dict(s: StorageSpec) -> dict:
    values = {name: getattr(s, name) for name in StorageSpec.__annotations__}
    values['start_date'] = s.start_date.isoformat()
    values['end_date'] = s.end_date.isoformat()
    return values


def save_policy(path: str, policy: Policy, plans: dict[str, HedgePlan] = {}):
    """
    One compressed numpy archive holding a JSON header (format version, storage spec, basis, grid dates)
    and the per-step volume grids, feasibility masks and regression coefficients of the policy and its hedge plans.
    """
    header = {
        'version': CONTAINER_VERSION,
        'basis_spec': policy.basis_spec,
        'spec': _spec_dict(policy.spec),
        'dates': [d.isoformat() for d in policy.dates],
        'backward_value': policy.backward_value,
        'plans': {kind: {'basis_spec': plan.basis_spec, 'maturities': [format_month(m) for m in plan.maturities]} for kind, plan in plans.items()},
    }
    arrays = {'header': np.array(json.dumps(header, sort_keys=True))}
    for i in range(policy.n_steps):
        arrays[f'coefficients_{i}'] = policy.coefficients[i]
    for i, (grid, feasible) in enumerate(zip(policy.grids, policy.feasible)):
        arrays[f'grid_{i}'] = grid
        arrays[f'feasible_{i}'] = feasible
    for kind, plan in plans.items():
        arrays[f'plan_{kind}_coefficients'] = plan.coefficients
        arrays[f'plan_{kind}_live'] = plan.live
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'wb') as fd:
        np.savez_compressed(fd, **arrays)
    logging.info(f'Saved {policy} and {len(plans)} hedge plans to {path}')


def load_policy(path: str) -> tuple[Policy, dict[str, HedgePlan]]:
    try:
        archive = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as ex:
        raise ContainerError(f'cannot read policy container {path}: {ex}')
    with archive:
        if 'header' not in archive.files:
            raise ContainerError(f'{path} is not a policy container')
        header = json.loads(str(archive['header']))
        if header.get('version') != CONTAINER_VERSION:
            raise ContainerError(f'{path} has container version {header.get("version")}, expected {CONTAINER_VERSION}')
        dates = [parse_date(d) for d in header['dates']]
        n = len(dates) - 1
        spec_values = dict(header['spec'])
        spec = StorageSpec(**spec_values)
        policy = Policy(
            spec,
            header['basis_spec'],
            dates,
            [archive[f'grid_{i}'] for i in range(n + 1)],
            [archive[f'feasible_{i}'] for i in range(n + 1)],
            [archive[f'coefficients_{i}'] for i in range(n)],
            header['backward_value'],
        )
        plans = {}
        for kind, meta in header['plans'].items():
            plans[kind] = HedgePlan(
                kind,
                meta['basis_spec'],
                dates,
                [parse_month(m) for m in meta['maturities']],
                archive[f'plan_{kind}_coefficients'],
                archive[f'plan_{kind}_live'],
            )
    logging.debug(f'Loaded {policy} from {path}')
    return policy, plans
