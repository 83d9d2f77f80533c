import logging
from typing import Optional

import numpy as np

from constants import ACTIONS, BASIS_QUADRATIC, MAX_VOLUME_NODES, MIN_BACKWARD_PATHS
from errors import DomainError
from market.history import PriceHistory
from storage.contract import StorageSpec, cash_flows, destinations, feasibility, next_volumes, volume_grids

from .market import MarketPaths
from .policy import Policy
from .regression import basis_size, regress_condexp

# volume nodes handled at once in the backward pass
NODE_BLOCK = 128


class ForwardResult:
    """per-path decisions of a policy along a set of paths"""
    actions: np.ndarray
    volumes: np.ndarray
    cash: np.ndarray
    off_node: int

    def __init__(self, actions: np.ndarray, volumes: np.ndarray, cash: np.ndarray, off_node: int = 0):
        self.actions = actions
        self.volumes = volumes
        self.cash = cash
        self.off_node = off_node

    @property
    def wealth(self) -> np.ndarray:
        return self.cash.sum(axis=1)

    @property
    def n_paths(self) -> int:
        return self.cash.shape[0]

    def action_names(self, path: int) -> list[str]:
        return [ACTIONS[code] for code in self.actions[path]]


def fit_policy_backward(
    market: MarketPaths,
    s: StorageSpec,
    basis_spec: str = BASIS_QUADRATIC,
    max_nodes: int = MAX_VOLUME_NODES,
) -> Policy:
    """
    Longstaff-Schwartz backward induction over the attainable volume grid.
    Each step runs one least-squares fit with a right-hand side per reachable destination node;
    path values are propagated with the realized (not regressed) continuation.
    The policy's `backward_value` is the mean path value at the start volume.
    """
    market.check_grid(s.dates)
    k = basis_size(basis_spec)
    n_paths = market.n_paths
    if n_paths <= k:
        raise DomainError(f'backward pass needs more than {k} paths, got {n_paths}')
    if n_paths < MIN_BACKWARD_PATHS:
        logging.warning(f'Backward pass on only {n_paths} paths, regressions may be unstable (recommended: {MIN_BACKWARD_PATHS})')
    grids = volume_grids(s, max_nodes)
    feasible = feasibility(grids, s)
    n = s.n_steps
    path_values = np.where(feasible[n], 0.0, -np.inf)[None, :].repeat(n_paths, axis=0)
    coefficients: list[Optional[np.ndarray]] = [None] * n
    for i in range(n - 1, -1, -1):
        features = market.features(i, basis_spec)
        reachable = feasible[i + 1]
        coefficient = np.zeros((k, len(grids[i + 1])))
        if reachable.any():
            coefficient[:, reachable] = regress_condexp(features, path_values[:, reachable])
        coefficients[i] = coefficient
        continuation = features @ coefficient
        continuation[:, ~reachable] = -np.inf

        moves = destinations(grids, i, s)
        spot = market.spot[:, i][:, None]
        values = np.full((n_paths, len(grids[i])), -np.inf)
        for start in range(0, len(grids[i]), NODE_BLOCK):
            block = slice(start, start + NODE_BLOCK)
            volumes = grids[i][block]
            estimated = np.empty((n_paths, len(volumes), len(ACTIONS)))
            realized = np.empty_like(estimated)
            for code in range(len(ACTIONS)):
                cash = cash_flows(spot, volumes[None, :], next_volumes(volumes, code, s)[None, :], s)
                nodes = moves[block, code]
                estimated[:, :, code] = cash + continuation[:, nodes]
                realized[:, :, code] = cash + path_values[:, nodes]
            best = np.argmax(estimated, axis=2)
            values[:, block] = np.take_along_axis(realized, best[:, :, None], axis=2)[:, :, 0]
        values[:, ~feasible[i]] = -np.inf
        path_values = values
    backward_value = float(np.mean(path_values[:, 0]))
    policy = Policy(s, basis_spec, s.dates, grids, feasible, coefficients, backward_value)
    logging.info(f'Fitted {policy} on {n_paths} paths, backward value {backward_value:.4f}')
    return policy


def evaluate_policy_forward(policy: Policy, market: MarketPaths, s: StorageSpec) -> ForwardResult:
    """apply the policy along `market`, path by path in parallel arrays"""
    market.check_grid(policy.dates)
    n = policy.n_steps
    volumes = np.empty((market.n_paths, n + 1))
    actions = np.empty((market.n_paths, n), dtype=int)
    cash = np.empty((market.n_paths, n))
    volumes[:, 0] = s.v_start
    off_node = 0
    for i in range(n):
        off_node += int(policy.off_node(i, volumes[:, i]).sum())
        features = market.features(i, policy.basis_spec)
        actions[:, i], volumes[:, i + 1] = policy.decide(i, features, market.spot[:, i], volumes[:, i])
        cash[:, i] = cash_flows(market.spot[:, i], volumes[:, i], volumes[:, i + 1], s)
    if off_node:
        logging.warning(f'{off_node} path-steps were off the volume grid and used the nearest node')
    return ForwardResult(actions, volumes, cash, off_node)


def run_on_historical(policy: Policy, history: PriceHistory, s: StorageSpec, expiry_offset_days: int = 0, maturities=()) -> tuple[ForwardResult, MarketPaths]:
    """the policy's decisions along the observed spot and curve path of the contract window"""
    market = MarketPaths.from_history(history, policy.dates, maturities, expiry_offset_days)
    result = evaluate_policy_forward(policy, market, s)
    logging.info(f'Historical wealth {result.wealth[0]:.4f}')
    return result, market
