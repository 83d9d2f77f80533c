from datetime import date

import numpy as np

from constants import ACTIONS, VOLUME_TOLERANCE
from storage.contract import StorageSpec, cash_flows, nearest_node, next_volumes


class Policy:
    """
    Estimated optimal injection/withdrawal rule.

    `coefficients[i][:, l]` regresses the value of holding `grids[i + 1][l]` after step i on the state features at step i,
    so the continuation value of each action is read from the column of the node it leads to.
    """
    spec: StorageSpec
    basis_spec: str
    dates: list[date]
    grids: list[np.ndarray]
    feasible: list[np.ndarray]
    coefficients: list[np.ndarray]
    backward_value: float

    def __init__(
        self,
        spec: StorageSpec,
        basis_spec: str,
        dates: list[date],
        grids: list[np.ndarray],
        feasible: list[np.ndarray],
        coefficients: list[np.ndarray],
        backward_value: float = float('nan'),
    ):
        self.spec = spec
        self.basis_spec = basis_spec
        self.dates = list(dates)
        self.grids = grids
        self.feasible = feasible
        self.coefficients = coefficients
        self.backward_value = backward_value

    def __repr__(self):
        return f'Policy({len(self.coefficients)} steps, up to {max(len(g) for g in self.grids)} volume nodes, basis {self.basis_spec})'

    @property
    def n_steps(self) -> int:
        return len(self.coefficients)

    def continuation(self, i: int, features: np.ndarray, nodes: np.ndarray) -> np.ndarray:
        """regressed value of landing on `nodes` (one per path) of step i+1, -inf where the target becomes unreachable"""
        coefficients = self.coefficients[i][:, nodes]
        value = np.einsum('mk,km->m', features, coefficients)
        return np.where(self.feasible[i + 1][nodes], value, -np.inf)

    def action_values(self, i: int, features: np.ndarray, spot: np.ndarray, volumes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(decision value, next volume) per path and action, actions in ACTIONS order"""
        values = np.empty((len(volumes), len(ACTIONS)))
        targets = np.empty((len(volumes), len(ACTIONS)))
        for code in range(len(ACTIONS)):
            landing = next_volumes(volumes, code, self.spec)
            nodes = nearest_node(self.grids[i + 1], landing)
            values[:, code] = cash_flows(spot, volumes, landing, self.spec) + self.continuation(i, features, nodes)
            targets[:, code] = landing
        return values, targets

    def decide(self, i: int, features: np.ndarray, spot: np.ndarray, volumes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """
        Best action code and resulting volume per path.
        Exact ties go to the earliest entry of ACTIONS: no action, then injection, then withdrawal.
        """
        values, targets = self.action_values(i, features, spot, volumes)
        codes = np.argmax(values, axis=1)
        return codes, targets[np.arange(len(volumes)), codes]

    def off_node(self, i: int, volumes: np.ndarray) -> np.ndarray:
        grid = self.grids[i]
        return np.abs(grid[nearest_node(grid, volumes)] - volumes) > VOLUME_TOLERANCE
