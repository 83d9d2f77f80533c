import logging
from datetime import date, timedelta
from typing import Literal, Optional

import numpy as np

from constants import ACTIONS, MAX_VOLUME_NODES, STORAGE_PRESETS, VOLUME_TOLERANCE
from errors import ConfigError, DomainError, InfeasibleError
from utils import daterange, parse_date

Action = Literal['no', 'inj', 'with']

NO, INJ, WITH = (ACTIONS.index(a) for a in ('no', 'inj', 'with'))


class StorageSpec:
    """Physical storage lease. Volumes in 10^6 MMBtu, rates per day, `dt` in days."""
    v_min: float
    v_max: float
    a_inj: float
    a_with: float
    v_start: float
    v_end_target: float
    start_date: date
    end_date: date
    dt: int
    cost_per_unit: float

    def __init__(
        self,
        v_min: float,
        v_max: float,
        a_inj: float,
        a_with: float,
        v_start: float,
        v_end_target: float,
        start_date: date,
        end_date: date,
        dt: int = 1,
        cost_per_unit: float = 0.0,
    ):
        self.v_min = float(v_min)
        self.v_max = float(v_max)
        self.a_inj = float(a_inj)
        self.a_with = float(a_with)
        self.v_start = float(v_start)
        self.v_end_target = float(v_end_target)
        self.start_date = parse_date(start_date)
        self.end_date = parse_date(end_date)
        self.dt = int(dt)
        self.cost_per_unit = float(cost_per_unit)
        self.validate()

    def __repr__(self):
        return (f'StorageSpec([{self.v_min:g}, {self.v_max:g}], inj {self.a_inj:g}/d, with {self.a_with:g}/d, '
                f'{self.v_start:g} -> {self.v_end_target:g}, {self.start_date}..{self.end_date})')

    def validate(self):
        if not self.v_min <= self.v_max:
            raise ConfigError(f'v_min {self.v_min} exceeds v_max {self.v_max}')
        for name in ['v_start', 'v_end_target']:
            value = getattr(self, name)
            if not self.v_min <= value <= self.v_max:
                raise ConfigError(f'{name} {value} outside [{self.v_min}, {self.v_max}]')
        if not (self.a_inj > 0 and self.a_with > 0):
            raise ConfigError(f'injection and withdrawal rates must be positive, got {self.a_inj}, {self.a_with}')
        if not self.end_date > self.start_date:
            raise ConfigError(f'end date {self.end_date} is not after start date {self.start_date}')
        if self.dt < 1:
            raise ConfigError(f'time step must be at least one day, got {self.dt}')
        if self.cost_per_unit < 0:
            raise ConfigError(f'injection/withdrawal cost must not be negative, got {self.cost_per_unit}')

    @staticmethod
    def from_preset(name: str, start_date: date, end_date: Optional[date] = None, dt: int = 1) -> 'StorageSpec':
        if name not in STORAGE_PRESETS:
            raise ConfigError(f'unknown storage preset "{name}", expected one of {", ".join(STORAGE_PRESETS)}')
        preset = STORAGE_PRESETS[name]
        start = parse_date(start_date)
        end = parse_date(end_date) if end_date else start + timedelta(days=preset['lease_days'])
        return StorageSpec(preset['v_min'], preset['v_max'], preset['a_inj'], preset['a_with'], preset['v_start'], preset['v_end_target'], start, end, dt=dt)

    def copy(self, **changes) -> 'StorageSpec':
        values = {name: getattr(self, name) for name in self.__annotations__}
        values.update(changes)
        return StorageSpec(**values)

    @property
    def dates(self) -> list[date]:
        """decision dates followed by the terminal date"""
        days = daterange(self.start_date, self.end_date, self.dt)
        if days[-1] != self.end_date:
            days.append(days[-1] + timedelta(days=self.dt))
        return days

    @property
    def n_steps(self) -> int:
        return len(self.dates) - 1

    @property
    def inj_step(self) -> float:
        return self.a_inj * self.dt

    @property
    def with_step(self) -> float:
        return self.a_with * self.dt


def _check_volume(v: float, s: StorageSpec):
    if not s.v_min - VOLUME_TOLERANCE <= v <= s.v_max + VOLUME_TOLERANCE:
        raise DomainError(f'volume {v} outside [{s.v_min}, {s.v_max}]')


def action_code(a: Action) -> int:
    if a not in ACTIONS:
        raise DomainError(f'unknown action "{a}"')
    return ACTIONS.index(a)


def next_volumes(v, code, s: StorageSpec) -> np.ndarray:
    """vectorized transition, `code` indexes ACTIONS"""
    v = np.asarray(v, dtype=float)
    code = np.asarray(code)
    return np.where(code == INJ, np.minimum(v + s.inj_step, s.v_max), np.where(code == WITH, np.maximum(v - s.with_step, s.v_min), v))


def next_volume(v: float, a: Action, s: StorageSpec) -> float:
    _check_volume(v, s)
    return float(next_volumes(v, action_code(a), s))


def cash_flows(spot, v, v_next, s: StorageSpec) -> np.ndarray:
    """vectorized: pay to inject, receive to withdraw, minus the per-unit cost on the moved volume"""
    moved = np.asarray(v_next) - np.asarray(v)
    return -np.asarray(spot) * moved - s.cost_per_unit * np.abs(moved)


def cash_flow(spot: float, v: float, a: Action, s: StorageSpec) -> float:
    return float(cash_flows(spot, v, next_volume(v, a, s), s))


def dedup_volumes(values: np.ndarray, tolerance: float = VOLUME_TOLERANCE) -> np.ndarray:
    ordered = np.sort(np.asarray(values, dtype=float))
    if len(ordered) == 0:
        return ordered
    keep = np.concatenate([[True], np.diff(ordered) > tolerance])
    return ordered[keep]


def coarsen(volumes: np.ndarray, s: StorageSpec, max_nodes: int) -> np.ndarray:
    """evenly spaced grid over the attainable range, always keeping the start and target volumes"""
    low, high = volumes[0], volumes[-1]
    grid = np.linspace(low, high, max_nodes)
    pinned = [v for v in (s.v_start, s.v_end_target) if low - VOLUME_TOLERANCE <= v <= high + VOLUME_TOLERANCE]
    return dedup_volumes(np.concatenate([grid, pinned]))


def volume_grids(s: StorageSpec, max_nodes: int = MAX_VOLUME_NODES, until: Optional[int] = None) -> list[np.ndarray]:
    """attainable volume sets for steps 0..until (default: all steps), each step reachable from the previous one"""
    last = s.n_steps if until is None else until
    grids = [np.array([s.v_start])]
    coarsened = 0
    for _ in range(last):
        current = grids[-1]
        reached = np.concatenate([current, next_volumes(current, INJ, s), next_volumes(current, WITH, s)])
        volumes = dedup_volumes(reached)
        if len(volumes) > max_nodes:
            volumes = coarsen(volumes, s, max_nodes)
            coarsened += 1
        grids.append(volumes)
    if coarsened:
        logging.debug(f'Volume grid coarsened to {max_nodes} nodes on {coarsened} steps')
    return grids


def attainable_volumes(i: int, s: StorageSpec, max_nodes: int = MAX_VOLUME_NODES) -> np.ndarray:
    if i < 0:
        raise DomainError(f'step index must not be negative, got {i}')
    return volume_grids(s, max_nodes, until=i)[i]


def nearest_node(grid: np.ndarray, volumes) -> np.ndarray:
    """index of the closest grid volume, grid sorted ascending"""
    volumes = np.asarray(volumes, dtype=float)
    right = np.clip(np.searchsorted(grid, volumes), 1, max(len(grid) - 1, 1))
    left = right - 1
    if len(grid) == 1:
        return np.zeros(volumes.shape, dtype=int)
    closer_left = np.abs(volumes - grid[left]) <= np.abs(grid[right] - volumes)
    return np.where(closer_left, left, right)


def destinations(grids: list[np.ndarray], i: int, s: StorageSpec) -> np.ndarray:
    """node index in grid i+1 reached from every node of grid i by each action, shape (nodes, 3)"""
    current = grids[i]
    return np.stack([nearest_node(grids[i + 1], next_volumes(current, code, s)) for code in range(len(ACTIONS))], axis=1)


def feasibility(grids: list[np.ndarray], s: StorageSpec) -> list[np.ndarray]:
    """nodes from which the target volume can still be met at the terminal date"""
    feasible = [np.zeros(len(g), dtype=bool) for g in grids]
    feasible[-1] = np.abs(grids[-1] - s.v_end_target) <= VOLUME_TOLERANCE
    for i in range(len(grids) - 2, -1, -1):
        feasible[i] = feasible[i + 1][destinations(grids, i, s)].any(axis=1)
    if not feasible[0][0]:
        raise InfeasibleError(f'target volume {s.v_end_target} cannot be reached from {s.v_start} in {s.n_steps} steps')
    return feasible
