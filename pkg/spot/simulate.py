import logging
from typing import Optional

import numpy as np
from joblib import Parallel, delayed

from constants import MODEL2_SPREAD_FLOOR, STREAM_SPIKE_NEG, STREAM_SPIKE_POS, STREAM_SPOT
from curve.simulate import PATH_CHUNK_SIZE, CurvePathSet
from errors import DomainError, GridError
from utils import chunked, get_n_jobs, stream_rng

from .jumps import simulate_spikes
from .params import SpotParams


class SpotPathSet:
    """Spot paths on the grid of a CurvePathSet; `spiked = base * exp(y_pos + y_neg)`"""
    dates: list
    base: np.ndarray
    spiked: np.ndarray
    garch_var: np.ndarray
    y_pos: np.ndarray
    y_neg: np.ndarray
    floored: np.ndarray
    seed: Optional[int]
    params: Optional[SpotParams]

    def __init__(
        self,
        dates: list,
        base: np.ndarray,
        y_pos: np.ndarray = None,
        y_neg: np.ndarray = None,
        garch_var: np.ndarray = None,
        floored: np.ndarray = None,
        seed: Optional[int] = None,
        params: Optional[SpotParams] = None,
    ):
        self.dates = list(dates)
        self.base = np.asarray(base, dtype=float)
        if self.base.ndim != 2 or self.base.shape[1] != len(self.dates):
            raise GridError(f'spot paths of shape {self.base.shape} do not match {len(self.dates)} dates')
        self.y_pos = np.zeros_like(self.base) if y_pos is None else y_pos
        self.y_neg = np.zeros_like(self.base) if y_neg is None else y_neg
        self.garch_var = np.zeros_like(self.base) if garch_var is None else garch_var
        self.floored = np.zeros(self.base.shape[0], dtype=int) if floored is None else floored
        self.spiked = self.base * np.exp(self.y_pos + self.y_neg)
        self.seed = seed
        self.params = params

    def __repr__(self):
        return f'SpotPathSet({self.n_paths} paths, {self.dates[0]}..{self.dates[-1]})'

    @property
    def n_paths(self) -> int:
        return self.base.shape[0]


def _simulate_base_chunk(
    p: SpotParams,
    prompt: np.ndarray,
    back: np.ndarray,
    s0: np.ndarray,
    seed: int,
    paths: range,
    spread_floor: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = prompt.shape[1] - 1
    draws = np.stack([stream_rng(seed, STREAM_SPOT, m).standard_normal((2, n)) for m in paths])
    z, retry = draws[:, 0, :], draws[:, 1, :]
    g = p.garch
    base = np.empty_like(prompt)
    variance = np.empty_like(prompt)
    floored = np.zeros(len(paths), dtype=int)
    base[:, 0] = s0
    variance[:, 0] = g.unconditional_variance()
    # the residual before the first step is taken at its expectation
    eps_sq = variance[:, 0].copy()
    for i in range(1, n + 1):
        variance[:, i] = g.kappa + g.gamma1 * variance[:, i - 1] + g.alpha1 * eps_sq
        sigma = np.sqrt(variance[:, i])
        eps = sigma * z[:, i - 1]
        if p.model_id == 1:
            mean = p.a1 + p.a2 * np.log(prompt[:, i - 1] / base[:, i - 1]) + p.a3 * np.log(prompt[:, i] / prompt[:, i - 1])
            base[:, i] = base[:, i - 1] * np.exp(mean + eps)
        else:
            spread = (base[:, i - 1] - prompt[:, i - 1]) / prompt[:, i - 1]
            front_back = (prompt[:, i - 1] - back[:, i - 1]) / back[:, i - 1]
            mean = p.a1 + p.a2 * spread + p.a3 * front_back
            y = mean + eps
            low = y <= spread_floor
            if low.any():
                eps = np.where(low, sigma * retry[:, i - 1], eps)
                y = mean + eps
                still_low = y <= spread_floor
                floored += still_low
                y = np.where(still_low, spread_floor, y)
                eps = y - mean
            base[:, i] = prompt[:, i] * (1 + y)
        eps_sq = eps**2
    return base, variance, floored


def simulate_spot_paths(
    p: SpotParams,
    curves: CurvePathSet,
    seed: int,
    initial_spot: Optional[float] = None,
    initial_spread: float = 0.0,
    spikes: bool = True,
    spread_floor: float = MODEL2_SPREAD_FLOOR,
    n_jobs: Optional[int] = 1,
) -> SpotPathSet:
    """
    Spot paths driven by the prompt (and back) contracts of `curves`, path m sharing its index with curve path m.
    The start value is `initial_spot`, or the prompt price shifted by `initial_spread`.
    """
    p.validate()
    prompt = curves.prompt()
    back = curves.back()
    if initial_spot is not None and not initial_spot > 0:
        raise DomainError(f'initial spot must be positive, got {initial_spot}')
    s0 = np.full(curves.n_paths, initial_spot) if initial_spot is not None else prompt[:, 0] * (1 + initial_spread)
    chunks = list(chunked(curves.n_paths, PATH_CHUNK_SIZE))
    args = [(p, prompt[c.start:c.stop], back[c.start:c.stop], s0[c.start:c.stop], seed, c, spread_floor) for c in chunks]
    if len(chunks) > 1 and get_n_jobs(n_jobs) > 1:
        parts = Parallel(n_jobs=get_n_jobs(n_jobs))(delayed(_simulate_base_chunk)(*a) for a in args)
    else:
        parts = [_simulate_base_chunk(*a) for a in args]
    base = np.concatenate([part[0] for part in parts])
    variance = np.concatenate([part[1] for part in parts])
    floored = np.concatenate([part[2] for part in parts])
    if floored.any():
        logging.warning(f'Spot spread floored at {spread_floor} on {int(floored.sum())} steps of {int(np.count_nonzero(floored))} paths')
    y_pos = y_neg = None
    if spikes and p.spikes_enabled:
        y_pos = simulate_spikes(p.spike_pos, curves.dates, curves.n_paths, seed, STREAM_SPIKE_POS)
        y_neg = simulate_spikes(p.spike_neg, curves.dates, curves.n_paths, seed, STREAM_SPIKE_NEG)
    paths = SpotPathSet(curves.dates, base, y_pos, y_neg, variance, floored, seed=seed, params=p)
    logging.debug(f'Simulated {paths.n_paths} spot paths with model {p.model_id}')
    return paths
