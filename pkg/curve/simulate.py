import logging
from datetime import date
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from constants import STREAM_CURVES
from errors import DomainError, GridError, InsufficientCurveError
from market.history import contract_expiry
from utils import chunked, get_n_jobs, stream_rng, year_delta, year_fraction

from .params import GabillonParams, seasonal_vol

PATH_CHUNK_SIZE = 256


class CurvePathSet:
    """Futures prices `prices[m, i, j]` of path m, date i and maturity month j"""
    dates: list[date]
    grid: np.ndarray
    times: np.ndarray
    maturities: list[date]
    expiries: list[date]
    prices: np.ndarray
    seed: Optional[int]
    params: Optional[GabillonParams]
    prompt_index: np.ndarray
    back_index: np.ndarray
    live: np.ndarray

    def __init__(
        self,
        dates: Sequence[date],
        maturities: Sequence[date],
        prices: np.ndarray,
        seed: Optional[int] = None,
        params: Optional[GabillonParams] = None,
        expiry_offset_days: int = 0,
    ):
        self.dates = list(dates)
        self.maturities = list(maturities)
        self.expiry_offset_days = expiry_offset_days
        self.expiries = [contract_expiry(m, expiry_offset_days) for m in self.maturities]
        self.prices = np.asarray(prices, dtype=float)
        if self.prices.ndim != 3 or self.prices.shape[1:] != (len(self.dates), len(self.maturities)):
            raise GridError(f'curve prices of shape {self.prices.shape} do not match {len(self.dates)} dates x {len(self.maturities)} maturities')
        self.seed = seed
        self.params = params
        self.grid = np.array([year_fraction(d) for d in self.dates])
        self.times = np.array([year_delta(self.dates[0], d) for d in self.dates])
        # live[i, j]: contract j still trades on date i
        self.live = np.array([[d < e for e in self.expiries] for d in self.dates], dtype=bool).reshape(len(self.dates), len(self.maturities))
        self.prompt_index = np.empty(len(self.dates), dtype=int)
        self.back_index = np.empty(len(self.dates), dtype=int)
        for i, d in enumerate(self.dates):
            live = np.flatnonzero(self.live[i])
            if len(live) < 2:
                raise InsufficientCurveError(f'only {len(live)} live maturities on {d}, need a prompt and a back contract', {'date': str(d)})
            self.prompt_index[i], self.back_index[i] = live[0], live[1]

    def __repr__(self):
        return f'CurvePathSet({self.n_paths} paths, {self.dates[0]}..{self.dates[-1]}, {len(self.maturities)} maturities)'

    @property
    def n_paths(self) -> int:
        return self.prices.shape[0]

    @property
    def n_steps(self) -> int:
        return len(self.dates) - 1

    def prompt(self) -> np.ndarray:
        steps = np.arange(len(self.dates))
        return self.prices[:, steps, self.prompt_index]

    def back(self) -> np.ndarray:
        steps = np.arange(len(self.dates))
        return self.prices[:, steps, self.back_index]

    def initial_curve(self) -> list[tuple[date, float]]:
        return list(zip(self.maturities, (float(p) for p in self.prices[0, 0])))


def _draw_chunk(
    p: GabillonParams,
    f0: np.ndarray,
    phi: np.ndarray,
    dt: np.ndarray,
    tau: np.ndarray,
    moving: np.ndarray,
    seed: int,
    paths: range,
) -> np.ndarray:
    n = len(dt)
    normals = np.stack([stream_rng(seed, STREAM_CURVES, m).standard_normal((n, 2)) for m in paths])
    w_short = normals[:, :, 0]
    w_long = p.rho * normals[:, :, 0] + np.sqrt(max(0.0, 1 - p.rho**2)) * normals[:, :, 1]
    decay = np.exp(-p.lam * np.maximum(tau, 0.0))
    load_short = decay * (phi * p.sigma_s)[:, None]
    load_long = (1 - decay) * p.sigma_l
    variance = load_short**2 + load_long**2 + 2 * p.rho * load_short * load_long
    drift = -0.5 * variance * dt[:, None]
    shocks = np.sqrt(dt)[None, :, None] * (load_short[None] * w_short[:, :, None] + load_long[None] * w_long[:, :, None])
    increments = np.where(moving[None], drift[None] + shocks, 0.0)
    return f0 * np.exp(np.cumsum(increments, axis=1))


def simulate_curves(
    p: GabillonParams,
    initial_curve: Sequence[tuple[date, float]],
    dates: Sequence[date],
    n_paths: int,
    seed: int,
    expiry_offset_days: int = 0,
    n_jobs: Optional[int] = 1,
) -> CurvePathSet:
    """
    Log-Euler simulation of every maturity of `initial_curve` on the daily `dates`.
    Path m draws from its own stream (seed, curves, m), so the result does not depend on `n_jobs`.
    Contracts stop moving once expired.
    """
    dates = list(dates)
    if n_paths < 1:
        raise DomainError(f'need at least one path, got {n_paths}')
    if len(dates) < 2:
        raise GridError('simulation grid needs at least two dates')
    maturities = [m for m, _ in initial_curve]
    f0 = np.array([price for _, price in initial_curve], dtype=float)
    if not np.all(f0 > 0):
        raise DomainError(f'initial curve has a non-positive price: {f0.min()}')
    dt = np.array([year_delta(a, b) for a, b in zip(dates, dates[1:])])
    if not np.all(dt > 0):
        raise GridError('simulation dates must be strictly increasing')
    phi = np.array([seasonal_vol(year_fraction(d), p) for d in dates[:-1]])
    tau = np.array([[year_delta(d, m) for m in maturities] for d in dates[:-1]])
    moving = np.array([[d < contract_expiry(m, expiry_offset_days) for m in maturities] for d in dates[:-1]], dtype=bool)

    chunks = list(chunked(n_paths, PATH_CHUNK_SIZE))
    if len(chunks) > 1 and get_n_jobs(n_jobs) > 1:
        parts = Parallel(n_jobs=get_n_jobs(n_jobs))(delayed(_draw_chunk)(p, f0, phi, dt, tau, moving, seed, c) for c in chunks)
    else:
        parts = [_draw_chunk(p, f0, phi, dt, tau, moving, seed, c) for c in chunks]
    prices = np.empty((n_paths, len(dates), len(maturities)))
    prices[:, 0, :] = f0
    prices[:, 1:, :] = np.concatenate(parts)
    logging.debug(f'Simulated {n_paths} futures curve paths over {len(dates) - 1} steps')
    return CurvePathSet(dates, maturities, prices, seed=seed, params=p, expiry_offset_days=expiry_offset_days)
