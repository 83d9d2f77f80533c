import logging
import os
from datetime import date
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from curve.simulate import CurvePathSet
from errors import GapError, GridError, InsufficientCurveError
from market.history import PriceHistory, contract_expiry, rolling_series
from spot.simulate import SpotPathSet
from utils import format_month

from .regression import basis_features


class MarketPaths:
    """
    Joint spot and futures trajectories on the contract grid, simulated or historical.
    `futures[m, i, j]` is the price of `maturities[j]`, frozen after expiry.
    """
    dates: list[date]
    spot: np.ndarray
    prompt: np.ndarray
    maturities: list[date]
    futures: Optional[np.ndarray]
    prompt_index: np.ndarray
    live: np.ndarray

    def __init__(
        self,
        dates: Sequence[date],
        spot: np.ndarray,
        prompt: np.ndarray,
        maturities: Sequence[date] = (),
        futures: Optional[np.ndarray] = None,
        prompt_index: Optional[np.ndarray] = None,
        expiry_offset_days: int = 0,
        base: Optional[np.ndarray] = None,
    ):
        self.dates = list(dates)
        self.spot = np.atleast_2d(np.asarray(spot, dtype=float))
        self.prompt = np.atleast_2d(np.asarray(prompt, dtype=float))
        if self.spot.shape != self.prompt.shape or self.spot.shape[1] != len(self.dates):
            raise GridError(f'spot {self.spot.shape} and prompt {self.prompt.shape} do not match {len(self.dates)} dates')
        self.maturities = list(maturities)
        self.futures = None if futures is None else np.asarray(futures, dtype=float)
        if self.futures is not None and self.futures.shape != self.spot.shape + (len(self.maturities), ):
            raise GridError(f'futures of shape {self.futures.shape} do not match {self.spot.shape} x {len(self.maturities)} maturities')
        self.prompt_index = np.full(len(self.dates), -1, dtype=int) if prompt_index is None else np.asarray(prompt_index, dtype=int)
        self.expiry_offset_days = expiry_offset_days
        expiries = [contract_expiry(m, expiry_offset_days) for m in self.maturities]
        self.live = np.array([[d < e for e in expiries] for d in self.dates], dtype=bool).reshape(len(self.dates), len(self.maturities))
        self.base = self.spot if base is None else base

    def __repr__(self):
        return f'MarketPaths({self.n_paths} paths, {self.dates[0]}..{self.dates[-1]})'

    @property
    def n_paths(self) -> int:
        return self.spot.shape[0]

    @property
    def n_steps(self) -> int:
        return len(self.dates) - 1

    def features(self, i: int, basis_spec: str) -> np.ndarray:
        return basis_features(basis_spec, self.spot[:, i], self.prompt[:, i])

    def check_grid(self, dates: Sequence[date]):
        if list(dates) != self.dates:
            raise GridError(f'paths cover {self.dates[0]}..{self.dates[-1]} ({len(self.dates)} dates), contract grid is {dates[0]}..{dates[-1]} ({len(dates)} dates)')

    @staticmethod
    def from_simulation(curves: CurvePathSet, spot: SpotPathSet) -> 'MarketPaths':
        if curves.dates != spot.dates or curves.n_paths != spot.n_paths:
            raise GridError('curve and spot paths are on different grids')
        return MarketPaths(
            curves.dates,
            spot.spiked,
            curves.prompt(),
            curves.maturities,
            curves.prices,
            curves.prompt_index,
            curves.expiry_offset_days,
            base=spot.base,
        )

    @staticmethod
    def from_history(history: PriceHistory, dates: Sequence[date], maturities: Sequence[date] = (), expiry_offset_days: int = 0) -> 'MarketPaths':
        """the single historical path on `dates`; every maturity must be quoted while it trades"""
        window = history.window(dates[0], dates[-1])
        if window.dates != list(dates):
            window = PriceHistory(list(dates), window.spot[[window.index_of(d) for d in dates]], window.maturities,
                                  window.curves[[window.index_of(d) for d in dates]])
        series = rolling_series(window, expiry_offset_days)
        futures = None
        prompt_index = None
        if maturities:
            futures = np.empty((1, len(dates), len(maturities)))
            for j, m in enumerate(maturities):
                if m not in window.maturities:
                    raise InsufficientCurveError(f'history never quotes {format_month(m)}')
                column = window.curves[:, window.maturities.index(m)]
                expiry = contract_expiry(m, expiry_offset_days)
                last = np.nan
                for i, d in enumerate(dates):
                    if d < expiry:
                        if np.isnan(column[i]):
                            raise GapError(f'{format_month(m)} is not quoted on {d} although it still trades', {'date': str(d)})
                        last = column[i]
                    elif np.isnan(last):
                        last = column[i] if not np.isnan(column[i]) else np.nan
                    futures[0, i, j] = last
            if np.isnan(futures).any():
                raise GapError('history lacks a price for a contract that expired before the window')
            lookup = {m: j for j, m in enumerate(maturities)}
            prompt_index = np.array([lookup.get(m, -1) for m in series.prompt_maturity])
        return MarketPaths(dates, series.spot, series.prompt, maturities, futures, prompt_index, expiry_offset_days)

    def save(self, path: str, path_format: str = 'npz'):
        os.makedirs(os.path.dirname(os.path.abspath(path)) or '.', exist_ok=True)
        labels = [format_month(m) for m in self.maturities]
        if path_format == 'npz':
            np.savez_compressed(
                path,
                dates=np.array([d.isoformat() for d in self.dates]),
                maturities=np.array(labels),
                spot=self.spot,
                base=self.base,
                prompt=self.prompt,
                futures=self.futures if self.futures is not None else np.empty((0, )),
            )
        elif path_format == 'csv':
            n_paths, n_dates = self.spot.shape
            frame = pd.DataFrame({
                'path': np.repeat(np.arange(n_paths), n_dates),
                'date': np.tile([d.isoformat() for d in self.dates], n_paths),
                'spot': self.spot.ravel(),
                'base': self.base.ravel(),
                'prompt': self.prompt.ravel(),
            })
            if self.futures is not None:
                for j, label in enumerate(labels):
                    frame[f'F_{label}'] = self.futures[:, :, j].ravel()
            frame.to_csv(path, index=False, float_format='%.10g')
        else:
            raise ValueError(f'unknown path format "{path_format}"')
        logging.info(f'Wrote {self.n_paths} paths to {path}')
