from datetime import date
from typing import Sequence

import numpy as np

from constants import Stream
from utils import stream_rng, year_delta

from .params import SpikeParams


def window_mask(dates: Sequence[date], window: Sequence[int]) -> np.ndarray:
    months = set(window)
    return np.array([d.month in months for d in dates], dtype=bool)


def spike_path_from_arrivals(dates: Sequence[date], arrivals: Sequence[tuple[float, float]], sp: SpikeParams) -> np.ndarray:
    """
    Spike process on `dates` for explicit (arrival time, jump size) pairs, arrival times in years after `dates[0]`.
    An arrival in (t_{i-1}, t_i] belongs to the month of date i and is dropped outside the window.
    """
    times = np.array([year_delta(dates[0], d) for d in dates])
    in_window = window_mask(dates, sp.window)
    contribution = np.zeros(len(dates))
    for tau, jump in arrivals:
        i = int(np.searchsorted(times, tau, side='left'))
        if i == 0 or i >= len(dates) or not in_window[i]:
            continue
        contribution[i] += jump * np.exp(-sp.beta * (times[i] - tau))
    return _accumulate(contribution[None, :], times, sp.beta)[0]


def _accumulate(contribution: np.ndarray, times: np.ndarray, beta: float) -> np.ndarray:
    """Y_i = Y_{i-1} exp(-beta dt_i) + contribution_i, Y_0 = 0"""
    decay = np.exp(-beta * np.diff(times))
    y = np.zeros_like(contribution)
    for i in range(1, contribution.shape[1]):
        y[:, i] = y[:, i - 1] * decay[i - 1] + contribution[:, i]
    return y


def simulate_spikes(sp: SpikeParams, dates: Sequence[date], n_paths: int, seed: int, stream: Stream, paths: range = None) -> np.ndarray:
    """
    Compound Poisson spikes with exponential reversion, thinned to the seasonal window.
    Path m draws from (seed, stream, m); returns Y of shape (paths, dates).
    """
    paths = paths if paths is not None else range(n_paths)
    times = np.array([year_delta(dates[0], d) for d in dates])
    dt = np.diff(times)
    in_window = window_mask(dates, sp.window)
    contribution = np.zeros((len(paths), len(dates)))
    if sp.intensity > 0:
        for row, m in enumerate(paths):
            rng = stream_rng(seed, stream, m)
            counts = rng.poisson(sp.intensity * dt)
            total = int(counts.sum())
            steps = np.repeat(np.arange(1, len(dates)), counts)
            # time from arrival to the end of its step
            lag = rng.uniform(0.0, 1.0, total) * dt[steps - 1]
            jumps = rng.normal(sp.jump_mean, sp.jump_std, total)
            kept = in_window[steps]
            np.add.at(contribution[row], steps[kept], jumps[kept] * np.exp(-sp.beta * lag[kept]))
    return _accumulate(contribution, times, sp.beta)
