import logging
from datetime import date
from typing import Literal

import numpy as np

from constants import SPIKE_THRESHOLD_K
from errors import DomainError, InsufficientDataError

MIN_SERIES_LENGTH = 30

Sign = Literal['positive', 'negative']
SIGNS: list[Sign] = ['positive', 'negative']


class SpikeEvent:
    date: date
    # deviation of the spread from its sample mean
    deviation: float
    # the spread itself, (S - P) / P
    spread: float
    sign: Sign

    def __init__(self, date: date, deviation: float, spread: float):
        self.date = date
        self.deviation = deviation
        self.spread = spread
        self.sign = 'positive' if deviation > 0 else 'negative'

    def __repr__(self):
        return f'SpikeEvent({self.date}, {self.sign}, {self.deviation:+.4f})'


class SpikeReport:
    events: list[SpikeEvent]
    flags: np.ndarray
    mean: float
    std: float
    k: float
    # calendar month (1-12) -> sign -> number of events
    monthly_counts: dict[int, dict[Sign, int]]

    def __init__(self, events: list[SpikeEvent], flags: np.ndarray, mean: float, std: float, k: float):
        self.events = events
        self.flags = flags
        self.mean = mean
        self.std = std
        self.k = k
        self.monthly_counts = {month: {sign: 0 for sign in SIGNS} for month in range(1, 13)}
        for event in events:
            self.monthly_counts[event.date.month][event.sign] += 1

    def of_sign(self, sign: Sign) -> list[SpikeEvent]:
        return [e for e in self.events if e.sign == sign]

    def count_rows(self) -> list[tuple[int, int, int]]:
        return [(month, counts['positive'], counts['negative']) for month, counts in self.monthly_counts.items()]


def detect_spikes(dates: list[date], spread: np.ndarray, k: float = SPIKE_THRESHOLD_K) -> SpikeReport:
    """flags every date whose spread lies more than `k` sample standard deviations away from the sample mean"""
    spread = np.asarray(spread, dtype=float)
    if k <= 0:
        raise DomainError(f'spike threshold must be positive, got {k}')
    if len(spread) < MIN_SERIES_LENGTH:
        raise InsufficientDataError(f'spike detection needs {MIN_SERIES_LENGTH} observations, got {len(spread)}')
    if len(dates) != len(spread):
        raise ValueError(f'{len(dates)} dates for {len(spread)} spread values')
    mean = float(np.mean(spread))
    std = float(np.std(spread))
    deviation = spread - mean
    flags = np.abs(deviation) > k * std
    events = [SpikeEvent(dates[i], float(deviation[i]), float(spread[i])) for i in np.flatnonzero(flags)]
    report = SpikeReport(events, flags, mean, std, k)
    logging.debug(f'Detected {len(events)} spikes ({len(report.of_sign("positive"))} positive) at k={k:g}')
    return report
