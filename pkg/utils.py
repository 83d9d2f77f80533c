import hashlib
import json
import multiprocessing
from datetime import date, timedelta
from typing import Any, Iterator, Optional

import numpy as np

from constants import DAYS_PER_YEAR, Stream


def parse_date(value: Any) -> date:
    if isinstance(value, date):
        return value
    return date.fromisoformat(str(value).strip())


def parse_month(value: Any) -> date:
    """`YYYY-MM` (or a date) to the first calendar day of that month"""
    if isinstance(value, date):
        return value.replace(day=1)
    text = str(value).strip()
    year, month = text.split('-')[:2]
    if len(year) != 4 or len(month) != 2:
        raise ValueError(f'not a YYYY-MM month: "{text}"')
    return date(int(year), int(month), 1)


def format_month(month: date) -> str:
    return f'{month.year:04d}-{month.month:02d}'


def next_month(month: date) -> date:
    return date(month.year + month.month // 12, month.month % 12 + 1, 1)


def month_range(first: date, last: date) -> list[date]:
    """all months from `first` to `last`, inclusive"""
    months = []
    current = first.replace(day=1)
    while current <= last:
        months.append(current)
        current = next_month(current)
    return months


def daterange(start: date, end: date, step_days: int = 1) -> list[date]:
    """[start, end] inclusive"""
    days = (end - start).days
    return [start + timedelta(days=d) for d in range(0, days + 1, step_days)]


def year_fraction(d: date) -> float:
    """calendar position as `year + day_of_year / days_in_year`, the argument of seasonal functions"""
    days_in_year = (date(d.year + 1, 1, 1) - date(d.year, 1, 1)).days
    return d.year + (d.timetuple().tm_yday - 1) / days_in_year


def year_delta(start: date, end: date) -> float:
    return (end - start).days / DAYS_PER_YEAR


def stream_rng(seed: int, stream: Stream, index: int) -> np.random.Generator:
    """independent, reproducible generator for one (seed, stream, path) triple"""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream), int(index)]))


def get_n_jobs(threads: Optional[int]) -> int:
    return threads or multiprocessing.cpu_count()


def chunked(n: int, chunk_size: int) -> Iterator[range]:
    for start in range(0, n, chunk_size):
        yield range(start, min(n, start + chunk_size))


def config_hash(obj: Any) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()
