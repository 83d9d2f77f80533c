import logging
import re
from datetime import date, timedelta
from typing import Optional

import numpy as np
import pandas as pd

from errors import DomainError, EmptyInputError, GapError, InsufficientCurveError, OrderingError, ParseError
from utils import daterange, format_month

SCHEMA_SPOT = 'spot'
SCHEMA_CURVE = 'curve'
SCHEMAS: dict[str, list[str]] = {
    SCHEMA_SPOT: ['date', 'price'],
    SCHEMA_CURVE: ['date', 'maturity_month', 'price'],
}

# first data row of a csv file is on line 2
_FIRST_DATA_LINE = 2
_PANDAS_LINE_RE = re.compile(r'line (\d+)')


def contract_expiry(maturity: date, expiry_offset_days: int = 0) -> date:
    return maturity + timedelta(days=expiry_offset_days)


class PriceHistory:
    """Daily spot prices and futures curves.

    `curves[i, k]` is the price of the contract maturing in `maturities[k]` observed on `dates[i]`, NaN when not quoted.
    """
    dates: list[date]
    spot: np.ndarray
    maturities: list[date]
    curves: np.ndarray

    def __init__(self, dates: list[date], spot: np.ndarray, maturities: list[date], curves: np.ndarray):
        self.dates = list(dates)
        self.spot = np.asarray(spot, dtype=float)
        self.maturities = list(maturities)
        self.curves = np.asarray(curves, dtype=float).reshape(len(self.dates), len(self.maturities))
        self.check()

    def __len__(self):
        return len(self.dates)

    def __repr__(self):
        if not self.dates:
            return 'PriceHistory(empty)'
        return f'PriceHistory({self.dates[0]}..{self.dates[-1]}, {len(self.maturities)} maturities)'

    def check(self):
        if not self.dates:
            raise EmptyInputError('price history is empty')
        for previous, current in zip(self.dates, self.dates[1:]):
            if current <= previous:
                raise OrderingError(f'dates not strictly increasing: {current} follows {previous}')
        if self.spot.shape != (len(self.dates),):
            raise ValueError(f'spot has shape {self.spot.shape}, expected ({len(self.dates)},)')
        if not np.all(self.spot > 0):
            bad = self.dates[int(np.argmin(self.spot > 0))]
            raise DomainError(f'non-positive spot price on {bad}')
        quoted = ~np.isnan(self.curves)
        if np.any(self.curves[quoted] <= 0):
            raise DomainError('non-positive futures price in curves')
        for i, d in enumerate(self.dates):
            months = [m for m, q in zip(self.maturities, quoted[i]) if q]
            if months and months[0] < d.replace(day=1):
                raise OrderingError(f'curve of {d} quotes the already delivered month {format_month(months[0])}')
            if len(months) < 2:
                raise InsufficientCurveError(f'curve of {d} quotes {len(months)} maturities, need at least 2', {'date': str(d)})

    def index_of(self, d: date) -> int:
        try:
            return self.dates.index(d)
        except ValueError:
            raise GapError(f'no observation on {d}')

    def curve_at(self, i: int) -> list[tuple[date, float]]:
        row = self.curves[i]
        return [(m, float(p)) for m, p in zip(self.maturities, row) if not np.isnan(p)]

    def window(self, start: date, end: date) -> 'PriceHistory':
        """the observations of every calendar day in [start, end]; a missing day is a gap"""
        wanted = daterange(start, end)
        index = {d: i for i, d in enumerate(self.dates)}
        missing = [d for d in wanted if d not in index]
        if missing:
            raise GapError(f'history has {len(missing)} missing days in {start}..{end}, first {missing[0]}', {'first_missing': str(missing[0])})
        rows = [index[d] for d in wanted]
        return PriceHistory(wanted, self.spot[rows], self.maturities, self.curves[rows])

    def before(self, end: date) -> 'PriceHistory':
        """observations strictly before `end`"""
        rows = [i for i, d in enumerate(self.dates) if d < end]
        if not rows:
            raise EmptyInputError(f'no observations before {end}')
        return PriceHistory([self.dates[i] for i in rows], self.spot[rows], self.maturities, self.curves[rows])


def _raise_parse(ex: Exception, path: str):
    match = _PANDAS_LINE_RE.search(str(ex))
    line = int(match.group(1)) if match else 0
    raise ParseError(str(ex).strip(), line=line, path=path)


def read_price_csv(path: str, schema: str) -> pd.DataFrame:
    """
    Read a csv file of `schema` ('spot' or 'curve') into typed columns.
    Every malformed row is reported with its line number.
    """
    if schema not in SCHEMAS:
        raise ValueError(f'unknown csv schema "{schema}"')
    columns = SCHEMAS[schema]
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise EmptyInputError(f'{path} is empty')
    except pd.errors.ParserError as ex:
        _raise_parse(ex, path)
    missing = [c for c in columns if c not in raw.columns]
    if missing:
        raise ParseError(f'missing columns {", ".join(missing)} (schema "{schema}")', line=1, path=path)
    if raw.empty:
        raise EmptyInputError(f'{path} has no data rows')

    frame = pd.DataFrame()
    frame['date'] = pd.to_datetime(raw['date'], format='%Y-%m-%d', errors='coerce')
    frame['price'] = pd.to_numeric(raw['price'], errors='coerce')
    if schema == SCHEMA_CURVE:
        frame['maturity_month'] = pd.to_datetime(raw['maturity_month'], format='%Y-%m', errors='coerce')
    for column in frame.columns:
        bad = frame[column].isna()
        if bad.any():
            row = int(np.argmax(bad.to_numpy()))
            raise ParseError(f'cannot parse {column} "{raw[column].iloc[row]}"', line=row + _FIRST_DATA_LINE, path=path)
    bad_price = ~(frame['price'] > 0)
    if bad_price.any():
        row = int(np.argmax(bad_price.to_numpy()))
        raise ParseError(f'non-positive price {frame["price"].iloc[row]}', line=row + _FIRST_DATA_LINE, path=path)

    dates = frame['date']
    if schema == SCHEMA_SPOT:
        unordered = ~(dates.diff().dt.days > 0)
        unordered.iloc[0] = False
    else:
        keys = dates.dt.strftime('%Y-%m-%d') + '/' + frame['maturity_month'].dt.strftime('%Y-%m')
        unordered = (dates.diff().dt.days < 0) | keys.duplicated()
    if unordered.any():
        row = int(np.argmax(unordered.to_numpy()))
        raise OrderingError(f'{path}:{row + _FIRST_DATA_LINE}: date {raw["date"].iloc[row]} out of order or duplicated', {'line': row + _FIRST_DATA_LINE})
    return frame


def load_price_history(spot_path: str, curve_path: str) -> PriceHistory:
    """Join a `spot` csv and a `curve` csv on their dates. Every spot date needs a curve."""
    logging.debug(f'Loading spot prices from {spot_path} and curves from {curve_path}')
    spot = read_price_csv(spot_path, SCHEMA_SPOT)
    curve = read_price_csv(curve_path, SCHEMA_CURVE)
    dates = [ts.date() for ts in spot['date']]
    maturities = sorted({ts.date() for ts in curve['maturity_month']})
    date_index = {d: i for i, d in enumerate(dates)}
    maturity_index = {m: k for k, m in enumerate(maturities)}
    curves = np.full((len(dates), len(maturities)), np.nan)
    skipped = 0
    for d, m, p in zip(curve['date'], curve['maturity_month'], curve['price']):
        i = date_index.get(d.date())
        if i is None:
            skipped += 1
            continue
        curves[i, maturity_index[m.date()]] = p
    if skipped:
        logging.debug(f'{skipped} curve rows have no matching spot date and were ignored')
    unquoted = np.all(np.isnan(curves), axis=1)
    if unquoted.any():
        raise InsufficientCurveError(f'no futures curve on {dates[int(np.argmax(unquoted))]}')
    history = PriceHistory(dates, spot['price'].to_numpy(dtype=float), maturities, curves)
    logging.info(f'Loaded {history}')
    return history


def write_price_history(history: PriceHistory, spot_path: str, curve_path: str):
    """Inverse of `load_price_history`"""
    pd.DataFrame({
        'date': [d.isoformat() for d in history.dates],
        'price': history.spot,
    }).to_csv(spot_path, index=False, float_format='%.10g')
    rows = []
    for i, d in enumerate(history.dates):
        for m, p in history.curve_at(i):
            rows.append((d.isoformat(), format_month(m), p))
    pd.DataFrame(rows, columns=SCHEMAS[SCHEMA_CURVE]).to_csv(curve_path, index=False, float_format='%.10g')


class RollingSeries:
    """prompt, back and spot-prompt spread per date"""
    dates: list[date]
    spot: np.ndarray
    prompt: np.ndarray
    back: np.ndarray
    spread: np.ndarray
    prompt_maturity: list[date]
    back_maturity: list[date]

    def __init__(self, dates, spot, prompt, back, prompt_maturity, back_maturity):
        self.dates = list(dates)
        self.spot = np.asarray(spot, dtype=float)
        self.prompt = np.asarray(prompt, dtype=float)
        self.back = np.asarray(back, dtype=float)
        self.spread = (self.spot - self.prompt) / self.prompt
        self.prompt_maturity = list(prompt_maturity)
        self.back_maturity = list(back_maturity)

    def __len__(self):
        return len(self.dates)

    @property
    def front_back(self) -> np.ndarray:
        return (self.prompt - self.back) / self.back


def live_contracts(history: PriceHistory, i: int, expiry_offset_days: int = 0, on: Optional[date] = None) -> list[int]:
    """maturity indices quoted on row `i` that have not expired on `on` (defaults to the row date)"""
    on = on or history.dates[i]
    row = history.curves[i]
    return [k for k, m in enumerate(history.maturities) if not np.isnan(row[k]) and contract_expiry(m, expiry_offset_days) > on]


def rolling_series(history: PriceHistory, expiry_offset_days: int = 0) -> RollingSeries:
    prompt = np.empty(len(history))
    back = np.empty(len(history))
    prompt_maturity = []
    back_maturity = []
    for i, d in enumerate(history.dates):
        live = live_contracts(history, i, expiry_offset_days)
        if len(live) < 2:
            raise InsufficientCurveError(f'curve of {d} has {len(live)} live maturities, need at least 2', {'date': str(d)})
        prompt[i] = history.curves[i, live[0]]
        back[i] = history.curves[i, live[1]]
        prompt_maturity.append(history.maturities[live[0]])
        back_maturity.append(history.maturities[live[1]])
    return RollingSeries(history.dates, history.spot, prompt, back, prompt_maturity, back_maturity)


def constant_maturity_returns(history: PriceHistory, horizon_years: float, expiry_offset_days: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """
    Log-returns of the prompt contract and of the contract closest to `horizon_years` ahead.
    Each return is taken on the contract selected at the later date so that rolls never show up as returns.
    Returns (prompt_returns, long_returns), one entry per consecutive pair of dates.
    """
    n = len(history) - 1
    prompt_returns = np.empty(n)
    long_returns = np.empty(n)
    horizon = timedelta(days=round(horizon_years * 365))
    for i in range(1, len(history)):
        d = history.dates[i]
        live = [k for k in live_contracts(history, i, expiry_offset_days) if not np.isnan(history.curves[i - 1, k])]
        if len(live) < 2:
            raise InsufficientCurveError(f'curve of {d} has no two contracts quoted on consecutive days', {'date': str(d)})
        target = d + horizon
        long_k = min(live, key=lambda k: abs((history.maturities[k] - target).days))
        if history.maturities[long_k] < d + horizon / 2:
            raise InsufficientCurveError(f'curve of {d} has no contract near {horizon_years:g} years ahead', {'date': str(d)})
        prompt_k = live[0]
        prompt_returns[i - 1] = np.log(history.curves[i, prompt_k] / history.curves[i - 1, prompt_k])
        long_returns[i - 1] = np.log(history.curves[i, long_k] / history.curves[i - 1, long_k])
    return prompt_returns, long_returns
