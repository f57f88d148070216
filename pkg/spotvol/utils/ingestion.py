"""Tick data files: parsing, last-tick resampling and daily session discovery."""
from __future__ import annotations

import datetime
import logging
import os
import numpy as np
import pandas as pd

from dateutil.parser import isoparse
from typing import IO

from spotvol.models.exceptions import (
    ConfigurationError, EmptySession, MalformedTickData, TickOrderError
)
from spotvol.models.paths import PricePath
from spotvol.models.ticks import RejectedRow, SessionSpec, TickRecords
from spotvol.utils.file import read_header, write_table

logger = logging.getLogger("SpotVol")

# Data rows start on the second line of a file
_FIRST_DATA_LINE = 2

def _read_frame(source: str | os.PathLike[str] | IO[bytes] | IO[str]) -> pd.DataFrame:
    try:
        return pd.read_csv(source, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise EmptySession("tick file is empty")
    except pd.errors.ParserError as e:
        raise MalformedTickData(f"tick file could not be parsed: {e}")

def _parse_times(raw: pd.Series, session: SessionSpec) -> pd.Series:
    """Returns seconds since the open; numbers are taken as such, clock strings as times of day."""
    seconds = pd.to_numeric(raw, errors="coerce")
    clock = seconds.isna() & raw.str.contains(":", regex=False)
    if clock.any():
        parsed = pd.to_timedelta(raw[clock], errors="coerce")
        seconds[clock] = parsed.dt.total_seconds() - session.open_seconds
    return seconds

def load_ticks(
    source: str | os.PathLike[str] | IO[bytes] | IO[str],
    session: SessionSpec | None = None,
    *,
    timestamp_column: str = "timestamp",
    price_column: str = "price"
) -> TickRecords:
    """Reads a `timestamp,price` CSV into tick records.

    Rows with unreadable fields or nonpositive prices are dropped and listed in
    the records' rejected rows with their line numbers. Timestamps must not
    decrease among the kept rows."""
    session = session or SessionSpec()
    frame = _read_frame(source)
    columns = [str(c).strip().lower() for c in frame.columns]
    frame.columns = columns
    missing = [c for c in (timestamp_column, price_column) if c not in columns]
    if missing:
        raise MalformedTickData(f"tick file header {','.join(columns)!r} lacks column(s) {', '.join(missing)}")
    if frame.empty:
        raise EmptySession("tick file has a header but no rows")

    times = _parse_times(frame[timestamp_column].str.strip(), session)
    prices = pd.to_numeric(frame[price_column].str.strip(), errors="coerce")
    lines = np.arange(len(frame)) + _FIRST_DATA_LINE

    rejected: list[RejectedRow] = []
    keep = np.ones(len(frame), dtype=bool)
    for idx in np.flatnonzero(times.isna().to_numpy() | ~np.isfinite(times.to_numpy(dtype=float, na_value=np.nan))):
        rejected.append(RejectedRow(int(lines[idx]), f"unreadable timestamp {frame[timestamp_column].iloc[idx]!r}"))
        keep[idx] = False
    price_values = prices.to_numpy(dtype=float, na_value=np.nan)
    for idx in np.flatnonzero(keep & ~(price_values > 0)):
        rejected.append(RejectedRow(int(lines[idx]), f"invalid price {frame[price_column].iloc[idx]!r}"))
        keep[idx] = False
    rejected.sort(key=lambda row: row.line)
    if rejected:
        logger.warning(f"Rejected {len(rejected)} tick rows, first at line {rejected[0].line}: {rejected[0].reason}")

    kept_times = times.to_numpy(dtype=float, na_value=np.nan)[keep]
    kept_lines = lines[keep]
    backwards = np.flatnonzero(np.diff(kept_times) < 0)
    if backwards.size:
        raise TickOrderError(int(kept_lines[backwards[0] + 1]))
    if kept_times.size == 0:
        raise EmptySession("tick file has no valid rows")
    return TickRecords(kept_times, price_values[keep], tuple(rejected))

def resample_last_tick(ticks: TickRecords, session: SessionSpec | None = None) -> PricePath:
    """Returns the log of the last trade price at or before each grid second.

    Ties keep the last trade in file order. Grid points before the first trade
    take its price. Trades after the close are ignored."""
    session = session or SessionSpec()
    inside = ticks.timestamps <= session.seconds
    if not inside.any():
        raise EmptySession("session contains no ticks before the close")
    times = ticks.timestamps[inside]
    prices = ticks.prices[inside]

    grid = session.grid()
    index = np.searchsorted(times, grid, side="right") - 1
    leading = int(np.count_nonzero(index < 0))
    if leading:
        logger.warning(f"Filled {leading} grid points before the first trade with its price")
    logprices = np.log(prices[np.clip(index, 0, None)])
    return PricePath(grid, logprices, session.seconds, day_length=session.seconds)

def load_exclusions(source: str | os.PathLike[str] | None) -> set[datetime.date]:
    """Reads one ISO-8601 date per line; blank lines and # comments are skipped."""
    if source is None:
        return set()
    dates: set[datetime.date] = set()
    with open(source, encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                dates.add(isoparse(text).date())
            except ValueError:
                raise ConfigurationError(f"exclusion list line {number} is not an ISO date: {text!r}")
    return dates

def session_files(data_dir: str | os.PathLike[str], exclusions: set[datetime.date] | None = None) -> list[tuple[datetime.date, str]]:
    """Returns the (date, path) of every YYYY-MM-DD.csv file in the directory, oldest first."""
    if not os.path.isdir(data_dir):
        raise EmptySession(f"data directory {os.fspath(data_dir)!r} does not exist")
    exclusions = exclusions or set()
    found: list[tuple[datetime.date, str]] = []
    for name in sorted(os.listdir(data_dir)):
        stem, extension = os.path.splitext(name)
        if extension.lower() != ".csv":
            continue
        try:
            day = isoparse(stem).date()
        except ValueError:
            logger.debug(f"Skipping {name}, its name is not a date")
            continue
        if day in exclusions:
            logger.info(f"Skipping excluded session {day.isoformat()}")
            continue
        found.append((day, os.path.join(data_dir, name)))
    if not found:
        raise EmptySession(f"no session files in {os.fspath(data_dir)!r}")
    found.sort()
    return found

def write_ticks(path: str | os.PathLike[str], timestamps: np.ndarray, prices: np.ndarray) -> None:
    """Writes trades as a `timestamp,price` CSV in seconds since the open."""
    pd.DataFrame({"timestamp": timestamps, "price": prices}).to_csv(path, index=False, float_format="%.12g")

def write_path(path: str | os.PathLike[str], prices: PricePath, header: dict[str, object] | None = None) -> None:
    """Writes a `timestamp,logprice` CSV whose header block carries the horizon and day length."""
    block = {"horizon": repr(prices.horizon), "day_length": repr(prices.day_length)}
    block.update(header or {})
    frame = pd.DataFrame({"timestamp": prices.timestamps, "logprice": prices.logprices})
    write_table(os.fspath(path), frame, block, float_format="%.17g")

def load_path(source: str | os.PathLike[str]) -> PricePath:
    """Reads a `timestamp,logprice` CSV written by write_path."""
    header = read_header(os.fspath(source))
    frame = pd.read_csv(source, comment="#")
    if list(frame.columns[:2]) != ["timestamp", "logprice"]:
        raise MalformedTickData(f"{os.fspath(source)!r} is not a timestamp,logprice path file")
    try:
        horizon = float(header["horizon"]) if "horizon" in header else None
        day_length = float(header["day_length"]) if "day_length" in header else None
    except ValueError:
        raise MalformedTickData(f"{os.fspath(source)!r} has an unreadable horizon or day length")
    return PricePath(
        frame["timestamp"].to_numpy(dtype=float), frame["logprice"].to_numpy(dtype=float),
        horizon, day_length=day_length
    )

def load_price_path(source: str | os.PathLike[str], session: SessionSpec | None = None) -> PricePath:
    """Reads either a log-price path file or a tick file, resampling ticks on the session grid."""
    with open(source, encoding="utf-8") as f:
        first = f.readline()
    if first.startswith("#"):
        return load_path(source)
    return resample_last_tick(load_ticks(source, session), session)
