"""Daily stock price ingestion and prediction targets.

A stock series is a date-sorted list of OHLC bars; the adjusted close is
the only price that feeds the models (as lag features and as the
regression target). The tendency target for classification is the sign
of the day-over-day adjusted-close change, with ties labelled -1.
"""
from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, ValidationError

STOCK_CSV_FIELDS = ("date", "open", "high", "low", "close", "adj_close", "volume")


@dataclass(frozen=True)
class DailyBar:
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    adj_close: float
    volume: int

    def __post_init__(self):
        for name in ("open", "high", "low", "close", "adj_close"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{self.date}: {name} must be > 0")
        if self.low > min(self.open, self.close) or self.high < max(self.open, self.close):
            raise ValidationError(f"{self.date}: low/high do not bracket open/close")
        if self.volume < 0:
            raise ValidationError(f"{self.date}: volume must be non-negative")


@dataclass(frozen=True)
class StockSeries:
    stock_id: str
    bars: tuple[DailyBar, ...]

    def __post_init__(self):
        for prev, cur in zip(self.bars, self.bars[1:]):
            if cur.date == prev.date:
                raise ValidationError(f"duplicate date {cur.date} in series {self.stock_id}")
            if cur.date < prev.date:
                raise ValidationError(f"dates not ascending at {cur.date} in series {self.stock_id}")

    def __len__(self) -> int:
        return len(self.bars)

    @property
    def dates(self) -> tuple[dt.date, ...]:
        return tuple(b.date for b in self.bars)

    @property
    def adj_close(self) -> tuple[float, ...]:
        return tuple(b.adj_close for b in self.bars)

    @property
    def total_volume(self) -> int:
        return sum(b.volume for b in self.bars)


def tendency_label(series: StockSeries, t: int) -> int:
    """Class of day t: +1 if adj_close rose from day t-1, else -1 (ties -1)."""
    if not 1 <= t < len(series):
        raise IndexError(f"day index {t} out of range for series of length {len(series)}")
    return 1 if series.bars[t].adj_close > series.bars[t - 1].adj_close else -1


def load_stock_series(path: str | Path, stock_id: str | None = None) -> StockSeries:
    """Read a stock CSV (see STOCK_CSV_FIELDS) into a validated, date-sorted series."""
    path = Path(path)
    if stock_id is None:
        stock_id = path.stem
    bars = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != STOCK_CSV_FIELDS:
            raise ParseError(f"{path}:1: expected header {','.join(STOCK_CSV_FIELDS)}")
        for row in reader:
            if not row:
                continue
            line = reader.line_num
            if len(row) != len(STOCK_CSV_FIELDS):
                raise ParseError(f"{path}:{line}: expected {len(STOCK_CSV_FIELDS)} fields, got {len(row)}")
            try:
                bar = DailyBar(
                    date=dt.date.fromisoformat(row[0]),
                    open=float(row[1]),
                    high=float(row[2]),
                    low=float(row[3]),
                    close=float(row[4]),
                    adj_close=float(row[5]),
                    volume=int(row[6]),
                )
            except ValidationError as exc:
                raise ValidationError(f"{path}:{line}: {exc}") from None
            except ValueError as exc:
                raise ParseError(f"{path}:{line}: {exc}") from None
            bars.append(bar)
    bars.sort(key=lambda b: b.date)
    return StockSeries(stock_id=stock_id, bars=tuple(bars))


def save_stock_series(series: StockSeries, path: str | Path) -> None:
    """Write the series back out in the stock CSV format (values round-trip exactly)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(STOCK_CSV_FIELDS) + "\n")
        for b in series.bars:
            fh.write(
                f"{b.date.isoformat()},{float(b.open)!r},{float(b.high)!r},{float(b.low)!r},"
                f"{float(b.close)!r},{float(b.adj_close)!r},{int(b.volume)}\n"
            )
