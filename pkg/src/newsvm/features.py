"""Feature assembly, z-score scaling, and train/test splitting.

Each row predicts day t from information through day t-1: the first X
entries are the previous day's per-source sentiment nodes, the next Y are
the adjusted closes of days t-1 .. t-Y. The expanded view keeps days
without news (news nodes zero-filled); the compact view drops them.
Scaling always fits on training rows only and is applied unchanged to
test rows; the regression target gets its own mean/std.
"""
from __future__ import annotations

import csv
import datetime as dt
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateScaleWarning, ParseError, ValidationError
from .market_data import StockSeries, tendency_label
from .textpipe import DailySourceSignal


@dataclass(frozen=True)
class FeatureLayout:
    num_sources: int = 20
    lag: int = 10

    def __post_init__(self):
        if self.num_sources < 1:
            raise ValidationError(f"num_sources must be >= 1, got {self.num_sources}")
        if not 1 <= self.lag <= 20:
            raise ValidationError(f"lag must be in [1, 20], got {self.lag}")

    @property
    def width(self) -> int:
        return self.num_sources + self.lag


@dataclass(frozen=True)
class FeatureVector:
    date: dt.date
    x: tuple[float, ...]
    label_class: int
    label_price: float
    has_news: bool


@dataclass(frozen=True)
class Dataset:
    layout: FeatureLayout
    rows: tuple[FeatureVector, ...]
    expanded: bool

    def __post_init__(self):
        width = self.layout.width
        for prev, cur in zip(self.rows, self.rows[1:]):
            if cur.date <= prev.date:
                raise ValidationError(f"dataset rows not in date order at {cur.date}")
        for row in self.rows:
            if len(row.x) != width:
                raise ValidationError(f"{row.date}: row width {len(row.x)} != layout width {width}")
            if not all(math.isfinite(v) for v in row.x):
                raise ValidationError(f"{row.date}: non-finite feature value")
            if not self.expanded and not row.has_news:
                raise ValidationError(f"{row.date}: no-news row in a non-expanded dataset")

    def __len__(self) -> int:
        return len(self.rows)


def assemble(
    series: StockSeries,
    signals: Mapping[dt.date, DailySourceSignal],
    layout: FeatureLayout,
    news_window: int = 1,
) -> tuple[Dataset, Dataset]:
    """Build the (expanded, compact) dataset views for one stock.

    News nodes come from the signals of trading days t-1 .. t-news_window
    (summed; the default window of 1 uses just the previous day). A day
    counts as having news if any window day carries coverage.
    """
    x_count, y_lag = layout.num_sources, layout.lag
    if news_window < 1:
        raise ValidationError("news_window must be >= 1")
    if len(series) <= y_lag + 1:
        raise ValidationError(
            f"series {series.stock_id} has {len(series)} bars; needs more than {y_lag + 1} for lag {y_lag}"
        )
    bars = series.bars
    rows = []
    for t in range(y_lag + 1, len(bars)):
        news = np.zeros(x_count)
        has_news = False
        for back in range(1, news_window + 1):
            if t - back < 0:
                break
            sig = signals.get(bars[t - back].date)
            if sig is None:
                continue
            if len(sig.values) != x_count:
                raise ValidationError(
                    f"signal for {bars[t - back].date} has {len(sig.values)} sources, layout expects {x_count}"
                )
            if any(c > 0 for c in sig.coverage):
                has_news = True
                news += np.asarray(sig.values)
        lags = [bars[t - k].adj_close for k in range(1, y_lag + 1)]
        rows.append(FeatureVector(
            date=bars[t].date,
            x=tuple(float(v) for v in news) + tuple(lags),
            label_class=tendency_label(series, t),
            label_price=bars[t].adj_close,
            has_news=has_news,
        ))
    expanded = Dataset(layout=layout, rows=tuple(rows), expanded=True)
    compact = Dataset(layout=layout, rows=tuple(r for r in rows if r.has_news), expanded=False)
    return expanded, compact


@dataclass(frozen=True)
class ScalingParams:
    mean: tuple[float, ...]
    std: tuple[float, ...]          # effective divisors; 1.0 where the column was constant
    constant_features: tuple[int, ...]
    target_mean: float
    target_std: float               # 1.0 if the target was constant
    target_constant: bool

    def __post_init__(self):
        if any(s <= 0 for s in self.std) or self.target_std <= 0:
            raise ValidationError("scaling std entries must be strictly positive")


def fit_scaler(rows: Sequence[FeatureVector]) -> ScalingParams:
    """Per-feature z-score statistics (population std) fitted on training rows only."""
    if len(rows) < 2:
        raise ValidationError("need at least 2 rows to fit a scaler")
    x = np.array([r.x for r in rows], dtype=float)
    prices = np.array([r.label_price for r in rows], dtype=float)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    constant = np.flatnonzero(std == 0)
    if constant.size:
        warnings.warn(
            f"{constant.size} constant feature column(s) scaled to zeros: {constant.tolist()}",
            DegenerateScaleWarning,
            stacklevel=2,
        )
    tmean = float(prices.mean())
    tstd = float(prices.std())
    target_constant = tstd == 0
    if target_constant:
        warnings.warn("constant regression target scaled to zeros", DegenerateScaleWarning, stacklevel=2)
    return ScalingParams(
        mean=tuple(float(v) for v in mean),
        std=tuple(float(v) for v in np.where(std == 0, 1.0, std)),
        constant_features=tuple(int(i) for i in constant),
        target_mean=tmean,
        target_std=1.0 if target_constant else tstd,
        target_constant=target_constant,
    )


def scale_features(params: ScalingParams, x: np.ndarray) -> np.ndarray:
    """z = (x - mean) / std for a row or matrix of raw features."""
    return (np.asarray(x, dtype=float) - np.asarray(params.mean)) / np.asarray(params.std)


def scale_price(params: ScalingParams, price: float | np.ndarray):
    return (np.asarray(price, dtype=float) - params.target_mean) / params.target_std


def unscale_price(params: ScalingParams, z: float | np.ndarray):
    return np.asarray(z, dtype=float) * params.target_std + params.target_mean


def apply_scaler(params: ScalingParams, rows: Sequence[FeatureVector]) -> tuple[FeatureVector, ...]:
    """Return rows with features and label_price replaced by their z-scores."""
    out = []
    for r in rows:
        if len(r.x) != len(params.mean):
            raise ValidationError(f"{r.date}: row width {len(r.x)} != scaler width {len(params.mean)}")
        z = scale_features(params, np.asarray(r.x))
        out.append(replace(r, x=tuple(float(v) for v in z),
                           label_price=float(scale_price(params, r.label_price))))
    return tuple(out)


def to_arrays(rows: Sequence[FeatureVector]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(features, class labels, price labels) as numpy arrays."""
    x = np.array([r.x for r in rows], dtype=float)
    y_class = np.array([r.label_class for r in rows], dtype=int)
    y_price = np.array([r.label_price for r in rows], dtype=float)
    return x, y_class, y_price


def split_random(dataset: Dataset, train_fraction: float = 0.8, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Seeded uniform partition; the test side gets at least one row (floor rule)."""
    if not 0 < train_fraction < 1:
        raise ValidationError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = len(dataset)
    if n == 0:
        raise ValidationError("cannot split an empty dataset")
    test_size = max(1, math.floor(n * (1 - train_fraction) + 1e-9))
    train_size = n - test_size
    if train_size < 1:
        raise ValidationError(f"split of {n} rows leaves an empty training side")
    perm = np.random.default_rng(seed).permutation(n)
    train_idx = np.sort(perm[:train_size])
    test_idx = np.sort(perm[train_size:])
    rows = dataset.rows
    train = Dataset(layout=dataset.layout, rows=tuple(rows[i] for i in train_idx), expanded=dataset.expanded)
    test = Dataset(layout=dataset.layout, rows=tuple(rows[i] for i in test_idx), expanded=dataset.expanded)
    return train, test


# --- featurized CSV ---------------------------------------------------------

def dataset_csv_header(width: int) -> list[str]:
    return ["date", "has_news"] + [f"f{i}" for i in range(1, width + 1)] + ["label_class", "label_price"]


def save_dataset_csv(dataset: Dataset, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(dataset_csv_header(dataset.layout.width))
        for r in dataset.rows:
            writer.writerow(
                [r.date.isoformat(), int(r.has_news)]
                + [repr(v) for v in r.x]
                + [r.label_class, repr(r.label_price)]
            )


def load_dataset_csv(path: str | Path, num_sources: int = 20, expanded: bool | None = None) -> Dataset:
    """Re-ingest a featurized CSV; the lag is inferred from the column count.

    ``expanded`` defaults to inferring the flag from the rows (any no-news
    row implies the expanded view).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        width = len(header) - 4
        if width < 2 or header != dataset_csv_header(width):
            raise ParseError(f"{path}:1: not a featurized dataset header")
        layout = FeatureLayout(num_sources=num_sources, lag=width - num_sources)
        rows = []
        for row in reader:
            if not row:
                continue
            line = reader.line_num
            if len(row) != width + 4:
                raise ParseError(f"{path}:{line}: expected {width + 4} fields, got {len(row)}")
            try:
                rows.append(FeatureVector(
                    date=dt.date.fromisoformat(row[0]),
                    has_news=bool(int(row[1])),
                    x=tuple(float(v) for v in row[2:2 + width]),
                    label_class=int(row[2 + width]),
                    label_price=float(row[3 + width]),
                ))
            except ValueError as exc:
                raise ParseError(f"{path}:{line}: {exc}") from None
    if expanded is None:
        expanded = any(not r.has_news for r in rows)
    return Dataset(layout=layout, rows=tuple(rows), expanded=expanded)
