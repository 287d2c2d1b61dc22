"""Seeded synthetic corpus and price generator.

Plants a known structure end to end: each source j gets a daily sentiment
s_jt on a half-point grid in [-5, +5]; documents for (j, t) are composed
purely of vocabulary terms carrying exactly that score, so the text
pipeline recovers s_jt; and the next day's log-return is w . s_t plus
Gaussian noise, so adjusted closes carry the planted signal. Everything
is a pure function of the config seed and the emitted files are
byte-stable across runs.
"""
from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .market_data import DailyBar, StockSeries, save_stock_series
from .textpipe import (
    NewsDocument,
    SentimentLexicon,
    StopwordLexicon,
    save_news_jsonl,
    save_sentiment_lexicon,
    save_stopwords,
)

BASE_PRICE = 10.0
SCORE_LEVELS = tuple(v / 2.0 for v in list(range(-10, 0)) + list(range(1, 11)))
TERMS_PER_LEVEL = 3
STOPWORD_COUNT = 8
UNKNOWN_TERM_COUNT = 5
SEPARATOR = "。"  # ideographic full stop; never matches a lexicon term
_CHAR_BASE = 0x4E00


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    num_days: int
    num_sources: int = 20
    source_coefficients: tuple[float, ...] | None = None  # None: log-spaced magnitudes, mixed signs
    noise_std: float = 0.001
    no_news_probability: float = 0.1
    num_stocks: int = 1
    start: dt.date = dt.date(2018, 1, 2)

    def __post_init__(self):
        if self.num_days < 40:
            raise ValidationError(f"num_days must be >= 40, got {self.num_days}")
        if self.num_sources < 1 or self.num_stocks < 1:
            raise ValidationError("need at least one source and one stock")
        if not 0 <= self.no_news_probability < 1:
            raise ValidationError("no_news_probability must be in [0, 1)")
        if self.noise_std < 0:
            raise ValidationError("noise_std must be >= 0")
        if self.source_coefficients is not None:
            if len(self.source_coefficients) != self.num_sources:
                raise ValidationError("one coefficient per source required")
            if not all(math.isfinite(w) for w in self.source_coefficients):
                raise ValidationError("coefficients must be finite")


@dataclass(frozen=True)
class SynthOutput:
    news_path: Path
    stock_paths: tuple[Path, ...]
    sentiment_path: Path
    stopword_path: Path
    truth_path: Path
    coefficients: tuple[float, ...]
    sources: tuple[str, ...]
    stock_ids: tuple[str, ...]


def default_coefficients(num_sources: int, rng: np.random.Generator) -> tuple[float, ...]:
    """Magnitudes log-spaced over one order of magnitude, signs alternating, order shuffled."""
    mags = np.logspace(-4, -3, num_sources)
    signs = np.where(np.arange(num_sources) % 2 == 0, 1.0, -1.0)
    w = mags * signs
    rng.shuffle(w)
    return tuple(float(v) for v in w)


def _vocabulary():
    """Deterministic two-character terms; characters never repeat across terms."""
    counter = 0

    def next_term():
        nonlocal counter
        term = chr(_CHAR_BASE + 2 * counter) + chr(_CHAR_BASE + 2 * counter + 1)
        counter += 1
        return term

    by_level = {level: [next_term() for _ in range(TERMS_PER_LEVEL)] for level in SCORE_LEVELS}
    stop_terms = [next_term() for _ in range(STOPWORD_COUNT)]
    unknown_terms = [next_term() for _ in range(UNKNOWN_TERM_COUNT)]
    return by_level, stop_terms, unknown_terms


def trading_dates(start: dt.date, count: int) -> list[dt.date]:
    """The first ``count`` weekdays from ``start`` on."""
    out = []
    day = start
    while len(out) < count:
        if day.weekday() < 5:
            out.append(day)
        day += dt.timedelta(days=1)
    return out


def _quantize_sentiment(raw: float) -> float:
    """Nearest half-point level in [-5, +5], never 0."""
    level = round(raw * 2.0) / 2.0
    if level == 0.0:
        level = 0.5 if raw >= 0 else -0.5
    return float(min(max(level, -5.0), 5.0))


def generate(config: SynthConfig, out_dir: str | Path) -> SynthOutput:
    """Write news.jsonl, one stock CSV per stock, the true lexicons, and truth.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(config.seed)

    w = config.source_coefficients or default_coefficients(config.num_sources, rng)
    sources = tuple(f"src{j + 1:02d}" for j in range(config.num_sources))
    dates = trading_dates(config.start, config.num_days)

    by_level, stop_terms, unknown_terms = _vocabulary()
    sentiment_entries = {t: level for level, terms in by_level.items() for t in terms}

    # planted per-day, per-source sentiment on the half-point grid
    s = np.empty((config.num_days, config.num_sources))
    for t in range(config.num_days):
        for j in range(config.num_sources):
            s[t, j] = _quantize_sentiment(float(rng.uniform(-5.0, 5.0)))
    no_news = rng.random(config.num_days) < config.no_news_probability

    docs: list[NewsDocument] = []
    for t, date in enumerate(dates):
        if no_news[t]:
            continue
        for j, source in enumerate(sources):
            for _ in range(int(rng.integers(1, 4))):
                terms = [str(v) for v in rng.choice(by_level[float(s[t, j])], size=int(rng.integers(3, 9)))]
                if rng.random() < 0.4:
                    terms.insert(int(rng.integers(0, len(terms) + 1)), str(rng.choice(stop_terms)))
                if rng.random() < 0.25:
                    terms.insert(int(rng.integers(0, len(terms) + 1)), str(rng.choice(unknown_terms)))
                docs.append(NewsDocument(date=date, source_id=source, text=SEPARATOR.join(terms)))

    stock_ids = tuple(f"60{k + 1:04d}" for k in range(config.num_stocks))
    stock_paths = []
    totals = []
    w_arr = np.asarray(w)
    for stock_id in stock_ids:
        noise = rng.normal(0.0, config.noise_std, size=config.num_days)
        adj = np.empty(config.num_days)
        adj[0] = BASE_PRICE
        for t in range(1, config.num_days):
            r = float(w_arr @ s[t - 1]) + noise[t]
            adj[t] = adj[t - 1] * math.exp(r)
        etas = rng.uniform(0.0, 0.005, size=config.num_days)
        volumes = rng.integers(100_000, 1_000_000, size=config.num_days)
        bars = []
        for t, date in enumerate(dates):
            close = float(adj[t])
            opn = float(adj[t - 1]) if t > 0 else close
            bars.append(DailyBar(
                date=date,
                open=opn,
                high=float(max(opn, close) * (1.0 + etas[t])),
                low=float(min(opn, close) * (1.0 - etas[t])),
                close=close,
                adj_close=close,
                volume=int(volumes[t]),
            ))
        series = StockSeries(stock_id=stock_id, bars=tuple(bars))
        path = out_dir / f"stock_{stock_id}.csv"
        save_stock_series(series, path)
        stock_paths.append(path)
        totals.append(series.total_volume)

    news_path = out_dir / "news.jsonl"
    save_news_jsonl(docs, news_path)
    sentiment_path = out_dir / "sentiment.tsv"
    save_sentiment_lexicon(SentimentLexicon(entries=sentiment_entries), sentiment_path)
    stopword_path = out_dir / "stopwords.txt"
    save_stopwords(StopwordLexicon(terms=frozenset(stop_terms)), stopword_path)

    truth = {
        "seed": config.seed,
        "num_days": config.num_days,
        "start": config.start.isoformat(),
        "sources": list(sources),
        "coefficients": list(w),
        "noise_std": config.noise_std,
        "no_news_probability": config.no_news_probability,
        "dates": [d.isoformat() for d in dates],
        "sentiment": [[float(v) for v in row] for row in s],
        "no_news_days": [dates[t].isoformat() for t in range(config.num_days) if no_news[t]],
        "stocks": [
            {"stock_id": sid, "file": p.name, "total_volume": int(v)}
            for sid, p, v in zip(stock_ids, stock_paths, totals)
        ],
        "vocabulary": sentiment_entries,
        "stopwords": sorted(stop_terms),
        "unknown_terms": sorted(unknown_terms),
    }
    truth_path = out_dir / "truth.json"
    truth_path.write_text(json.dumps(truth, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
                          encoding="utf-8")
    return SynthOutput(
        news_path=news_path,
        stock_paths=tuple(stock_paths),
        sentiment_path=sentiment_path,
        stopword_path=stopword_path,
        truth_path=truth_path,
        coefficients=tuple(w),
        sources=sources,
        stock_ids=stock_ids,
    )
