import datetime as dt

import numpy as np
import pytest

from newsvm.market_data import DailyBar, StockSeries
from newsvm.synth import SynthConfig, generate
from newsvm.textpipe import NewsDocument, SentimentLexicon, StopwordLexicon


def make_series(adj_closes, start=dt.date(2020, 1, 1), stock_id="600000", volume=1000):
    """Bars with open=high=low=close=adj_close on consecutive days."""
    bars = []
    for k, price in enumerate(adj_closes):
        d = start + dt.timedelta(days=k)
        bars.append(DailyBar(date=d, open=price, high=price, low=price, close=price,
                             adj_close=price, volume=volume))
    return StockSeries(stock_id=stock_id, bars=tuple(bars))


@pytest.fixture
def tiny_lexicons():
    sent = SentimentLexicon(entries={"涨停": 4.0, "下跌": -2.0, "利好": 3.0, "ab": 1.0, "abc": 2.0})
    stop = StopwordLexicon(terms=frozenset({"今日", "的"}))
    return sent, stop


def make_doc(text, date=dt.date(2020, 1, 6), source="src01"):
    return NewsDocument(date=date, source_id=source, text=text)


@pytest.fixture(scope="session")
def planted_search_pack(tmp_path_factory):
    """Small planted dataset shared by the search-related acceptance criteria."""
    out_dir = tmp_path_factory.mktemp("search_pack")
    config = SynthConfig(seed=5, num_days=130, num_sources=8, noise_std=0.0004,
                         no_news_probability=0.0)
    return generate(config, out_dir), config


@pytest.fixture(scope="session")
def planted_full_pack(tmp_path_factory):
    """500-day, 20-source dataset with roughly 10:1 signal-to-noise."""
    out_dir = tmp_path_factory.mktemp("full_pack")
    config = SynthConfig(seed=7, num_days=500, num_sources=20, noise_std=0.0006,
                         no_news_probability=0.1)
    return generate(config, out_dir), config


@pytest.fixture(scope="session")
def impact_pack(tmp_path_factory):
    """Five stocks sharing all-positive source coefficients spanning one decade."""
    out_dir = tmp_path_factory.mktemp("impact_pack")
    rng = np.random.default_rng(123)
    mags = np.logspace(-4, -3, 20)
    rng.shuffle(mags)
    config = SynthConfig(seed=11, num_days=220, num_sources=20, noise_std=0.0006,
                         no_news_probability=0.05, num_stocks=5,
                         source_coefficients=tuple(float(v) for v in mags))
    return generate(config, out_dir), config
