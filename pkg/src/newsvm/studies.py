"""End-to-end pipeline and the two contrast studies.

run_pipeline wires ingestion -> featurization -> split/scale -> training
-> evaluation and persists the model. The lag study sweeps the stock lag
and compares with-news against stock-only inputs; the expansion study
compares the zero-filled expanded view against the compact one. Study
cells that fail keep the run alive and are marked in the report.
"""
from __future__ import annotations

import datetime as dt
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import StageError, ValidationError
from .features import (
    Dataset,
    FeatureLayout,
    apply_scaler,
    assemble,
    fit_scaler,
    split_random,
    to_arrays,
)
from .kernels import KernelSpec
from .market_data import StockSeries, load_stock_series
from .metrics import Metrics, evaluate
from .param_search import DEFAULT_KERNEL_BY_MODE
from .svm import SvmModel, SvmParams, predict, save_model, train_svc, train_svr
from .textpipe import (
    DailySourceSignal,
    build_daily_signals,
    check_disjoint,
    load_news_jsonl,
    load_sentiment_lexicon,
    load_stopwords,
)


@contextmanager
def stage(name: str):
    """Label any failure inside the block with the pipeline stage that raised it."""
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, str(exc)) from exc


def default_params(mode: str, width: int, c: float | None = None, g: float | None = None,
                   epsilon: float = 0.1, degree: int = 3, coef0: float = 0.0,
                   kernel_kind: str | None = None, tolerance: float = 1e-3) -> SvmParams:
    """c defaults to 1 and g to 1/(X+Y), the conventional tool defaults."""
    kind = kernel_kind or DEFAULT_KERNEL_BY_MODE[mode]
    return SvmParams(
        C=1.0 if c is None else c,
        kernel=KernelSpec(kind, gamma=(1.0 / width) if g is None else g, coef0=coef0, degree=degree),
        epsilon=epsilon,
        tolerance=tolerance,
    )


def load_corpus_inputs(news_path, sentiment_path, stopword_path):
    """Load and cross-validate the text inputs; source list is the sorted corpus ids."""
    for label, p in (("news", news_path), ("sentiment lexicon", sentiment_path),
                     ("stop-word lexicon", stopword_path)):
        if not Path(p).exists():
            raise ValidationError(f"missing {label} file: {p}")
    docs = load_news_jsonl(news_path)
    sent = load_sentiment_lexicon(sentiment_path)
    stop = load_stopwords(stopword_path)
    check_disjoint(sent, stop)
    sources = tuple(sorted({d.source_id for d in docs}))
    if not sources:
        raise ValidationError(f"news corpus {news_path} has no documents")
    return docs, sent, stop, sources


def featurize(news_path, stock_path, sentiment_path, stopword_path,
              lag: int = 10, news_window: int = 1) -> tuple[Dataset, Dataset, StockSeries]:
    """File inputs to (expanded, compact) datasets for one stock."""
    docs, sent, stop, sources = load_corpus_inputs(news_path, sentiment_path, stopword_path)
    series = load_stock_series(stock_path)
    signals = build_daily_signals(docs, sources, sent, stop)
    layout = FeatureLayout(num_sources=len(sources), lag=lag)
    expanded, compact = assemble(series, signals, layout, news_window=news_window)
    return expanded, compact, series


def train_on_dataset(dataset: Dataset, mode: str, params: SvmParams,
                     seed: int = 0, train_fraction: float = 0.8):
    """Split, scale on the training side, train, and evaluate held-out rows."""
    train, test = split_random(dataset, train_fraction, seed)
    scaler = fit_scaler(train.rows)
    xtr, ytr, ptr = to_arrays(apply_scaler(scaler, train.rows))
    xte, yte, pte = to_arrays(apply_scaler(scaler, test.rows))
    if mode == "svc":
        model = train_svc(xtr, ytr, params, scaler=scaler)
        metrics = evaluate(predict(model, xte), yte, "svc")
    elif mode == "svr":
        model = train_svr(xtr, ptr, params, scaler=scaler)
        metrics = evaluate(predict(model, xte), pte, "svr")
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    return model, metrics


@dataclass(frozen=True)
class PipelineResult:
    model_path: Path
    metrics_path: Path
    metrics: Metrics
    rows_train: int
    rows_test: int


METRICS_REPORT_SCHEMA = "# newsvm metrics report v1"


def save_metrics_csv(metrics: Metrics, mode: str, path: str | Path) -> None:
    if mode == "svc":
        lines = [METRICS_REPORT_SCHEMA, "mode,acc", f"svc,{metrics.acc!r}"]
    else:
        lines = [METRICS_REPORT_SCHEMA, "mode,mse,scc",
                 f"svr,{metrics.mse!r},{metrics.scc!r}"]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_pipeline(news_path, stock_path, sentiment_path, stopword_path, out_dir,
                 mode: str = "svc", lag: int = 10, news_window: int = 1,
                 expand: bool = True, c: float | None = None, g: float | None = None,
                 epsilon: float = 0.1, kernel_kind: str | None = None,
                 seed: int = 0, train_fraction: float = 0.8) -> PipelineResult:
    """The full collect -> preprocess -> train -> evaluate pass; persists model + report."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with stage("featurize"):
        expanded, compact, _ = featurize(news_path, stock_path, sentiment_path, stopword_path,
                                         lag=lag, news_window=news_window)
        dataset = expanded if expand else compact
        params = default_params(mode, dataset.layout.width, c=c, g=g,
                                epsilon=epsilon, kernel_kind=kernel_kind)
    with stage("train"):
        model, metrics = train_on_dataset(dataset, mode, params, seed=seed,
                                          train_fraction=train_fraction)
    with stage("persist"):
        model_path = out_dir / f"model_{mode}.txt"
        save_model(model, model_path)
        metrics_path = out_dir / f"metrics_{mode}.csv"
        save_metrics_csv(metrics, mode, metrics_path)
    n = len(dataset)
    n_test = max(1, int(n * (1 - train_fraction)))
    return PipelineResult(model_path=model_path, metrics_path=metrics_path, metrics=metrics,
                          rows_train=n - n_test, rows_test=n_test)


# --- lag study ----------------------------------------------------------------

@dataclass(frozen=True)
class StudyCell:
    lag: int
    variant: str    # "with-news" or "stock-only"
    mode: str
    metrics: Metrics | None
    converged: bool
    error: str | None = None


def _eval_variant(dataset: Dataset, variant: str, mode: str, params: SvmParams,
                  seed: int, train_fraction: float) -> tuple[Metrics, bool]:
    train, test = split_random(dataset, train_fraction, seed)
    x_count = dataset.layout.num_sources
    xtr_full, ytr, ptr_raw = to_arrays(train.rows)
    xte_full, yte, pte_raw = to_arrays(test.rows)
    if variant == "stock-only":
        xtr_full = xtr_full[:, x_count:]
        xte_full = xte_full[:, x_count:]
    mean, std = xtr_full.mean(axis=0), xtr_full.std(axis=0)
    std = np.where(std == 0, 1.0, std)
    xtr = (xtr_full - mean) / std
    xte = (xte_full - mean) / std
    pm, ps = ptr_raw.mean(), ptr_raw.std()
    ps = ps if ps > 0 else 1.0
    if mode == "svc":
        model = train_svc(xtr, ytr, params)
        return evaluate(predict(model, xte), yte, "svc"), model.converged
    model = train_svr(xtr, (ptr_raw - pm) / ps, params)
    return evaluate(predict(model, xte), (pte_raw - pm) / ps, "svr"), model.converged


def run_lag_study(series: StockSeries, signals: Mapping[dt.date, DailySourceSignal],
                  num_sources: int, lags: Sequence[int] = tuple(range(1, 21)),
                  modes: Sequence[str] = ("svc", "svr"), news_window: int = 1,
                  c: float | None = None, g: float | None = None, epsilon: float = 0.1,
                  seed: int = 0, train_fraction: float = 0.8) -> list[StudyCell]:
    """Metric-vs-lag table over with-news and stock-only inputs."""
    cells = []
    for lag in lags:
        layout = FeatureLayout(num_sources=num_sources, lag=lag)
        try:
            expanded, _ = assemble(series, signals, layout, news_window=news_window)
        except Exception as exc:
            for mode in modes:
                for variant in ("with-news", "stock-only"):
                    cells.append(StudyCell(lag, variant, mode, None, False, str(exc)))
            continue
        for mode in modes:
            for variant in ("with-news", "stock-only"):
                width = layout.width if variant == "with-news" else lag
                params = default_params(mode, width, c=c, g=g, epsilon=epsilon)
                try:
                    metrics, converged = _eval_variant(expanded, variant, mode, params,
                                                       seed, train_fraction)
                    cells.append(StudyCell(lag, variant, mode, metrics, converged))
                except Exception as exc:
                    cells.append(StudyCell(lag, variant, mode, None, False, str(exc)))
    return cells


LAG_REPORT_SCHEMA = "# newsvm lag-study report v1"


def save_lag_report(cells: Sequence[StudyCell], path: str | Path) -> None:
    lines = [LAG_REPORT_SCHEMA, "lag,variant,mode,acc,mse,scc,converged,error"]
    for cell in cells:
        m = cell.metrics
        acc = "" if m is None or m.acc is None else repr(m.acc)
        mse = "" if m is None or m.mse is None else repr(m.mse)
        scc = "" if m is None or m.scc is None else repr(m.scc)
        err = cell.error or ""
        lines.append(f"{cell.lag},{cell.variant},{cell.mode},{acc},{mse},{scc},{int(cell.converged)},{err}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# --- expansion study ------------------------------------------------------------

@dataclass(frozen=True)
class ExpansionCell:
    variant: str    # "expanded" or "compact"
    mode: str
    rows: int
    metrics: Metrics | None
    converged: bool
    error: str | None = None


def run_expansion_study(expanded: Dataset, compact: Dataset,
                        modes: Sequence[str] = ("svc", "svr"),
                        c: float | None = None, g: float | None = None, epsilon: float = 0.1,
                        seed: int = 0, train_fraction: float = 0.8) -> tuple[list[ExpansionCell], bool]:
    """Paired metrics for the expanded vs compact views; flags the degenerate case."""
    degenerate = len(expanded) == len(compact)
    cells = []
    for variant, dataset in (("expanded", expanded), ("compact", compact)):
        for mode in modes:
            params = default_params(mode, dataset.layout.width, c=c, g=g, epsilon=epsilon)
            try:
                model, metrics = train_on_dataset(dataset, mode, params, seed=seed,
                                                  train_fraction=train_fraction)
                cells.append(ExpansionCell(variant, mode, len(dataset), metrics, model.converged))
            except Exception as exc:
                cells.append(ExpansionCell(variant, mode, len(dataset), None, False, str(exc)))
    return cells, degenerate


EXPANSION_REPORT_SCHEMA = "# newsvm expansion-study report v1"


def save_expansion_report(cells: Sequence[ExpansionCell], degenerate: bool, path: str | Path) -> None:
    lines = [EXPANSION_REPORT_SCHEMA, "variant,mode,rows,acc,mse,scc,converged,error"]
    for cell in cells:
        m = cell.metrics
        acc = "" if m is None or m.acc is None else repr(m.acc)
        mse = "" if m is None or m.mse is None else repr(m.mse)
        scc = "" if m is None or m.scc is None else repr(m.scc)
        err = cell.error or ""
        lines.append(f"{cell.variant},{cell.mode},{cell.rows},{acc},{mse},{scc},{int(cell.converged)},{err}")
    if degenerate:
        lines.append("# degenerate: no no-news days, the two views are identical")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
