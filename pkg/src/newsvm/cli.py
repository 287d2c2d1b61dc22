"""Command-line entry point.

Subcommands: synth, build-dict, featurize, train, predict, grid-search,
approx-search, lag-study, expansion-study, impact. Every subcommand is
deterministic given --seed and its input files; failures exit nonzero
with a stage-labeled message.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import features, impact as impact_mod, param_search, studies, synth, textpipe
from .errors import NewsvmError, StageError
from .market_data import load_stock_series
from .studies import stage
from .svm import load_model, predict, predict_price, decision_function


def _add_corpus_args(sp, stock=True):
    sp.add_argument("--news", required=True, help="news corpus JSONL")
    if stock:
        sp.add_argument("--stock", required=True, help="stock CSV")
    sp.add_argument("--sentiment", required=True, help="sentiment lexicon TSV")
    sp.add_argument("--stopwords", required=True, help="stop-word list")


def _add_model_args(sp):
    sp.add_argument("--mode", choices=("svc", "svr"), default="svc")
    sp.add_argument("--c", type=float, default=None, help="cost parameter (default 1)")
    sp.add_argument("--g", type=float, default=None, help="kernel gamma (default 1/(X+Y))")
    sp.add_argument("--epsilon", type=float, default=0.1, help="svr tube width")
    sp.add_argument("--kernel", choices=("polynomial", "sigmoid"), default=None,
                    help="override the mode's default kernel")


def _add_layout_args(sp):
    sp.add_argument("--lag", type=int, default=10, help="stock lag Y")
    sp.add_argument("--news-window", type=int, default=1, help="days of news summed per row")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="newsvm",
                                     description="News-sentiment stock forecasting toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a seeded synthetic corpus and price files")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--days", type=int, default=250)
    sp.add_argument("--sources", type=int, default=20)
    sp.add_argument("--stocks", type=int, default=1)
    sp.add_argument("--noise-std", type=float, default=0.001)
    sp.add_argument("--no-news-prob", type=float, default=0.1)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("build-dict", help="one round of the lexicon build loop")
    sp.add_argument("--news", required=True)
    sp.add_argument("--sentiment", default=None, help="existing sentiment lexicon TSV")
    sp.add_argument("--stopwords", default=None, help="existing stop-word list")
    sp.add_argument("--scores", default=None, help="scored candidates from the external step")
    sp.add_argument("--top", type=int, default=textpipe.DEFAULT_CANDIDATE_COUNT)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("featurize", help="build the featurized dataset CSV for one stock")
    _add_corpus_args(sp)
    _add_layout_args(sp)
    expand = sp.add_mutually_exclusive_group()
    expand.add_argument("--expand", dest="expand", action="store_true", default=True)
    expand.add_argument("--no-expand", dest="expand", action="store_false")
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("train", help="train a model end to end and report held-out metrics")
    _add_corpus_args(sp)
    _add_layout_args(sp)
    _add_model_args(sp)
    expand = sp.add_mutually_exclusive_group()
    expand.add_argument("--expand", dest="expand", action="store_true", default=True)
    expand.add_argument("--no-expand", dest="expand", action="store_false")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--train-frac", type=float, default=0.8)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("predict", help="apply a saved model to a featurized CSV")
    sp.add_argument("--model", required=True)
    sp.add_argument("--data", required=True, help="featurized dataset CSV (raw values)")
    sp.add_argument("--num-sources", type=int, default=20)
    sp.add_argument("--out", required=True)

    for name in ("grid-search", "approx-search"):
        sp = sub.add_parser(name, help=f"{name.replace('-', ' ')} over (c, g)")
        sp.add_argument("--data", required=True, help="featurized dataset CSV")
        sp.add_argument("--num-sources", type=int, default=20)
        sp.add_argument("--mode", choices=("svc", "svr"), default="svc")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--epsilon", type=float, default=0.1)
        sp.add_argument("--kernel", choices=("polynomial", "sigmoid"), default=None)
        sp.add_argument("--c-min", type=float, default=1.0)
        sp.add_argument("--c-max", type=float, default=25.0)
        sp.add_argument("--c-step", type=float, default=1.0)
        sp.add_argument("--g-min", type=float, default=0.01)
        sp.add_argument("--g-max", type=float, default=0.30)
        sp.add_argument("--g-step", type=float, default=0.01)
        if name == "grid-search":
            sp.add_argument("--splits", type=int, default=10)
        else:
            sp.add_argument("--groups", type=int, default=50)
        sp.add_argument("--plots", action="store_true")
        sp.add_argument("--out", required=True)

    sp = sub.add_parser("lag-study", help="metric-vs-lag study, with-news vs stock-only")
    _add_corpus_args(sp)
    sp.add_argument("--mode", choices=("svc", "svr", "both"), default="both")
    sp.add_argument("--max-lag", type=int, default=20)
    sp.add_argument("--news-window", type=int, default=1)
    sp.add_argument("--c", type=float, default=None)
    sp.add_argument("--g", type=float, default=None)
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--plots", action="store_true")
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("expansion-study", help="expanded vs compact input comparison")
    _add_corpus_args(sp)
    _add_layout_args(sp)
    sp.add_argument("--mode", choices=("svc", "svr", "both"), default="both")
    sp.add_argument("--c", type=float, default=None)
    sp.add_argument("--g", type=float, default=None)
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("impact", help="per-source impact factors over a set of stocks")
    sp.add_argument("--news", required=True)
    sp.add_argument("--stock", action="append", required=True,
                    help="stock CSV; repeat for multiple stocks")
    sp.add_argument("--sentiment", required=True)
    sp.add_argument("--stopwords", required=True)
    _add_layout_args(sp)
    sp.add_argument("--c", type=float, default=None)
    sp.add_argument("--g", type=float, default=None)
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--delta", type=float, default=impact_mod.DEFAULT_DELTA)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)

    return parser


def _cmd_synth(args) -> int:
    config = synth.SynthConfig(
        seed=args.seed, num_days=args.days, num_sources=args.sources,
        num_stocks=args.stocks, noise_std=args.noise_std,
        no_news_probability=args.no_news_prob,
    )
    out = synth.generate(config, args.out)
    print(f"wrote {out.news_path}")
    for p in out.stock_paths:
        print(f"wrote {p}")
    print(f"wrote {out.sentiment_path}")
    print(f"wrote {out.stopword_path}")
    print(f"wrote {out.truth_path}")
    return 0


def _cmd_build_dict(args) -> int:
    with stage("load-inputs"):
        docs = textpipe.load_news_jsonl(args.news)
        sent = (textpipe.load_sentiment_lexicon(args.sentiment)
                if args.sentiment else textpipe.SentimentLexicon(entries={}))
        stop = (textpipe.load_stopwords(args.stopwords)
                if args.stopwords else textpipe.StopwordLexicon(terms=frozenset()))
        scores = textpipe.load_scores(args.scores) if args.scores else {}
    with stage("iterate"):
        result = textpipe.lexicon_iteration(
            (d.text for d in docs), sent, stop, scores, candidate_count=args.top)
    with stage("persist"):
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        textpipe.save_sentiment_lexicon(result.sentiment, out_dir / "sentiment.tsv")
        textpipe.save_stopwords(result.stopwords, out_dir / "stopwords.txt")
        textpipe.save_candidates(result.candidates, out_dir / "candidates.tsv")
    print(f"coverage_fraction {result.coverage_fraction!r}")
    print(f"candidates {len(result.candidates)}")
    print(f"sentiment_terms {len(result.sentiment)}")
    print(f"stop_terms {len(result.stopwords)}")
    return 0


def _cmd_featurize(args) -> int:
    with stage("featurize"):
        expanded, compact, _ = studies.featurize(
            args.news, args.stock, args.sentiment, args.stopwords,
            lag=args.lag, news_window=args.news_window)
        dataset = expanded if args.expand else compact
    with stage("persist"):
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        features.save_dataset_csv(dataset, out)
    print(f"wrote {out} ({len(dataset)} rows, width {dataset.layout.width})")
    return 0


def _cmd_train(args) -> int:
    result = studies.run_pipeline(
        args.news, args.stock, args.sentiment, args.stopwords, args.out,
        mode=args.mode, lag=args.lag, news_window=args.news_window, expand=args.expand,
        c=args.c, g=args.g, epsilon=args.epsilon, kernel_kind=args.kernel,
        seed=args.seed, train_fraction=args.train_frac)
    print(f"wrote {result.model_path}")
    print(f"wrote {result.metrics_path}")
    if args.mode == "svc":
        print(f"acc {result.metrics.acc!r}")
    else:
        print(f"mse {result.metrics.mse!r}")
        print(f"scc {result.metrics.scc!r}")
    return 0


def _cmd_predict(args) -> int:
    with stage("load-inputs"):
        model = load_model(args.model)
        dataset = features.load_dataset_csv(args.data, num_sources=args.num_sources)
        if model.scaler is None:
            raise NewsvmError("model carries no scaler")
    with stage("predict"):
        x, _, _ = features.to_arrays(dataset.rows)
        z = features.scale_features(model.scaler, x)
        lines = []
        if model.mode == "svc":
            lines.append("date,prediction")
            for row, label in zip(dataset.rows, predict(model, z)):
                lines.append(f"{row.date.isoformat()},{int(label)}")
        else:
            lines.append("date,decision_value,price")
            values = decision_function(model, z)
            prices = predict_price(model, z)
            for row, val, price in zip(dataset.rows, values, prices):
                lines.append(f"{row.date.isoformat()},{float(val)!r},{float(price)!r}")
    with stage("persist"):
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out} ({len(dataset)} predictions)")
    return 0


def _grid_from_args(args) -> param_search.Grid:
    return param_search.Grid(c_min=args.c_min, c_max=args.c_max, c_step=args.c_step,
                             g_min=args.g_min, g_max=args.g_max, g_step=args.g_step)


def _cmd_grid_search(args) -> int:
    with stage("load-inputs"):
        dataset = features.load_dataset_csv(args.data, num_sources=args.num_sources)
        grid = _grid_from_args(args)
    with stage("search"):
        result = param_search.traverse_search(
            dataset, grid, args.mode, args.seed, splits=args.splits,
            epsilon=args.epsilon, kernel_kind=args.kernel)
    with stage("persist"):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report = out / f"grid_{args.mode}.csv"
        param_search.save_search_report(result, report)
        if args.plots:
            from .plots import save_search_heatmap
            save_search_heatmap(result, out / f"grid_{args.mode}.png")
    print(f"wrote {report}")
    print(f"best c {result.best[0]!r}")
    print(f"best g {result.best[1]!r}")
    return 0


def _cmd_approx_search(args) -> int:
    with stage("load-inputs"):
        dataset = features.load_dataset_csv(args.data, num_sources=args.num_sources)
        grid = _grid_from_args(args)
    with stage("search"):
        result = param_search.approximate_search(
            dataset, grid, args.mode, args.seed, groups=args.groups,
            epsilon=args.epsilon, kernel_kind=args.kernel)
    with stage("persist"):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report = out / f"approx_{args.mode}.csv"
        param_search.save_approx_report(result, report)
        if args.plots:
            from .plots import save_approx_scatter
            save_approx_scatter(result, None, out / f"approx_{args.mode}.png")
    print(f"wrote {report}")
    print(f"aggregate c {result.aggregate[0]!r}")
    print(f"aggregate g {result.aggregate[1]!r}")
    return 0


def _cmd_lag_study(args) -> int:
    with stage("load-inputs"):
        docs, sent, stop, sources = studies.load_corpus_inputs(
            args.news, args.sentiment, args.stopwords)
        series = load_stock_series(args.stock)
        signals = textpipe.build_daily_signals(docs, sources, sent, stop)
        modes = ("svc", "svr") if args.mode == "both" else (args.mode,)
    with stage("study"):
        cells = studies.run_lag_study(
            series, signals, len(sources), lags=tuple(range(1, args.max_lag + 1)),
            modes=modes, news_window=args.news_window, c=args.c, g=args.g,
            epsilon=args.epsilon, seed=args.seed)
    with stage("persist"):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report = out / "lag_study.csv"
        studies.save_lag_report(cells, report)
        if args.plots:
            from .plots import save_lag_curves
            save_lag_curves(cells, out / "lag_study.png")
    print(f"wrote {report} ({len(cells)} cells)")
    return 0


def _cmd_expansion_study(args) -> int:
    with stage("load-inputs"):
        expanded, compact, _ = studies.featurize(
            args.news, args.stock, args.sentiment, args.stopwords,
            lag=args.lag, news_window=args.news_window)
        modes = ("svc", "svr") if args.mode == "both" else (args.mode,)
    with stage("study"):
        cells, degenerate = studies.run_expansion_study(
            expanded, compact, modes=modes, c=args.c, g=args.g,
            epsilon=args.epsilon, seed=args.seed)
    with stage("persist"):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report = out / "expansion_study.csv"
        studies.save_expansion_report(cells, degenerate, report)
    print(f"wrote {report} ({len(cells)} cells)")
    if degenerate:
        print("degenerate comparison: corpus has no no-news days")
    return 0


def _cmd_impact(args) -> int:
    with stage("load-inputs"):
        docs, sent, stop, sources = studies.load_corpus_inputs(
            args.news, args.sentiment, args.stopwords)
        signals = textpipe.build_daily_signals(docs, sources, sent, stop)
        layout = features.FeatureLayout(num_sources=len(sources), lag=args.lag)
    models, datasets, stock_ids, volumes = [], [], [], []
    for stock_path in args.stock:
        with stage(f"train:{Path(stock_path).stem}"):
            series = load_stock_series(stock_path)
            expanded, _ = features.assemble(series, signals, layout,
                                            news_window=args.news_window)
            scaler = features.fit_scaler(expanded.rows)
            x, _, prices = features.to_arrays(features.apply_scaler(scaler, expanded.rows))
            params = studies.default_params("svr", layout.width, c=args.c, g=args.g,
                                            epsilon=args.epsilon)
            from .svm import train_svr
            models.append(train_svr(x, prices, params, scaler=scaler))
            datasets.append(expanded)
            stock_ids.append(series.stock_id)
            volumes.append(series.total_volume)
    with stage("impact"):
        matrix = impact_mod.impact_matrix(models, datasets, stock_ids, delta=args.delta)
        kept = {sid: vol for sid, vol in zip(stock_ids, volumes)}
        weights = impact_mod.source_weights(matrix, [kept[sid] for sid in matrix.stock_ids])
    with stage("persist"):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        impact_mod.save_matrix_csv(matrix, sources, out / "impact_matrix.csv")
        impact_mod.save_weights_csv(weights, sources, out / "source_weights.csv")
    print(f"wrote {out / 'impact_matrix.csv'}")
    print(f"wrote {out / 'source_weights.csv'}")
    top = weights.ranking[0]
    print(f"top source {sources[top]}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "build-dict": _cmd_build_dict,
    "featurize": _cmd_featurize,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "grid-search": _cmd_grid_search,
    "approx-search": _cmd_approx_search,
    "lag-study": _cmd_lag_study,
    "expansion-study": _cmd_expansion_study,
    "impact": _cmd_impact,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except StageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 1
    except NewsvmError as exc:
        print(f"error [{args.command}] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
