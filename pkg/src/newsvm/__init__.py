"""News-sentiment stock forecasting toolkit.

Converts a news corpus plus daily price history into feature vectors,
trains support vector models (C-SVC with a polynomial kernel for
tendency, epsilon-SVR with a sigmoid kernel for price), searches (c, g)
by exhaustive traverse or per-split approximation, and ranks news
sources by perturbation-based impact factors.
"""

__version__ = "0.1.0"

from .errors import NewsvmError, ParseError, StageError, ValidationError
from .features import (
    Dataset,
    FeatureLayout,
    FeatureVector,
    ScalingParams,
    apply_scaler,
    assemble,
    fit_scaler,
    load_dataset_csv,
    save_dataset_csv,
    split_random,
    to_arrays,
)
from .impact import ImpactMatrix, SourceWeights, impact_matrix, source_weights
from .kernels import KernelSpec, kernel_eval, kernel_matrix
from .market_data import (
    DailyBar,
    StockSeries,
    load_stock_series,
    save_stock_series,
    tendency_label,
)
from .metrics import Metrics, evaluate
from .oracle import brute_force_dual
from .param_search import (
    ApproxResult,
    Grid,
    SearchResult,
    approximate_search,
    traverse_search,
)
from .svm import (
    SvmModel,
    SvmParams,
    decision_function,
    load_model,
    predict,
    predict_price,
    save_model,
    train_svc,
    train_svr,
)
from .synth import SynthConfig, generate
from .textpipe import (
    DailySourceSignal,
    NewsDocument,
    SentimentLexicon,
    StopwordLexicon,
    aggregate_daily,
    build_daily_signals,
    lexicon_iteration,
    load_news_jsonl,
    score_document,
    segment,
)

__all__ = [name for name in dir() if not name.startswith("_")]
