"""Evaluation metrics: accuracy, mean squared error, squared correlation.

SCC is the squared Pearson correlation between predictions and truths;
a constant vector on either side makes it undefined, reported as 0 with
the degenerate flag set.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Metrics:
    acc: float | None = None
    mse: float | None = None
    scc: float | None = None
    degenerate_scc: bool = False


def evaluate(predictions, truths, mode: str) -> Metrics:
    """ACC for svc mode; MSE and SCC for svr mode."""
    pred = np.asarray(predictions, dtype=float)
    true = np.asarray(truths, dtype=float)
    if pred.shape != true.shape or pred.ndim != 1 or pred.size == 0:
        raise ValidationError("predictions and truths must be equal-length nonempty vectors")
    if mode == "svc":
        return Metrics(acc=float(np.mean(pred == true)))
    if mode == "svr":
        mse = float(np.mean((pred - true) ** 2))
        scc, degenerate = squared_correlation(pred, true)
        return Metrics(mse=mse, scc=scc, degenerate_scc=degenerate)
    raise ValidationError(f"unknown mode {mode!r}")


def squared_correlation(pred: np.ndarray, true: np.ndarray) -> tuple[float, bool]:
    """Squared Pearson r, computed in centered form for stability."""
    dp = pred - pred.mean()
    dt = true - true.mean()
    denom = float(dp @ dp) * float(dt @ dt)
    if denom <= 0:
        return 0.0, True
    r = float(dp @ dt) ** 2 / denom
    return min(r, 1.0), False
