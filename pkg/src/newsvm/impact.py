"""Per-source impact factors from prediction perturbation.

For each stock the probe is the fifth assembled row (date order). Adding
a fixed delta to one raw news node, rescaling with the model's stored
training scaler, and re-predicting gives the perturbed price p_ij; the
impact entry is the relative displacement (p_ij - p_i0) / p_i0. Source
weights aggregate the impact column across stocks weighted by each
stock's total traded volume, and are min-max normalized onto [0, 100]
for reporting (the ranking is what carries meaning).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .features import Dataset, scale_features
from .svm import SvmModel, predict_price

PROBE_ROW = 4  # fifth row, date order
DEFAULT_DELTA = 100.0


@dataclass(frozen=True)
class ImpactMatrix:
    stock_ids: tuple[str, ...]
    source_count: int
    m: np.ndarray               # (stocks, sources) relative displacements
    base_predictions: np.ndarray
    perturbed: np.ndarray       # (stocks, sources) perturbed prices
    excluded: tuple[tuple[str, str], ...]  # (stock_id, reason)


@dataclass(frozen=True)
class SourceWeights:
    z: np.ndarray               # volume-weighted aggregate per source
    volumes: np.ndarray
    normalized: np.ndarray      # min-max mapped onto [0, 100]
    ranking: tuple[int, ...]    # source indices, heaviest first
    degenerate: bool


def impact_matrix(models: Sequence[SvmModel], datasets: Sequence[Dataset],
                  stock_ids: Sequence[str], delta: float = DEFAULT_DELTA) -> ImpactMatrix:
    """Perturb each news node of each stock's probe row and measure displacement."""
    if not (len(models) == len(datasets) == len(stock_ids)):
        raise ValidationError("models, datasets and stock_ids must align")
    if not models:
        raise ValidationError("need at least one stock")
    source_count = datasets[0].layout.num_sources
    rows_m, rows_pert, base, kept, excluded = [], [], [], [], []
    for model, dataset, sid in zip(models, datasets, stock_ids):
        if dataset.layout.num_sources != source_count:
            raise ValidationError(f"{sid}: source count differs across stocks")
        if model.scaler is None:
            raise ValidationError(f"{sid}: model has no scaler")
        if len(dataset) < PROBE_ROW + 1:
            excluded.append((sid, "fewer than 5 rows"))
            continue
        raw = np.asarray(dataset.rows[PROBE_ROW].x, dtype=float)
        p0 = float(predict_price(model, scale_features(model.scaler, raw)))
        if p0 == 0.0:
            warnings.warn(f"{sid}: base prediction is zero; stock excluded", UserWarning, stacklevel=2)
            excluded.append((sid, "zero base prediction"))
            continue
        perturbed = np.empty(source_count)
        for j in range(source_count):
            bumped = raw.copy()
            bumped[j] += delta
            perturbed[j] = float(predict_price(model, scale_features(model.scaler, bumped)))
        rows_m.append((perturbed - p0) / p0)
        rows_pert.append(perturbed)
        base.append(p0)
        kept.append(sid)
    if not kept:
        raise ValidationError("all stocks were excluded")
    return ImpactMatrix(
        stock_ids=tuple(kept),
        source_count=source_count,
        m=np.array(rows_m),
        base_predictions=np.array(base),
        perturbed=np.array(rows_pert),
        excluded=tuple(excluded),
    )


def source_weights(impact: ImpactMatrix, volumes: Sequence[float]) -> SourceWeights:
    """Z_j = sum_i M_ij * V_i, with rank-preserving min-max reporting normalization."""
    v = np.asarray(volumes, dtype=float)
    if v.shape != (len(impact.stock_ids),):
        raise ValidationError("one volume per included stock required")
    if np.any(v <= 0):
        raise ValidationError("volumes must be positive")
    z = impact.m.T @ v
    spread = float(z.max() - z.min())
    degenerate = spread == 0.0
    normalized = np.zeros_like(z) if degenerate else (z - z.min()) / spread * 100.0
    order = sorted(range(len(z)), key=lambda j: (-z[j], j))
    return SourceWeights(z=z, volumes=v, normalized=normalized,
                         ranking=tuple(order), degenerate=degenerate)


# --- reports -----------------------------------------------------------------

IMPACT_REPORT_SCHEMA = "# newsvm impact report v1"
MATRIX_REPORT_SCHEMA = "# newsvm impact matrix v1"


def save_weights_csv(weights: SourceWeights, source_ids: Sequence[str], path: str | Path) -> None:
    if len(source_ids) != len(weights.z):
        raise ValidationError("one source id per weight required")
    rank_of = {j: r + 1 for r, j in enumerate(weights.ranking)}
    lines = [IMPACT_REPORT_SCHEMA, "source_id,z_raw,z_normalized,rank"]
    for j, sid in enumerate(source_ids):
        lines.append(f"{sid},{weights.z[j]!r},{weights.normalized[j]!r},{rank_of[j]}")
    if weights.degenerate:
        lines.append("# degenerate: all impacts zero, weights are flat")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_matrix_csv(impact: ImpactMatrix, source_ids: Sequence[str], path: str | Path) -> None:
    lines = [MATRIX_REPORT_SCHEMA, "stock_id,base_prediction," + ",".join(source_ids)]
    for i, sid in enumerate(impact.stock_ids):
        cells = ",".join(repr(float(v)) for v in impact.m[i])
        lines.append(f"{sid},{impact.base_predictions[i]!r},{cells}")
    for sid, reason in impact.excluded:
        lines.append(f"# excluded: {sid} ({reason})")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
