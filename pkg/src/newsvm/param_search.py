"""Hyperparameter search over (c, g): exhaustive traverse and the
per-split approximation.

The traverse draws a fixed set of seeded train/test splits up front and
reuses them for every grid cell, so cell comparisons see identical data;
each cell's metric is the split average (accuracy for classification,
MSE for regression). The approximate variant instead finds a local
optimum per split and aggregates the local optima coordinate-wise by
mode. Ties always resolve toward smaller g, then smaller c.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .features import Dataset, apply_scaler, fit_scaler, split_random, to_arrays
from .kernels import KernelSpec
from .metrics import Metrics, evaluate
from .svm import SvmParams, predict, train_svc, train_svr

DEFAULT_KERNEL_BY_MODE = {"svc": "polynomial", "svr": "sigmoid"}


@dataclass(frozen=True)
class Grid:
    c_min: float = 1.0
    c_max: float = 25.0
    c_step: float = 1.0
    g_min: float = 0.01
    g_max: float = 0.30
    g_step: float = 0.01

    def __post_init__(self):
        if not (self.c_min < self.c_max and self.g_min < self.g_max):
            raise ValidationError("grid bounds must satisfy lower < upper")
        if self.c_step <= 0 or self.g_step <= 0:
            raise ValidationError("grid steps must be positive")
        if self.g_min <= 0:
            raise ValidationError("g values must be positive")

    def c_values(self) -> tuple[float, ...]:
        return _axis(self.c_min, self.c_max, self.c_step)

    def g_values(self) -> tuple[float, ...]:
        return _axis(self.g_min, self.g_max, self.g_step)

    @property
    def cell_count(self) -> int:
        return len(self.c_values()) * len(self.g_values())


def _axis(lo: float, hi: float, step: float) -> tuple[float, ...]:
    lo, hi, step = float(lo), float(hi), float(step)
    count = int(round((hi - lo) / step)) + 1
    values = [round(lo + k * step, 10) for k in range(count)]
    return tuple(v for v in values if v <= hi + step * 1e-9)


@dataclass(frozen=True)
class CellResult:
    c: float
    g: float
    acc: float | None
    mse: float | None
    scc: float | None
    converged: bool


@dataclass(frozen=True)
class SearchResult:
    mode: str
    table: tuple[CellResult, ...]
    best: tuple[float, float]
    splits_used: int
    seed: int
    g_variance: float
    c_variance: float


@dataclass(frozen=True)
class ApproxResult:
    mode: str
    local_optima: tuple[tuple[float, float], ...]
    aggregate: tuple[float, float]
    groups: int
    seed: int


def make_split_seeds(seed: int, count: int) -> tuple[int, ...]:
    """The split seeds a search derives from its master seed (documented contract)."""
    return tuple(int(s) for s in np.random.SeedSequence(seed).generate_state(count))


def cell_params(c: float, g: float, mode: str, kernel_kind: str | None = None,
                epsilon: float = 0.1, degree: int = 3, coef0: float = 0.0,
                tolerance: float = 1e-3) -> SvmParams:
    kind = kernel_kind or DEFAULT_KERNEL_BY_MODE[mode]
    return SvmParams(C=c, kernel=KernelSpec(kind, gamma=g, coef0=coef0, degree=degree),
                     epsilon=epsilon, tolerance=tolerance)


def prepare_split(dataset: Dataset, split_seed: int, train_fraction: float = 0.8):
    """Split, fit the scaler on the training side, and return scaled arrays."""
    train, test = split_random(dataset, train_fraction, split_seed)
    scaler = fit_scaler(train.rows)
    xtr, ytr, ptr = to_arrays(apply_scaler(scaler, train.rows))
    xte, yte, pte = to_arrays(apply_scaler(scaler, test.rows))
    return (xtr, ytr, ptr), (xte, yte, pte)


def evaluate_cell(splits, c: float, g: float, mode: str, **param_kw) -> CellResult:
    """Train and evaluate one (c, g) cell on prepared splits; metrics are split means."""
    params = cell_params(c, g, mode, **param_kw)
    accs, mses, sccs = [], [], []
    converged = True
    for (xtr, ytr, ptr), (xte, yte, pte) in splits:
        if mode == "svc":
            model = train_svc(xtr, ytr, params)
            m = evaluate(predict(model, xte), yte, "svc")
        else:
            model = train_svr(xtr, ptr, params)
            m = evaluate(predict(model, xte), pte, "svr")
        converged &= model.converged
        if m.acc is not None:
            accs.append(m.acc)
        if m.mse is not None:
            mses.append(m.mse)
        if m.scc is not None:
            sccs.append(m.scc)
    return CellResult(
        c=c, g=g,
        acc=float(np.mean(accs)) if accs else None,
        mse=float(np.mean(mses)) if mses else None,
        scc=float(np.mean(sccs)) if sccs else None,
        converged=converged,
    )


def _cell_key(cell: CellResult, mode: str):
    """Sort key: better metric first, then smaller g, then smaller c."""
    metric = -cell.acc if mode == "svc" else cell.mse
    return (metric, cell.g, cell.c)


def _argbest(table, mode: str) -> tuple[float, float]:
    candidates = [cell for cell in table if cell.converged]
    if not candidates:
        raise ValidationError("no grid cell converged; cannot select a best cell")
    best = min(candidates, key=lambda cell: _cell_key(cell, mode))
    return (best.c, best.g)


def _level_variance(table, mode: str, axis: str) -> float:
    """Between-level variance of the cell metric across values of one grid axis."""
    levels: dict[float, list[float]] = {}
    for cell in table:
        if not cell.converged:
            continue
        metric = cell.acc if mode == "svc" else cell.mse
        levels.setdefault(getattr(cell, axis), []).append(metric)
    means = [float(np.mean(v)) for v in levels.values()]
    if len(means) < 2:
        return 0.0
    return float(np.var(means))


def traverse_search(dataset: Dataset, grid: Grid, mode: str, seed: int,
                    splits: int = 10, train_fraction: float = 0.8,
                    **param_kw) -> SearchResult:
    """Exhaustive grid search with metrics averaged over shared seeded splits."""
    if mode not in ("svc", "svr"):
        raise ValidationError(f"unknown mode {mode!r}")
    split_data = [prepare_split(dataset, s, train_fraction) for s in make_split_seeds(seed, splits)]
    table = []
    for g in grid.g_values():
        for c in grid.c_values():
            table.append(evaluate_cell(split_data, c, g, mode, **param_kw))
    table = tuple(table)
    return SearchResult(
        mode=mode,
        table=table,
        best=_argbest(table, mode),
        splits_used=splits,
        seed=seed,
        g_variance=_level_variance(table, mode, "g"),
        c_variance=_level_variance(table, mode, "c"),
    )


def approximate_search(dataset: Dataset, grid: Grid, mode: str, seed: int,
                       groups: int = 50, train_fraction: float = 0.8,
                       **param_kw) -> ApproxResult:
    """Per-split local optima aggregated coordinate-wise by mode."""
    if mode not in ("svc", "svr"):
        raise ValidationError(f"unknown mode {mode!r}")
    local = []
    for split_seed in make_split_seeds(seed, groups):
        split_data = [prepare_split(dataset, split_seed, train_fraction)]
        table = tuple(
            evaluate_cell(split_data, c, g, mode, **param_kw)
            for g in grid.g_values() for c in grid.c_values()
        )
        local.append(_argbest(table, mode))
    agg_c = _mode_smallest([c for c, _ in local])
    agg_g = _mode_smallest([g for _, g in local])
    return ApproxResult(mode=mode, local_optima=tuple(local), aggregate=(agg_c, agg_g),
                        groups=groups, seed=seed)


def _mode_smallest(values: list[float]) -> float:
    counts = Counter(values)
    top = max(counts.values())
    return min(v for v, n in counts.items() if n == top)


# --- reports -----------------------------------------------------------------

SEARCH_REPORT_SCHEMA = "# newsvm grid-search report v1"
APPROX_REPORT_SCHEMA = "# newsvm approx-search report v1"


def _fmt(value) -> str:
    return "" if value is None else repr(value)


def save_search_report(result: SearchResult, path: str | Path) -> None:
    lines = [
        SEARCH_REPORT_SCHEMA,
        f"# mode={result.mode} seed={result.seed} splits={result.splits_used}",
        "c,g,acc,mse,scc,converged",
    ]
    for cell in result.table:
        lines.append(f"{cell.c!r},{cell.g!r},{_fmt(cell.acc)},{_fmt(cell.mse)},{_fmt(cell.scc)},{int(cell.converged)}")
    lines.append(f"# best: c={result.best[0]!r} g={result.best[1]!r}")
    lines.append(f"# variance: g={result.g_variance!r} c={result.c_variance!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_approx_report(result: ApproxResult, path: str | Path) -> None:
    lines = [
        APPROX_REPORT_SCHEMA,
        f"# mode={result.mode} seed={result.seed} groups={result.groups}",
        "group,c,g",
    ]
    for k, (c, g) in enumerate(result.local_optima):
        lines.append(f"{k},{c!r},{g!r}")
    lines.append(f"# aggregate: c={result.aggregate[0]!r} g={result.aggregate[1]!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
