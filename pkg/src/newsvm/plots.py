"""Optional static plot emission from search/study results."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def save_search_heatmap(result, path: str | Path) -> None:
    """Metric surface over the (c, g) grid."""
    plt = _pyplot()
    cs = sorted({cell.c for cell in result.table})
    gs = sorted({cell.g for cell in result.table})
    c_idx = {c: i for i, c in enumerate(cs)}
    g_idx = {g: i for i, g in enumerate(gs)}
    surface = np.full((len(gs), len(cs)), np.nan)
    for cell in result.table:
        metric = cell.acc if result.mode == "svc" else cell.mse
        if cell.converged and metric is not None:
            surface[g_idx[cell.g], c_idx[cell.c]] = metric
    fig, ax = plt.subplots(figsize=(8, 5))
    im = ax.imshow(surface, aspect="auto", origin="lower",
                   extent=(min(cs), max(cs), min(gs), max(gs)))
    ax.set_xlabel("c")
    ax.set_ylabel("g")
    label = "accuracy" if result.mode == "svc" else "mse"
    ax.set_title(f"{result.mode} grid search ({label}), best c={result.best[0]} g={result.best[1]}")
    fig.colorbar(im, ax=ax, label=label)
    ax.plot([result.best[0]], [result.best[1]], "r*", markersize=12)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_approx_scatter(approx, traverse_best: tuple[float, float] | None, path: str | Path) -> None:
    """Local optima of the approximate search, optionally with the traverse optimum."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 5))
    cs = [c for c, _ in approx.local_optima]
    gs = [g for _, g in approx.local_optima]
    ax.scatter(cs, gs, alpha=0.5, label="group local optima")
    ax.plot([approx.aggregate[0]], [approx.aggregate[1]], "bs", markersize=10, label="aggregate")
    if traverse_best is not None:
        ax.plot([traverse_best[0]], [traverse_best[1]], "r*", markersize=14, label="traverse best")
    ax.set_xlabel("c")
    ax.set_ylabel("g")
    ax.set_title(f"{approx.mode} approximate search, {approx.groups} groups")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_lag_curves(cells: Sequence, path: str | Path) -> None:
    """Metric against lag for each (mode, variant) pair in a lag study."""
    plt = _pyplot()
    modes = sorted({cell.mode for cell in cells})
    fig, axes = plt.subplots(1, len(modes), figsize=(6 * len(modes), 4.5), squeeze=False)
    for ax, mode in zip(axes[0], modes):
        for variant in ("with-news", "stock-only"):
            pts = sorted(
                (cell.lag, cell.metrics.acc if mode == "svc" else cell.metrics.mse)
                for cell in cells
                if cell.mode == mode and cell.variant == variant and cell.metrics is not None
            )
            if pts:
                ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=variant)
        ax.set_xlabel("lag")
        ax.set_ylabel("accuracy" if mode == "svc" else "mse")
        ax.set_title(f"{mode} vs lag")
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
