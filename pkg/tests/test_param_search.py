import datetime as dt

import numpy as np
import pytest

from newsvm.errors import ValidationError
from newsvm.features import Dataset, FeatureLayout, FeatureVector
from newsvm.param_search import (
    ApproxResult,
    Grid,
    approximate_search,
    evaluate_cell,
    make_split_seeds,
    prepare_split,
    save_approx_report,
    save_search_report,
    traverse_search,
)


def make_dataset(n=40, num_sources=2, lag=2, seed=0):
    """Rows with a learnable linear structure in the news nodes."""
    rng = np.random.default_rng(seed)
    rows = []
    w = np.array([1.0, -0.6])
    price = 10.0
    for i in range(n):
        news = rng.normal(size=num_sources)
        lags = price + rng.normal(0, 0.05, size=lag)
        signal = float(w @ news)
        label = 1 if signal > 0 else -1
        price = max(price + signal * 0.1 + rng.normal(0, 0.01), 1.0)
        rows.append(FeatureVector(
            date=dt.date(2020, 1, 1) + dt.timedelta(days=i),
            x=tuple(news) + tuple(float(v) for v in lags),
            label_class=label,
            label_price=price,
            has_news=True,
        ))
    return Dataset(layout=FeatureLayout(num_sources=num_sources, lag=lag),
                   rows=tuple(rows), expanded=True)


def make_trivial_dataset(n=30):
    """Two exact clusters in the lone varying news node; every cell fits perfectly."""
    rows = []
    for i in range(n):
        label = 1 if i % 2 == 0 else -1
        rows.append(FeatureVector(
            date=dt.date(2020, 1, 1) + dt.timedelta(days=i),
            x=(10.0 * label, 5.0 * label, 10.0, 10.0),  # constant lags scale to zero
            label_class=label,
            label_price=10.0 + label,
            has_news=True,
        ))
    return Dataset(layout=FeatureLayout(num_sources=2, lag=2), rows=tuple(rows), expanded=True)


def test_grid_axes():
    grid = Grid()
    assert grid.c_values() == tuple(float(k) for k in range(1, 26))
    gs = grid.g_values()
    assert len(gs) == 30
    assert gs[0] == 0.01 and gs[-1] == 0.30
    assert grid.cell_count == 750


def test_grid_validation():
    with pytest.raises(ValidationError):
        Grid(c_min=5, c_max=5)
    with pytest.raises(ValidationError):
        Grid(g_step=0)


def test_single_cell_grid():
    ds = make_dataset(30)
    grid = Grid(c_min=1, c_max=1.5, c_step=1, g_min=0.1, g_max=0.15, g_step=0.1)
    assert grid.cell_count == 1
    res = traverse_search(ds, grid, "svc", seed=4, splits=3)
    assert len(res.table) == 1
    assert res.best == (1.0, 0.1)


def test_traverse_determinism():
    ds = make_dataset(40)
    grid = Grid(c_min=1, c_max=3, c_step=1, g_min=0.05, g_max=0.15, g_step=0.05)
    a = traverse_search(ds, grid, "svc", seed=11, splits=4)
    b = traverse_search(ds, grid, "svc", seed=11, splits=4)
    assert a == b
    c = traverse_search(ds, grid, "svc", seed=12, splits=4)
    assert c != a


def test_traverse_consistent_with_independent_recomputation():
    ds = make_dataset(40)
    grid = Grid(c_min=1, c_max=2, c_step=1, g_min=0.05, g_max=0.10, g_step=0.05)
    res = traverse_search(ds, grid, "svr", seed=7, splits=5)
    splits = [prepare_split(ds, s) for s in make_split_seeds(7, 5)]
    recomputed = {
        (c, g): evaluate_cell(splits, c, g, "svr")
        for g in grid.g_values() for c in grid.c_values()
    }
    for cell in res.table:
        again = recomputed[(cell.c, cell.g)]
        assert again == cell
    best_key = min(((cell.mse, cell.g, cell.c) for cell in res.table))
    assert (best_key[2], best_key[1]) == res.best


def test_traverse_dominance():
    ds = make_dataset(50)
    grid = Grid(c_min=1, c_max=4, c_step=1, g_min=0.02, g_max=0.10, g_step=0.02)
    res = traverse_search(ds, grid, "svc", seed=3, splits=4)
    best_cell = next(c for c in res.table if (c.c, c.g) == res.best)
    for cell in res.table:
        if cell.converged:
            assert best_cell.acc >= cell.acc - 1e-12


@pytest.mark.filterwarnings("ignore::newsvm.errors.DegenerateScaleWarning")
def test_tie_breaks_toward_smaller_g_then_c():
    # perfectly separable clusters, g large enough that every cell hits accuracy 1.0
    ds = make_trivial_dataset(30)
    grid = Grid(c_min=1, c_max=3, c_step=1, g_min=1.0, g_max=2.0, g_step=0.5)
    res = traverse_search(ds, grid, "svc", seed=2, splits=3)
    accs = {cell.acc for cell in res.table}
    assert accs == {1.0}
    assert res.best == (1.0, 1.0)


def test_argbest_tie_rule_direct():
    from newsvm.param_search import CellResult, _argbest
    cells = (
        CellResult(c=2.0, g=0.02, acc=0.9, mse=None, scc=None, converged=True),
        CellResult(c=1.0, g=0.02, acc=0.9, mse=None, scc=None, converged=True),
        CellResult(c=1.0, g=0.01, acc=0.9, mse=None, scc=None, converged=True),
        CellResult(c=3.0, g=0.01, acc=0.9, mse=None, scc=None, converged=True),
    )
    assert _argbest(cells, "svc") == (1.0, 0.01)  # smaller g, then smaller c
    mse_cells = (
        CellResult(c=5.0, g=0.05, acc=None, mse=0.2, scc=0.9, converged=True),
        CellResult(c=4.0, g=0.03, acc=None, mse=0.2, scc=0.9, converged=True),
        CellResult(c=2.0, g=0.03, acc=None, mse=0.5, scc=0.8, converged=True),
    )
    assert _argbest(mse_cells, "svr") == (4.0, 0.03)


def test_argbest_skips_nonconverged():
    from newsvm.param_search import CellResult, _argbest
    cells = (
        CellResult(c=1.0, g=0.01, acc=0.99, mse=None, scc=None, converged=False),
        CellResult(c=2.0, g=0.02, acc=0.7, mse=None, scc=None, converged=True),
    )
    assert _argbest(cells, "svc") == (2.0, 0.02)
    with pytest.raises(ValidationError):
        _argbest((cells[0],), "svc")


def test_approximate_single_group_equals_local():
    ds = make_dataset(40)
    grid = Grid(c_min=1, c_max=2, c_step=1, g_min=0.05, g_max=0.10, g_step=0.05)
    res = approximate_search(ds, grid, "svc", seed=5, groups=1)
    assert len(res.local_optima) == 1
    assert res.aggregate == res.local_optima[0]


@pytest.mark.filterwarnings("ignore::newsvm.errors.DegenerateScaleWarning")
def test_approximate_all_agree():
    ds = make_trivial_dataset(40)
    grid = Grid(c_min=1, c_max=2, c_step=1, g_min=1.0, g_max=2.0, g_step=1.0)
    res = approximate_search(ds, grid, "svc", seed=5, groups=4)
    assert set(res.local_optima) == {(1.0, 1.0)}
    assert res.aggregate == (1.0, 1.0)


def test_approximate_aggregate_is_coordinatewise_mode():
    res = ApproxResult(mode="svc", groups=5, seed=0,
                       local_optima=((1.0, 0.02), (2.0, 0.02), (2.0, 0.01), (3.0, 0.01), (4.0, 0.03)),
                       aggregate=(0.0, 0.0))
    from newsvm.param_search import _mode_smallest
    assert _mode_smallest([c for c, _ in res.local_optima]) == 2.0
    assert _mode_smallest([g for _, g in res.local_optima]) == 0.01  # tie 0.01/0.02 -> smaller


def test_reports_schema_and_determinism(tmp_path):
    ds = make_dataset(35)
    grid = Grid(c_min=1, c_max=2, c_step=1, g_min=0.05, g_max=0.10, g_step=0.05)
    res = traverse_search(ds, grid, "svc", seed=1, splits=3)
    p1, p2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    save_search_report(res, p1)
    save_search_report(res, p2)
    assert p1.read_bytes() == p2.read_bytes()
    lines = p1.read_text().splitlines()
    assert lines[0] == "# newsvm grid-search report v1"
    assert lines[2] == "c,g,acc,mse,scc,converged"
    assert lines[-2].startswith("# best: c=")
    assert lines[-1].startswith("# variance: g=")

    apx = approximate_search(ds, grid, "svc", seed=1, groups=2)
    pa = tmp_path / "a.csv"
    save_approx_report(apx, pa)
    alines = pa.read_text().splitlines()
    assert alines[0] == "# newsvm approx-search report v1"
    assert alines[2] == "group,c,g"
    assert alines[-1].startswith("# aggregate: c=")


def test_unknown_mode_rejected():
    ds = make_dataset(30)
    with pytest.raises(ValidationError):
        traverse_search(ds, Grid(), "boost", seed=0)
