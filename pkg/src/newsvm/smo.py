"""Sequential minimal optimization for the shared SVM dual form.

Both model families reduce to

    minimize    0.5 * b' Q b + p' b
    subject to  yhat' b = 0,  0 <= b_t <= C

over dual variables b (classification: b = alpha with yhat the labels;
regression: b stacks alpha and alpha* with yhat = [+1.., -1..]). Each
step picks the maximal violating pair (largest KKT violation among the
ascent-feasible set against the smallest among the descent-feasible set)
and solves the two-variable subproblem in closed form with box clipping.

For indefinite kernels (sigmoid) the pair subproblem can lose convexity;
the quadratic coefficient is then clamped to a tiny positive value, which
drives the step to the better feasible endpoint, so the objective still
never increases. ``solve`` with ``debug=True`` asserts that per step.

The dense fast path is JIT-compiled; an equivalent numpy path handles
problems too large to hold a full coefficient matrix, and debug mode.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit

TAU = 1e-12


@dataclass
class SmoResult:
    beta: np.ndarray
    gradient: np.ndarray
    iterations: int
    converged: bool


def dual_objective(beta: np.ndarray, gradient: np.ndarray, p: np.ndarray) -> float:
    """Maximization-form dual objective -(0.5 * b'Qb + p'b) from the maintained gradient.

    Uses b'Qb = b'(grad - p), valid because grad = Q b + p is maintained
    exactly by the solver.
    """
    return float(-0.5 * (beta @ gradient + p @ beta))


@njit(cache=True)
def _solve_dense(q, qdiag, p, yhat, c, tol, max_iter):  # pragma: no cover - exercised via solve()
    m = p.shape[0]
    beta = np.zeros(m)
    grad = p.copy()
    it = 0
    converged = False
    while it < max_iter:
        best_i = -1
        best_j = -1
        up_val = -1e300
        low_val = 1e300
        for t in range(m):
            v = -yhat[t] * grad[t]
            if (yhat[t] > 0 and beta[t] < c) or (yhat[t] < 0 and beta[t] > 0):
                if v > up_val:
                    up_val = v
                    best_i = t
            if (yhat[t] > 0 and beta[t] > 0) or (yhat[t] < 0 and beta[t] < c):
                if v < low_val:
                    low_val = v
                    best_j = t
        if best_i < 0 or best_j < 0 or up_val - low_val <= tol:
            converged = True
            break
        i = best_i
        j = best_j
        old_i = beta[i]
        old_j = beta[j]
        if yhat[i] != yhat[j]:
            quad = qdiag[i] + qdiag[j] + 2.0 * q[i, j]
            if quad <= 0.0:
                quad = TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = beta[i] - beta[j]
            beta[i] += delta
            beta[j] += delta
            if diff > 0.0:
                if beta[j] < 0.0:
                    beta[j] = 0.0
                    beta[i] = diff
            else:
                if beta[i] < 0.0:
                    beta[i] = 0.0
                    beta[j] = -diff
            if diff > 0.0:
                if beta[i] > c:
                    beta[i] = c
                    beta[j] = c - diff
            else:
                if beta[j] > c:
                    beta[j] = c
                    beta[i] = c + diff
        else:
            quad = qdiag[i] + qdiag[j] - 2.0 * q[i, j]
            if quad <= 0.0:
                quad = TAU
            delta = (grad[i] - grad[j]) / quad
            ssum = beta[i] + beta[j]
            beta[i] -= delta
            beta[j] += delta
            if ssum > c:
                if beta[i] > c:
                    beta[i] = c
                    beta[j] = ssum - c
            else:
                if beta[j] < 0.0:
                    beta[j] = 0.0
                    beta[i] = ssum
            if ssum > c:
                if beta[j] > c:
                    beta[j] = c
                    beta[i] = ssum - c
            else:
                if beta[i] < 0.0:
                    beta[i] = 0.0
                    beta[j] = ssum
        di = beta[i] - old_i
        dj = beta[j] - old_j
        for t in range(m):
            grad[t] += q[i, t] * di + q[j, t] * dj
        it += 1
    return beta, grad, it, converged


def _solve_rows(q_row, qdiag, p, yhat, c, tol, max_iter, debug=False):
    """Numpy twin of the dense path; q_row(t) returns row t of Q on demand."""
    m = p.shape[0]
    beta = np.zeros(m)
    grad = p.astype(float).copy()
    pos = yhat > 0
    it = 0
    converged = False
    prev_obj = 0.5 * float(beta @ grad + p @ beta) if debug else 0.0
    while it < max_iter:
        crit = -yhat * grad
        up = np.where(pos, beta < c, beta > 0)
        low = np.where(pos, beta > 0, beta < c)
        if not up.any() or not low.any():
            converged = True
            break
        ci = np.where(up, crit, -np.inf)
        cj = np.where(low, crit, np.inf)
        i = int(np.argmax(ci))
        j = int(np.argmin(cj))
        if ci[i] - cj[j] <= tol:
            converged = True
            break
        qi = q_row(i)
        qj = q_row(j)
        old_i, old_j = beta[i], beta[j]
        if yhat[i] != yhat[j]:
            quad = qdiag[i] + qdiag[j] + 2.0 * qi[j]
            if quad <= 0.0:
                quad = TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = beta[i] - beta[j]
            beta[i] += delta
            beta[j] += delta
            if diff > 0.0:
                if beta[j] < 0.0:
                    beta[j] = 0.0
                    beta[i] = diff
            else:
                if beta[i] < 0.0:
                    beta[i] = 0.0
                    beta[j] = -diff
            if diff > 0.0:
                if beta[i] > c:
                    beta[i] = c
                    beta[j] = c - diff
            else:
                if beta[j] > c:
                    beta[j] = c
                    beta[i] = c + diff
        else:
            quad = qdiag[i] + qdiag[j] - 2.0 * qi[j]
            if quad <= 0.0:
                quad = TAU
            delta = (grad[i] - grad[j]) / quad
            ssum = beta[i] + beta[j]
            beta[i] -= delta
            beta[j] += delta
            if ssum > c:
                if beta[i] > c:
                    beta[i] = c
                    beta[j] = ssum - c
            else:
                if beta[j] < 0.0:
                    beta[j] = 0.0
                    beta[i] = ssum
            if ssum > c:
                if beta[j] > c:
                    beta[j] = c
                    beta[i] = ssum - c
            else:
                if beta[i] < 0.0:
                    beta[i] = 0.0
                    beta[j] = ssum
        grad += qi * (beta[i] - old_i) + qj * (beta[j] - old_j)
        it += 1
        if debug:
            obj = 0.5 * float(beta @ grad + p @ beta)
            assert obj <= prev_obj + 1e-9 * (1.0 + abs(prev_obj)), (
                f"objective increased at iteration {it}: {prev_obj} -> {obj}"
            )
            prev_obj = obj
    return beta, grad, it, converged


def solve(
    p: np.ndarray,
    yhat: np.ndarray,
    c: float,
    tol: float,
    max_iter: int,
    q: np.ndarray | None = None,
    q_row: Callable[[int], np.ndarray] | None = None,
    q_diag: np.ndarray | None = None,
    debug: bool = False,
) -> SmoResult:
    """Run SMO on the shared dual form.

    Pass the full coefficient matrix ``q`` for the compiled fast path, or
    ``q_row``/``q_diag`` for on-demand rows. ``debug`` forces the numpy
    path and asserts the objective never increases.
    """
    p = np.ascontiguousarray(p, dtype=float)
    yhat = np.ascontiguousarray(yhat, dtype=float)
    if q is not None and not debug:
        beta, grad, it, converged = _solve_dense(
            np.ascontiguousarray(q, dtype=float),
            np.ascontiguousarray(np.diag(q), dtype=float) if q_diag is None else np.ascontiguousarray(q_diag, dtype=float),
            p, yhat, float(c), float(tol), int(max_iter),
        )
    else:
        if q is not None:
            q_arr = np.asarray(q, dtype=float)
            q_row = lambda t: q_arr[t]  # noqa: E731
            q_diag = np.diag(q_arr).copy()
        if q_row is None or q_diag is None:
            raise ValueError("solve needs q, or q_row and q_diag")
        beta, grad, it, converged = _solve_rows(
            q_row, np.asarray(q_diag, dtype=float), p, yhat, float(c), float(tol), int(max_iter), debug=debug,
        )
    return SmoResult(beta=beta, gradient=grad, iterations=it, converged=converged)


def compute_rho(beta: np.ndarray, gradient: np.ndarray, yhat: np.ndarray, c: float) -> float:
    """Equality-constraint multiplier; the decision bias is -rho.

    Free variables determine it exactly (mean of yhat*grad); with none
    free it is the midpoint of the feasible interval from the bounded
    variables.
    """
    yg = yhat * gradient
    at_upper = beta >= c
    at_lower = beta <= 0
    free = ~(at_upper | at_lower)
    if free.any():
        return float(yg[free].mean())
    # at the lower bound yhat=+1 caps rho from above (yhat=-1 from below);
    # at the upper bound the roles swap
    ub_mask = (at_upper & (yhat < 0)) | (at_lower & (yhat > 0))
    lb_mask = (at_upper & (yhat > 0)) | (at_lower & (yhat < 0))
    ub = yg[ub_mask].min() if ub_mask.any() else np.inf
    lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
    if not np.isfinite(ub):
        return float(lb)
    if not np.isfinite(lb):
        return float(ub)
    return float((ub + lb) / 2.0)
