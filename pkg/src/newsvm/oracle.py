"""Brute-force reference solver for the SVM dual, for testing only.

Maximizes the same dual the SMO path solves, but by an entirely different
route: accelerated projected gradient descent (with exact projection onto
the box intersected with the equality hyperplane) followed by an
active-set polish that solves the free-variable KKT system directly.
Refuses problems with more than 10 training rows; it exists to check the
production solver on small instances, not to train models.
"""
from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .svm import SvmModel, SvmParams

MAX_ORACLE_ROWS = 10


def _kernel_value(params: SvmParams, u: np.ndarray, v: np.ndarray) -> float:
    affine = params.kernel.gamma * float(np.dot(u, v)) + params.kernel.coef0
    if params.kernel.kind == "polynomial":
        return affine ** params.kernel.degree
    return float(np.tanh(affine))


def _build_problem(x: np.ndarray, targets: np.ndarray, params: SvmParams, mode: str):
    n = x.shape[0]
    k = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            k[i, j] = _kernel_value(params, x[i], x[j])
    if mode == "svc":
        y = targets.astype(float)
        q = (y[:, None] * y[None, :]) * k
        p = -np.ones(n)
        yhat = y.copy()
    elif mode == "svr":
        z = targets.astype(float)
        q = np.block([[k, -k], [-k, k]])
        p = np.concatenate([params.epsilon - z, params.epsilon + z])
        yhat = np.concatenate([np.ones(n), -np.ones(n)])
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    return q, p, yhat


def project(v: np.ndarray, yhat: np.ndarray, c: float) -> np.ndarray:
    """Euclidean projection onto {b : 0 <= b <= c, yhat' b = 0}.

    The projection is clip(v - lam * yhat, 0, c) for the multiplier lam at
    which the equality constraint holds. The constraint value is piecewise
    linear and non-increasing in lam, so evaluating it at every clip
    breakpoint and interpolating on the crossing segment is exact.
    """
    pos = yhat > 0
    bps = np.union1d(np.where(pos, v - c, -v), np.where(pos, v, c - v))
    g = np.clip(v[None, :] - bps[:, None] * yhat[None, :], 0.0, c) @ yhat
    # g(bps[0]) = c * (# positive) > 0 and g(bps[-1]) = -c * (# negative) < 0
    # whenever both signs appear, which the dual construction guarantees
    k = int(np.argmax(g <= 0))
    if g[k] > 0:  # single-sign degenerate case: fully saturated already
        lam = bps[-1]
    elif k == 0:
        lam = bps[0]
    else:
        g_hi, g_lo = g[k - 1], g[k]
        lam = bps[k - 1] if g_hi == g_lo else bps[k - 1] + (bps[k] - bps[k - 1]) * g_hi / (g_hi - g_lo)
    return np.clip(v - lam * yhat, 0.0, c)


def _objective_min(q, p, b):
    return 0.5 * float(b @ (q @ b)) + float(p @ b)


def _fista(q, p, yhat, c, start=None, max_iter=4000):
    eigs = np.linalg.eigvalsh(0.5 * (q + q.T))
    lip = max(float(np.max(np.abs(eigs))), 1e-12)
    step = 1.0 / lip
    x = project(np.zeros_like(p) if start is None else np.asarray(start, dtype=float), yhat, c)
    zk = x.copy()
    t = 1.0
    fx = _objective_min(q, p, x)
    stall = 0
    for _ in range(max_iter):
        x_new = project(zk - step * (q @ zk + p), yhat, c)
        f_new = _objective_min(q, p, x_new)
        if f_new > fx:  # restart momentum from the last good iterate
            zk = x.copy()
            t = 1.0
            x_new = project(x - step * (q @ x + p), yhat, c)
            f_new = _objective_min(q, p, x_new)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        zk = x_new + ((t - 1.0) / t_new) * (x_new - x)
        if np.max(np.abs(x_new - x)) < 1e-14 * (1.0 + np.max(np.abs(x))):
            stall += 1
            if stall >= 10:
                x = x_new
                break
        else:
            stall = 0
        x, fx, t = x_new, f_new, t_new
    return x


def _kkt_solve(q, p, yhat, free, fixed):
    """Stationary point on the free set with bounded variables held at ``fixed``."""
    idx = np.flatnonzero(free)
    nf = idx.size
    other = np.flatnonzero(~free)
    candidate = fixed.copy()
    if nf == 0:
        return candidate, None
    kkt = np.zeros((nf + 1, nf + 1))
    kkt[:nf, :nf] = q[np.ix_(idx, idx)]
    kkt[:nf, nf] = yhat[idx]
    kkt[nf, :nf] = yhat[idx]
    rhs = np.zeros(nf + 1)
    rhs[:nf] = -(p[idx] + q[np.ix_(idx, other)] @ fixed[other])
    rhs[nf] = -float(yhat[other] @ fixed[other])
    sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    candidate[idx] = sol[:nf]
    return candidate, float(sol[nf])


def _polish(q, p, yhat, c, b, max_rounds=100):
    """Active-set refinement seeded by the projected-gradient point.

    Repeatedly solves the free-set KKT system; free variables that leave
    the box are pinned to the violated bound, and bounded variables with a
    wrong-signed multiplier are released. Returns the best feasible point
    seen (never worse than the seed).
    """
    best = b.copy()
    best_obj = _objective_min(q, p, b)
    thr = 1e-8 * (1.0 + c)
    lower = b <= thr
    upper = b >= c - thr
    for _ in range(max_rounds):
        free = ~(lower | upper)
        fixed = np.where(upper, c, 0.0)
        candidate, rho = _kkt_solve(q, p, yhat, free, fixed)
        bviol = np.maximum(-candidate, candidate - c)
        bviol[~free] = -np.inf
        worst = int(np.argmax(bviol))
        if free.any() and bviol[worst] > 1e-12 * (1.0 + c):
            if candidate[worst] < 0:
                lower[worst] = True
            else:
                upper[worst] = True
            continue
        candidate = np.clip(candidate, 0.0, c)
        feasible = abs(float(yhat @ candidate)) <= 1e-9 * (1.0 + c)
        if feasible:
            obj = _objective_min(q, p, candidate)
            if obj < best_obj:
                best, best_obj = candidate.copy(), obj
        grad = q @ candidate + p
        if rho is None:
            rho = _bias_rho(candidate, grad, yhat, c)
        stat = grad + rho * yhat
        release_scores = np.where(lower, -stat, np.where(upper, stat, -np.inf))
        worst = int(np.argmax(release_scores))
        if release_scores[worst] <= 1e-10 * (1.0 + np.max(np.abs(grad))):
            break  # KKT satisfied
        lower[worst] = False
        upper[worst] = False
    return best, best_obj


def brute_force_dual(x: np.ndarray, targets: np.ndarray, params: SvmParams,
                     mode: str) -> tuple[float, np.ndarray]:
    """Reference dual optimum: (maximization-form objective, dual variables).

    For svc the variables are the n alphas; for svr the 2n stacked
    (alpha, alpha*). Limited to n <= 10 rows.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    targets = np.asarray(targets)
    n = x.shape[0]
    if n > MAX_ORACLE_ROWS:
        raise ValidationError(f"oracle refuses n={n} > {MAX_ORACLE_ROWS} rows")
    if len(targets) != n:
        raise ValidationError("one target per row required")
    q, p, yhat = _build_problem(x, targets, params, mode)
    beta = _fista(q, p, yhat, params.C)
    beta, obj_min = _polish(q, p, yhat, params.C, beta)
    for _ in range(4):  # alternate refinement rounds until they stop paying
        beta2 = _fista(q, p, yhat, params.C, start=beta, max_iter=2000)
        beta2, obj2 = _polish(q, p, yhat, params.C, beta2)
        if obj2 >= obj_min - 1e-15 * (1.0 + abs(obj_min)):
            break
        beta, obj_min = beta2, obj2
    return -obj_min, beta


def oracle_model(x: np.ndarray, targets: np.ndarray, params: SvmParams, mode: str,
                 beta: np.ndarray) -> SvmModel:
    """Build a predictable model from oracle dual variables (bias from its own KKT)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[0]
    q, p, yhat = _build_problem(x, np.asarray(targets), params, mode)
    grad = q @ beta + p
    bias = -_bias_rho(beta, grad, yhat, params.C)
    if mode == "svc":
        coefs = np.asarray(targets, dtype=float) * beta
    else:
        coefs = beta[:n] - beta[n:]
    mask = np.abs(coefs) > 1e-12
    return SvmModel(
        mode=mode,
        support_vectors=x[mask].copy(),
        dual_coefs=coefs[mask],
        bias=bias,
        params=params,
        scaler=None,
        converged=True,
        n_features=x.shape[1],
        dual_objective=-_objective_min(q, p, beta),
    )


def _bias_rho(beta, grad, yhat, c, atol=1e-9):
    yg = yhat * grad
    free = (beta > atol) & (beta < c - atol)
    if free.any():
        return float(yg[free].mean())
    at_upper = beta >= c - atol
    at_lower = beta <= atol
    ub_mask = (at_upper & (yhat < 0)) | (at_lower & (yhat > 0))
    lb_mask = (at_upper & (yhat > 0)) | (at_lower & (yhat < 0))
    ub = yg[ub_mask].min() if ub_mask.any() else np.inf
    lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
    if not np.isfinite(ub):
        return float(lb)
    if not np.isfinite(lb):
        return float(ub)
    return float((ub + lb) / 2.0)
