"""Training and prediction for C-SVC and epsilon-SVR.

Classification solves the soft-margin dual over alpha with Q = yy'K;
regression solves the epsilon-insensitive dual over the stacked
(alpha, alpha*) with the doubled coefficient matrix. Both go through the
shared SMO solver; the decision function is

    f(x) = sum_i dual_coefs[i] * K(sv_i, x) + bias

with dual_coefs = y_i alpha_i (SVC) or alpha_i - alpha*_i (SVR).
Models keep the feature/target scaler that produced their training rows,
so regression predictions can be mapped back to price units.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import smo
from .errors import ParseError, ValidationError
from .features import ScalingParams, unscale_price
from .kernels import KernelSpec, kernel_matrix

# full coefficient-matrix cache is used up to this many dual variables
GRAM_CACHE_MAX = 4000
ITER_BUDGET_MIN = 100_000
ITER_BUDGET_MAX = 10_000_000


def iteration_budget(n_rows: int) -> int:
    return int(min(max(10 * n_rows * n_rows, ITER_BUDGET_MIN), ITER_BUDGET_MAX))


@dataclass(frozen=True)
class SvmParams:
    C: float
    kernel: KernelSpec
    epsilon: float = 0.1
    tolerance: float = 1e-3
    max_passes: int | None = None  # None: 10 n^2 clamped to [1e5, 1e7]

    def __post_init__(self):
        if not self.C > 0:
            raise ValidationError(f"C must be > 0, got {self.C}")
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon}")
        if not self.tolerance > 0:
            raise ValidationError(f"tolerance must be > 0, got {self.tolerance}")


@dataclass
class SvmModel:
    mode: str                      # "svc" or "svr"
    support_vectors: np.ndarray    # (n_sv, n_features) scaled rows
    dual_coefs: np.ndarray         # (n_sv,)
    bias: float
    params: SvmParams
    scaler: ScalingParams | None
    converged: bool
    n_features: int
    dual_objective: float


def train_svc(x: np.ndarray, y: np.ndarray, params: SvmParams,
              scaler: ScalingParams | None = None, debug: bool = False) -> SvmModel:
    """Fit a soft-margin classifier on scaled rows with labels in {+1, -1}."""
    x = np.ascontiguousarray(x, dtype=float)
    y = np.asarray(y)
    if x.ndim != 2 or len(y) != x.shape[0]:
        raise ValidationError("x must be 2-D with one label per row")
    if set(np.unique(y)) != {-1, 1}:
        raise ValidationError("classification needs both classes (+1 and -1) present")
    n = x.shape[0]
    yf = y.astype(float)
    k = kernel_matrix(params.kernel, x)
    p = -np.ones(n)
    budget = params.max_passes if params.max_passes is not None else iteration_budget(n)
    if n <= GRAM_CACHE_MAX and not debug:
        q = (yf[:, None] * yf[None, :]) * k
        result = smo.solve(p, yf, params.C, params.tolerance, budget, q=q)
    else:
        q_row = lambda t: yf[t] * (yf * k[t])  # noqa: E731
        q_diag = np.diag(k).copy()
        result = smo.solve(p, yf, params.C, params.tolerance, budget,
                           q_row=q_row, q_diag=q_diag, debug=debug)
    objective = smo.dual_objective(result.beta, result.gradient, p)
    bias = -smo.compute_rho(result.beta, result.gradient, yf, params.C)
    coefs = yf * result.beta
    mask = coefs != 0
    return SvmModel(
        mode="svc",
        support_vectors=x[mask].copy(),
        dual_coefs=coefs[mask],
        bias=bias,
        params=params,
        scaler=scaler,
        converged=result.converged,
        n_features=x.shape[1],
        dual_objective=objective,
    )


def train_svr(x: np.ndarray, z: np.ndarray, params: SvmParams,
              scaler: ScalingParams | None = None, debug: bool = False) -> SvmModel:
    """Fit epsilon-tube regression on scaled rows against scaled targets."""
    x = np.ascontiguousarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.ndim != 2 or len(z) != x.shape[0]:
        raise ValidationError("x must be 2-D with one target per row")
    n = x.shape[0]
    if n < 2:
        raise ValidationError("regression needs at least 2 rows")
    k = kernel_matrix(params.kernel, x)
    p = np.concatenate([params.epsilon - z, params.epsilon + z])
    yhat = np.concatenate([np.ones(n), -np.ones(n)])
    budget = params.max_passes if params.max_passes is not None else iteration_budget(n)
    if 2 * n <= GRAM_CACHE_MAX and not debug:
        q = np.block([[k, -k], [-k, k]])
        result = smo.solve(p, yhat, params.C, params.tolerance, budget, q=q)
    else:
        def q_row(t):
            i = t if t < n else t - n
            row = np.concatenate([k[i], -k[i]])
            return row if t < n else -row
        q_diag = np.concatenate([np.diag(k), np.diag(k)])
        result = smo.solve(p, yhat, params.C, params.tolerance, budget,
                           q_row=q_row, q_diag=q_diag, debug=debug)
    objective = smo.dual_objective(result.beta, result.gradient, p)
    bias = -smo.compute_rho(result.beta, result.gradient, yhat, params.C)
    coefs = result.beta[:n] - result.beta[n:]
    mask = coefs != 0
    return SvmModel(
        mode="svr",
        support_vectors=x[mask].copy(),
        dual_coefs=coefs[mask],
        bias=bias,
        params=params,
        scaler=scaler,
        converged=result.converged,
        n_features=x.shape[1],
        dual_objective=objective,
    )


def decision_function(model: SvmModel, x: np.ndarray) -> np.ndarray:
    """Raw decision values f(x) for one row or a matrix of scaled rows."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    rows = np.atleast_2d(x)
    if rows.shape[1] != model.n_features:
        raise ValidationError(f"row has {rows.shape[1]} features, model expects {model.n_features}")
    if model.support_vectors.shape[0] == 0:
        f = np.full(rows.shape[0], model.bias)
    else:
        f = kernel_matrix(model.params.kernel, rows, model.support_vectors) @ model.dual_coefs + model.bias
    return f[0] if single else f


def predict(model: SvmModel, x: np.ndarray):
    """Class (+1/-1, ties to +1) for SVC; decision value for SVR."""
    f = decision_function(model, x)
    if model.mode == "svc":
        return np.where(np.asarray(f) >= 0, 1, -1) if np.ndim(f) else (1 if f >= 0 else -1)
    return f


def predict_price(model: SvmModel, x: np.ndarray):
    """SVR prediction mapped back to price units via the stored target scaler."""
    if model.mode != "svr":
        raise ValidationError("price prediction requires an svr model")
    if model.scaler is None:
        raise ValidationError("model has no scaler; cannot unscale predictions")
    return unscale_price(model.scaler, decision_function(model, x))


# --- model file format -------------------------------------------------------

MODEL_FORMAT_VERSION = "newsvm-model-v1"


def save_model(model: SvmModel, path: str | Path) -> None:
    """Versioned plain-text format; floats are written with repr and reload exactly."""
    lines = [
        MODEL_FORMAT_VERSION,
        f"mode {model.mode}",
        f"kernel {model.params.kernel.kind}",
        f"gamma {float(model.params.kernel.gamma)!r}",
        f"coef0 {float(model.params.kernel.coef0)!r}",
        f"degree {int(model.params.kernel.degree)}",
        f"C {float(model.params.C)!r}",
        f"epsilon {float(model.params.epsilon)!r}",
        f"tolerance {float(model.params.tolerance)!r}",
        f"max_passes {'auto' if model.params.max_passes is None else int(model.params.max_passes)}",
        f"converged {int(model.converged)}",
        f"dual_objective {float(model.dual_objective)!r}",
        f"bias {float(model.bias)!r}",
        f"n_features {int(model.n_features)}",
        f"scaler {int(model.scaler is not None)}",
    ]
    if model.scaler is not None:
        s = model.scaler
        lines += [
            "feature_mean " + " ".join(repr(float(v)) for v in s.mean),
            "feature_std " + " ".join(repr(float(v)) for v in s.std),
            "constant_features " + " ".join(str(int(i)) for i in s.constant_features),
            f"target_mean {float(s.target_mean)!r}",
            f"target_std {float(s.target_std)!r}",
            f"target_constant {int(s.target_constant)}",
        ]
    lines.append(f"n_sv {model.support_vectors.shape[0]}")
    for coef, sv in zip(model.dual_coefs, model.support_vectors):
        lines.append(" ".join([repr(float(coef))] + [repr(float(v)) for v in sv]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> SvmModel:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != MODEL_FORMAT_VERSION:
        raise ParseError(f"{path}: not a {MODEL_FORMAT_VERSION} file")
    fields = {}
    idx = 1
    while idx < len(lines):
        key, _, value = lines[idx].partition(" ")
        fields[key] = value
        idx += 1
        if key == "n_sv":
            break
    try:
        kernel = KernelSpec(
            kind=fields["kernel"],
            gamma=float(fields["gamma"]),
            coef0=float(fields["coef0"]),
            degree=int(fields["degree"]),
        )
        params = SvmParams(
            C=float(fields["C"]),
            kernel=kernel,
            epsilon=float(fields["epsilon"]),
            tolerance=float(fields["tolerance"]),
            max_passes=None if fields["max_passes"] == "auto" else int(fields["max_passes"]),
        )
        scaler = None
        if int(fields["scaler"]):
            scaler = ScalingParams(
                mean=tuple(float(v) for v in fields["feature_mean"].split()),
                std=tuple(float(v) for v in fields["feature_std"].split()),
                constant_features=tuple(int(v) for v in fields["constant_features"].split()),
                target_mean=float(fields["target_mean"]),
                target_std=float(fields["target_std"]),
                target_constant=bool(int(fields["target_constant"])),
            )
        n_features = int(fields["n_features"])
        n_sv = int(fields["n_sv"])
        sv_lines = lines[idx:idx + n_sv]
        if len(sv_lines) != n_sv:
            raise ParseError(f"{path}: expected {n_sv} support vector lines")
        coefs = np.zeros(n_sv)
        svs = np.zeros((n_sv, n_features))
        for r, line in enumerate(sv_lines):
            vals = [float(v) for v in line.split()]
            if len(vals) != n_features + 1:
                raise ParseError(f"{path}: support vector line {r + 1} has {len(vals)} values")
            coefs[r] = vals[0]
            svs[r] = vals[1:]
        return SvmModel(
            mode=fields["mode"],
            support_vectors=svs,
            dual_coefs=coefs,
            bias=float(fields["bias"]),
            params=params,
            scaler=scaler,
            converged=bool(int(fields["converged"])),
            n_features=n_features,
            dual_objective=float(fields["dual_objective"]),
        )
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from None
