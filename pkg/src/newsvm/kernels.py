"""Polynomial and sigmoid kernels.

polynomial: K(u, v) = (gamma * <u, v> + coef0) ** degree
sigmoid:    K(u, v) = tanh(gamma * <u, v> + coef0)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

KERNEL_KINDS = ("polynomial", "sigmoid")


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    gamma: float
    coef0: float = 0.0
    degree: int = 3

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValidationError(f"unknown kernel kind {self.kind!r}")
        if not self.gamma > 0:
            raise ValidationError(f"gamma must be > 0, got {self.gamma}")
        if self.degree < 1:
            raise ValidationError(f"degree must be >= 1, got {self.degree}")


def kernel_from_dots(spec: KernelSpec, dots: np.ndarray) -> np.ndarray:
    """Apply the kernel transform to precomputed inner products."""
    affine = spec.gamma * np.asarray(dots, dtype=float) + spec.coef0
    if spec.kind == "polynomial":
        return affine ** spec.degree
    return np.tanh(affine)


def kernel_eval(spec: KernelSpec, u, v) -> float:
    """Kernel value for a single pair of equally sized vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ValidationError(f"kernel arguments must be equal-length vectors, got {u.shape} and {v.shape}")
    return float(kernel_from_dots(spec, float(u @ v)))


def kernel_matrix(spec: KernelSpec, a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Gram matrix K[i, j] = K(a[i], b[j]); b defaults to a."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = a if b is None else np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise ValidationError(f"kernel operands have {a.shape[1]} and {b.shape[1]} features")
    return kernel_from_dots(spec, a @ b.T)
