"""Dense least-squares oracle for verifying the FFT-domain solve.

Materializes the circular-convolve-then-decimate map as an explicit dense
matrix and solves the regularized normal equations directly.  Everything
here is double precision and deliberately brute force; planes beyond a few
hundred pixels are out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, IndivisibleShape, KernelTooLarge

__all__ = ["DenseOperator", "build_forward", "solve_dense", "objective"]


@dataclass(frozen=True)
class DenseOperator:
    """Dense matrix of the convolve-then-downsample map for one channel.

    Rows index downsampled output pixels (row-major over the h/s x w/s
    grid); columns index input pixels (row-major over h x w).
    """

    matrix: np.ndarray
    h: int
    w: int
    s: int


def build_forward(k: np.ndarray, h: int, w: int, s: int) -> DenseOperator:
    """Matrix A with A @ vec(X) = vec((X circularly convolved with K), decimated).

    The convolution convention matches the frequency-domain forward used
    by the operator module (multiplication by the p2o spectrum): the
    kernel is centered, and decimation keeps indices (i*s, j*s).
    """
    k = np.asarray(k, dtype=np.float64)
    if k.ndim != 2:
        raise ValueError(f"kernel must be 2-D, got shape {k.shape}")
    kh, kw = k.shape
    if kh % 2 == 0 or kw % 2 == 0:
        raise ValueError(f"kernel dims must be odd, got {kh}x{kw}")
    if kh > h or kw > w:
        raise KernelTooLarge(f"kernel {kh}x{kw} larger than plane {h}x{w}")
    if h % s or w % s:
        raise IndivisibleShape(f"{h}x{w} plane not divisible by stride {s}")

    ch, cw = kh // 2, kw // 2
    a = np.zeros((h // s * (w // s), h * w))
    for oi in range(h // s):
        for oj in range(w // s):
            row = oi * (w // s) + oj
            i0, j0 = oi * s, oj * s
            for di in range(kh):
                for dj in range(kw):
                    src_i = (i0 - (di - ch)) % h
                    src_j = (j0 - (dj - cw)) % w
                    a[row, src_i * w + src_j] += k[di, dj]
    return DenseOperator(matrix=a, h=h, w=w, s=s)


def solve_dense(
    a: DenseOperator, y: np.ndarray, lam: float, x0: np.ndarray
) -> np.ndarray:
    """Unique minimizer x* = (A^T A + lam I)^-1 (A^T y + lam x0).

    lam > 0 makes the system symmetric positive definite, so a direct
    Cholesky-backed solve is exact to rounding.
    """
    m = a.matrix
    y = np.asarray(y, dtype=np.float64).ravel()
    x0 = np.asarray(x0, dtype=np.float64).ravel()
    if y.size != m.shape[0]:
        raise DimensionMismatch(f"y has {y.size} entries, expected {m.shape[0]}")
    if x0.size != m.shape[1]:
        raise DimensionMismatch(f"x0 has {x0.size} entries, expected {m.shape[1]}")
    if not lam > 0:
        raise ValueError("lam must be positive")
    gram = m.T @ m + lam * np.eye(m.shape[1])
    rhs = m.T @ y + lam * x0
    return scipy.linalg.solve(gram, rhs, assume_a="pos")


def objective(
    a: DenseOperator, x: np.ndarray, y: np.ndarray, lam: float, x0: np.ndarray
) -> float:
    """Value of ||y - A x||^2 + lam ||x - x0||^2."""
    m = a.matrix
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    x0 = np.asarray(x0, dtype=np.float64).ravel()
    if x.size != m.shape[1] or x0.size != m.shape[1]:
        raise DimensionMismatch("x/x0 size does not match operator columns")
    if y.size != m.shape[0]:
        raise DimensionMismatch("y size does not match operator rows")
    r = y - m @ x
    d = x - x0
    return float(r @ r + lam * (d @ d))
