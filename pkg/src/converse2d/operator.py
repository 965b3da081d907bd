"""The Converse2D operator: closed-form FFT-domain reverse convolution.

Given an observation Y produced (conceptually) by per-channel circular
convolution with a kernel K followed by s-fold decimation, the operator
returns the exact minimizer of

    || Y - (X conv K) down_s ||^2  +  lambda * || X - X0 ||^2

computed entirely in the frequency domain.  Kernels are parameterized by
raw weights passed through a per-channel softmax; lambda is parameterized
per channel as sigmoid(b - 9) + 1e-5.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import KernelTooLarge, MalformedKernel, ScaleNotOne
from .fft_tensor import (
    PadMode,
    block_mean,
    crop,
    fft2,
    ifft2,
    interp_nearest,
    pad,
    tile,
    upsample_zero,
)

__all__ = [
    "KernelBank",
    "LambdaParam",
    "X0Strategy",
    "ConverseConfig",
    "normalize_kernel",
    "lambda_of",
    "p2o",
    "converse_solve",
    "converse_s1_fast",
    "circular_forward",
    "load_kernel_file",
    "save_kernel_file",
]

LAMBDA_EPS = 1e-5
LAMBDA_SHIFT = 9.0


class X0Strategy(Enum):
    """Choice of the initial estimate anchoring the regularizer."""

    ZERO = "zero"
    INTERP_NEAREST = "interp_nearest"


@dataclass(frozen=True)
class KernelBank:
    """Per-channel spatial kernel stack [C, k_h, k_w].

    `raw` holds pre-softmax parameters unless `prenormalized` is set, in
    which case the values are used as kernel weights directly (the case
    for externally supplied physical PSFs).  Kernel dims must be odd so
    the center roll in :func:`p2o` is unambiguous.
    """

    raw: np.ndarray
    prenormalized: bool = False

    def __post_init__(self):
        arr = np.asarray(self.raw, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError(f"kernel bank must be [C, k_h, k_w], got {arr.shape}")
        _, kh, kw = arr.shape
        if kh % 2 == 0 or kw % 2 == 0:
            raise ValueError(f"kernel dims must be odd, got {kh}x{kw}")
        object.__setattr__(self, "raw", arr)

    @classmethod
    def from_normalized(cls, weights: np.ndarray) -> "KernelBank":
        """Wrap already-normalized kernel weights (softmax bypassed)."""
        return cls(weights, prenormalized=True)

    def weights(self) -> np.ndarray:
        """Normalized kernel weights [C, k_h, k_w], summing to 1 per channel."""
        if self.prenormalized:
            return self.raw.copy()
        return normalize_kernel(self.raw)

    @property
    def channels(self) -> int:
        return self.raw.shape[0]


@dataclass(frozen=True)
class LambdaParam:
    """Per-channel regularization parameters b; lambda_c = sigmoid(b_c - 9) + 1e-5."""

    b: np.ndarray

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.b, dtype=np.float64))
        if arr.ndim != 1:
            raise ValueError(f"b must be a length-C vector, got shape {arr.shape}")
        object.__setattr__(self, "b", arr)


@dataclass(frozen=True)
class ConverseConfig:
    """Scale, padding policy and X0 strategy for a solve."""

    scale: int = 1
    pad_mode: PadMode = PadMode.CIRCULAR
    pad_size: int = 0
    x0: X0Strategy = X0Strategy.INTERP_NEAREST

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError("scale must be >= 1")
        if self.pad_size < 0:
            raise ValueError("pad_size must be >= 0")


def normalize_kernel(raw: np.ndarray) -> np.ndarray:
    """Softmax over all spatial positions, independently per channel."""
    raw = np.asarray(raw, dtype=np.float64)
    c = raw.shape[0]
    flat = raw.reshape(c, -1)
    shifted = flat - flat.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return (e / e.sum(axis=1, keepdims=True)).reshape(raw.shape)


def lambda_of(p: LambdaParam) -> np.ndarray:
    """Per-channel lambda = sigmoid(b - 9) + 1e-5, in (1e-5, 1 + 1e-5)."""
    z = p.b - LAMBDA_SHIFT
    # stable sigmoid, no overflow for large |z|
    sig = np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))
    return sig + LAMBDA_EPS


def p2o(k_normalized: np.ndarray, target_h: int, target_w: int) -> np.ndarray:
    """PSF to OTF: zero-embed, roll the kernel center to (0, 0), FFT.

    Returns a complex spectrum of shape [1, C, target_h, target_w].  For a
    normalized kernel the DC bin is exactly 1.
    """
    k = np.asarray(k_normalized, dtype=np.float64)
    c, kh, kw = k.shape
    if kh > target_h or kw > target_w:
        raise KernelTooLarge(
            f"kernel {kh}x{kw} larger than target {target_h}x{target_w}"
        )
    plane = np.zeros((1, c, target_h, target_w), dtype=np.float64)
    plane[0, :, :kh, :kw] = k
    plane = np.roll(plane, (-(kh // 2), -(kw // 2)), axis=(-2, -1))
    return fft2(plane)


def _lambda_plane(lam: np.ndarray, channels: int) -> np.ndarray:
    """Broadcast per-channel lambdas to shape (1, C, 1, 1)."""
    lam = np.atleast_1d(np.asarray(lam, dtype=np.float64))
    if lam.size == 1:
        lam = np.full(channels, lam.item())
    if lam.shape != (channels,):
        raise ValueError(f"expected {channels} lambdas, got shape {lam.shape}")
    return lam.reshape(1, channels, 1, 1)


def converse_solve(
    y: np.ndarray,
    k: KernelBank,
    lam: LambdaParam,
    cfg: ConverseConfig,
    *,
    lam_override: np.ndarray | float | None = None,
) -> np.ndarray:
    """Closed-form minimizer of the regularized inversion, general stride.

    Pads y, builds X0 and the zero-upsampled observation on the padded
    domain, solves in the frequency domain with block-mean frequency
    splitting, and crops pad_size*scale from each output border.  Output
    shape is (B, C, H*scale, W*scale).

    `lam_override` bypasses the sigmoid parameterization of `lam`; it is a
    testing hook, the public parameterization is `lam.b`.
    """
    y = np.asarray(y, dtype=np.float64)
    s = cfg.scale
    c = y.shape[1]
    lam_vals = lambda_of(lam) if lam_override is None else lam_override
    lam_bc = _lambda_plane(lam_vals, c)

    y_p = pad(y, cfg.pad_mode, cfg.pad_size)
    hp, wp = y_p.shape[-2:]

    if cfg.x0 is X0Strategy.ZERO:
        x0 = np.zeros((y.shape[0], c, hp * s, wp * s))
    else:
        x0 = interp_nearest(y_p, s)
    y_up = upsample_zero(y_p, s)

    fk = p2o(k.weights(), hp * s, wp * s)
    fk_conj = np.conj(fk)
    fk2 = np.abs(fk) ** 2

    ell = fk_conj * fft2(y_up) + fft2(lam_bc * x0)
    fkl_s = block_mean(fk * ell, s)
    fk2_s = block_mean(fk2, s)
    fdiv = fkl_s / (fk2_s + lam_bc)
    fout = (ell - fk_conj * tile(fdiv, s)) / lam_bc
    out = ifft2(fout)
    return crop(out, cfg.pad_size * s)


def converse_s1_fast(
    y: np.ndarray,
    k: KernelBank,
    lam: LambdaParam,
    cfg: ConverseConfig,
    *,
    lam_override: np.ndarray | float | None = None,
) -> np.ndarray:
    """s=1 fast path: X* = ifft2((conj(F_K) F_Y + lam F_X0) / (|F_K|^2 + lam)).

    Algebraically identical to :func:`converse_solve` at scale 1 but skips
    the upsample/split/tile machinery.
    """
    if cfg.scale != 1:
        raise ScaleNotOne(f"fast path requires scale 1, got {cfg.scale}")
    y = np.asarray(y, dtype=np.float64)
    c = y.shape[1]
    lam_vals = lambda_of(lam) if lam_override is None else lam_override
    lam_bc = _lambda_plane(lam_vals, c)

    y_p = pad(y, cfg.pad_mode, cfg.pad_size)
    hp, wp = y_p.shape[-2:]
    if cfg.x0 is X0Strategy.ZERO:
        fx0 = np.zeros_like(y_p, dtype=np.complex128)
    else:
        fx0 = fft2(y_p)

    fk = p2o(k.weights(), hp, wp)
    num = np.conj(fk) * fft2(y_p) + lam_bc * fx0
    out = ifft2(num / (np.abs(fk) ** 2 + lam_bc))
    return crop(out, cfg.pad_size)


def circular_forward(x: np.ndarray, weights: np.ndarray, s: int = 1) -> np.ndarray:
    """Forward model: circular convolution with the kernel, then s-fold decimation.

    `weights` is a normalized kernel stack [C, k_h, k_w] (or [1, ...] to
    broadcast over channels).  Decimation keeps the upper-left pixel of
    each s x s patch.
    """
    x = np.asarray(x, dtype=np.float64)
    h, w = x.shape[-2:]
    fk = p2o(weights, h, w)
    blurred = ifft2(fk * fft2(x))
    return blurred[..., ::s, ::s].copy()


def load_kernel_file(path: str | Path) -> np.ndarray:
    """Parse the plain-text kernel format.

    First line: "C k_h k_w"; then C blocks of k_h lines of k_w decimals.
    Values are taken as already-normalized kernel weights.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MalformedKernel(f"cannot read kernel file {path}: {exc}") from exc
    lines = [ln for ln in (l.strip() for l in text.splitlines()) if ln]
    if not lines:
        raise MalformedKernel(f"{path}: empty kernel file")
    try:
        c, kh, kw = (int(tok) for tok in lines[0].split())
    except ValueError as exc:
        raise MalformedKernel(f"{path}: bad header {lines[0]!r}") from exc
    if c < 1 or kh < 1 or kw < 1:
        raise MalformedKernel(f"{path}: non-positive dims in header")
    if len(lines) != 1 + c * kh:
        raise MalformedKernel(
            f"{path}: expected {c * kh} kernel rows, found {len(lines) - 1}"
        )
    rows = []
    for ln in lines[1:]:
        try:
            vals = [float(tok) for tok in ln.split()]
        except ValueError as exc:
            raise MalformedKernel(f"{path}: bad kernel row {ln!r}") from exc
        if len(vals) != kw:
            raise MalformedKernel(
                f"{path}: row has {len(vals)} values, expected {kw}"
            )
        rows.append(vals)
    return np.array(rows, dtype=np.float64).reshape(c, kh, kw)


def save_kernel_file(path: str | Path, weights: np.ndarray) -> None:
    """Write kernel weights [C, k_h, k_w] in the plain-text format."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 3:
        raise ValueError(f"expected [C, k_h, k_w], got {w.shape}")
    c, kh, kw = w.shape
    lines = [f"{c} {kh} {kw}"]
    for ch in range(c):
        for i in range(kh):
            lines.append(" ".join(repr(float(v)) for v in w[ch, i]))
    Path(path).write_text("\n".join(lines) + "\n")
