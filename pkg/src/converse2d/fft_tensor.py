"""Rank-4 array primitives: per-channel 2-D FFT, padding, resampling.

All functions operate on arrays of shape (B, C, H, W).  Real arrays are
float64, spectra are complex128.  Every function is pure: inputs are never
mutated and the output is a fresh array.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import (
    CropTooLarge,
    IndivisibleShape,
    PadTooLarge,
    RealnessViolation,
)

__all__ = [
    "PadMode",
    "fft2",
    "ifft2",
    "pad",
    "crop",
    "upsample_zero",
    "interp_nearest",
    "block_mean",
    "tile",
]

# max |imag| allowed relative to max |real| when dropping the imaginary
# part in ifft2
IMAG_RESIDUE_TOL = 1e-10


class PadMode(Enum):
    """Border handling for :func:`pad`."""

    ZERO = "zero"
    REFLECT = "reflect"
    REPLICATE = "replicate"
    CIRCULAR = "circular"

    @property
    def numpy_mode(self) -> str:
        return {
            PadMode.ZERO: "constant",
            PadMode.REFLECT: "reflect",
            PadMode.REPLICATE: "edge",
            PadMode.CIRCULAR: "wrap",
        }[self]


def _check_rank4(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t)
    if t.ndim != 4:
        raise ValueError(f"expected a rank-4 array, got shape {t.shape}")
    return t


def fft2(t: np.ndarray) -> np.ndarray:
    """Unnormalized forward DFT over the last two axes, per (b, c) plane."""
    t = _check_rank4(t)
    return np.fft.fftn(t, axes=(-2, -1))


def ifft2(s: np.ndarray) -> np.ndarray:
    """Inverse DFT with 1/(H*W) normalization, returning the real part.

    The discarded imaginary part must be negligible; a large residue means
    the caller composed a non-conjugate-symmetric spectrum, which is an
    internal bug, so it raises :class:`RealnessViolation` instead of
    silently returning garbage.
    """
    s = _check_rank4(s)
    full = np.fft.ifftn(s, axes=(-2, -1))
    real = full.real
    residue = np.abs(full.imag).max()
    if residue >= IMAG_RESIDUE_TOL * (np.abs(real).max() + 1.0):
        raise RealnessViolation(
            f"imaginary residue {residue:.3e} exceeds tolerance; "
            "spectrum is not conjugate symmetric"
        )
    return np.ascontiguousarray(real)


def pad(t: np.ndarray, mode: PadMode, p: int) -> np.ndarray:
    """Pad the two spatial axes by p on every border."""
    t = _check_rank4(t)
    if p < 0:
        raise ValueError("pad size must be non-negative")
    if p == 0:
        return t.copy()
    h, w = t.shape[-2:]
    if mode is PadMode.REFLECT and p >= min(h, w):
        raise PadTooLarge(
            f"reflect pad {p} needs input larger than {p} (got {h}x{w})"
        )
    widths = ((0, 0), (0, 0), (p, p), (p, p))
    return np.pad(t, widths, mode=mode.numpy_mode)


def crop(t: np.ndarray, p: int) -> np.ndarray:
    """Remove p rows/columns from every border; inverse of :func:`pad`."""
    t = _check_rank4(t)
    if p < 0:
        raise ValueError("crop size must be non-negative")
    if p == 0:
        return t.copy()
    h, w = t.shape[-2:]
    if h <= 2 * p or w <= 2 * p:
        raise CropTooLarge(f"cannot crop {p} from each border of {h}x{w}")
    return t[..., p:-p, p:-p].copy()


def upsample_zero(t: np.ndarray, s: int) -> np.ndarray:
    """s-fold upsampling by zero insertion: out[..., i*s, j*s] = t[..., i, j]."""
    t = _check_rank4(t)
    if s < 1:
        raise ValueError("scale must be >= 1")
    if s == 1:
        return t.copy()
    b, c, h, w = t.shape
    out = np.zeros((b, c, h * s, w * s), dtype=t.dtype)
    out[..., ::s, ::s] = t
    return out


def interp_nearest(t: np.ndarray, s: int) -> np.ndarray:
    """s-fold nearest-neighbour upsampling: out[..., i, j] = t[..., i//s, j//s]."""
    t = _check_rank4(t)
    if s < 1:
        raise ValueError("scale must be >= 1")
    if s == 1:
        return t.copy()
    return np.repeat(np.repeat(t, s, axis=-2), s, axis=-1)


def block_mean(s: np.ndarray, stride: int) -> np.ndarray:
    """Mean over the stride^2 distinct frequency sub-blocks.

    Splits the (H, W) plane into a stride x stride grid of (H/stride,
    W/stride) sub-blocks and averages them.  This is the spectral
    counterpart of spatial s-fold decimation.
    """
    s = _check_rank4(s)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if stride == 1:
        return s.copy()
    b, c, h, w = s.shape
    if h % stride or w % stride:
        raise IndivisibleShape(
            f"{h}x{w} plane not divisible by stride {stride}"
        )
    hb, wb = h // stride, w // stride
    blocks = s.reshape(b, c, stride, hb, stride, wb)
    return blocks.mean(axis=(2, 4))


def tile(s: np.ndarray, stride: int) -> np.ndarray:
    """Tile the spatial plane stride x stride times along the last two axes."""
    s = _check_rank4(s)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if stride == 1:
        return s.copy()
    return np.tile(s, (1, 1, stride, stride))
