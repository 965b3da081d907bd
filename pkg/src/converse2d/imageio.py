"""PGM/PPM image I/O and the PSNR metric.

Images are carried as float arrays of shape (C, H, W) with C in {1, 3}
and values in [0, 1].  Loading divides by the file's maxval; saving
clamps to [0, 1] and quantizes to 8 bits.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import UnsupportedImageFormat

__all__ = ["read_image", "write_image", "psnr"]


def _tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping # comments."""
    i = 0
    n = len(data)
    while i < n:
        ch = data[i:i + 1]
        if ch.isspace():
            i += 1
        elif ch == b"#":
            while i < n and data[i:i + 1] != b"\n":
                i += 1
        else:
            j = i
            while j < n and not data[j:j + 1].isspace():
                j += 1
            yield data[i:j], j
            i = j


def read_image(path: str | Path) -> np.ndarray:
    """Read a PGM (P2/P5) or PPM (P3/P6) file as (C, H, W) floats in [0, 1]."""
    data = Path(path).read_bytes()
    toks = _tokens(data)
    try:
        magic, _ = next(toks)
    except StopIteration:
        raise UnsupportedImageFormat(f"{path}: empty file") from None
    magic = magic.decode("ascii", "replace")
    if magic not in ("P2", "P3", "P5", "P6"):
        raise UnsupportedImageFormat(f"{path}: unsupported magic {magic!r}")
    channels = 3 if magic in ("P3", "P6") else 1
    try:
        (w_tok, _), (h_tok, _), (mv_tok, end) = next(toks), next(toks), next(toks)
        width, height, maxval = int(w_tok), int(h_tok), int(mv_tok)
    except (StopIteration, ValueError):
        raise UnsupportedImageFormat(f"{path}: malformed header") from None
    if width < 1 or height < 1 or maxval < 1:
        raise UnsupportedImageFormat(f"{path}: bad dimensions or maxval")

    count = width * height * channels
    if magic in ("P5", "P6"):
        # exactly one whitespace byte separates maxval from the raster
        raster = data[end + 1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        expected = count * dtype.itemsize
        if len(raster) < expected:
            raise UnsupportedImageFormat(f"{path}: truncated raster")
        flat = np.frombuffer(raster[:expected], dtype=dtype).astype(np.float64)
    else:
        vals = []
        try:
            for tok, _ in toks:
                vals.append(int(tok))
        except ValueError:
            raise UnsupportedImageFormat(f"{path}: non-numeric sample") from None
        if len(vals) < count:
            raise UnsupportedImageFormat(f"{path}: truncated raster")
        flat = np.array(vals[:count], dtype=np.float64)

    img = flat.reshape(height, width, channels).transpose(2, 0, 1)
    return img / float(maxval)


def write_image(path: str | Path, img: np.ndarray) -> None:
    """Write (C, H, W) floats as binary PGM (C=1) or PPM (C=3), 8-bit."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[0] not in (1, 3):
        raise UnsupportedImageFormat(
            f"expected (C, H, W) with C in {{1, 3}}, got shape {img.shape}"
        )
    c, h, w = img.shape
    quant = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    magic = b"P5" if c == 1 else b"P6"
    header = magic + f"\n{w} {h}\n255\n".encode("ascii")
    Path(path).write_bytes(header + quant.transpose(1, 2, 0).tobytes())


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10 log10(1 / MSE) for [0, 1]-scaled images; inf on exact match."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)
