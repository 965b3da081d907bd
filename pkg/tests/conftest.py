import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20250826)


def naive_dft2(plane):
    """Direct O(N^2) 2-D DFT of a single (H, W) plane; the FFT oracle."""
    h, w = plane.shape
    out = np.zeros((h, w), dtype=np.complex128)
    for u in range(h):
        for v in range(w):
            acc = 0.0 + 0.0j
            for i in range(h):
                for j in range(w):
                    acc += plane[i, j] * np.exp(
                        -2j * np.pi * (u * i / h + v * j / w)
                    )
            out[u, v] = acc
    return out


def circular_conv_loops(x, k):
    """Nested-loop circular convolution with a centered kernel; oracle."""
    h, w = x.shape
    kh, kw = k.shape
    ch, cw = kh // 2, kw // 2
    out = np.zeros_like(x)
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for di in range(kh):
                for dj in range(kw):
                    acc += k[di, dj] * x[(i - (di - ch)) % h, (j - (dj - cw)) % w]
            out[i, j] = acc
    return out
