"""Closed-form FFT-domain reverse convolution (Converse2D) and friends.

The core entry points are :func:`converse_solve` (general stride) and
:func:`converse_s1_fast` (stride-1 Tikhonov inverse filter), with a dense
least-squares oracle in :mod:`converse2d.oracle` for exact verification
and block/network assembly in :mod:`converse2d.blocks`.
"""

from .errors import (
    Converse2dError,
    CropTooLarge,
    DimensionMismatch,
    IndivisibleShape,
    KernelTooLarge,
    MalformedKernel,
    PadTooLarge,
    RealnessViolation,
    ScaleNotOne,
    UnsupportedImageFormat,
)
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
from .operator import (
    ConverseConfig,
    KernelBank,
    LambdaParam,
    X0Strategy,
    circular_forward,
    converse_s1_fast,
    converse_solve,
    lambda_of,
    load_kernel_file,
    normalize_kernel,
    p2o,
    save_kernel_file,
)

__version__ = "0.1.0"
