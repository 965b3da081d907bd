"""Exception types raised by the converse2d package."""


class Converse2dError(Exception):
    """Base class for all package-specific errors."""


class RealnessViolation(Converse2dError):
    """An inverse FFT produced a significant imaginary residue.

    Raised when a spectrum handed to :func:`ifft2` is not conjugate
    symmetric, which indicates an internal composition bug rather than
    bad user input.
    """


class PadTooLarge(Converse2dError):
    """Reflect padding requested with pad size >= the spatial extent."""


class CropTooLarge(Converse2dError):
    """Crop would remove all rows or columns."""


class IndivisibleShape(Converse2dError):
    """Spatial dimensions are not divisible by the requested stride."""


class KernelTooLarge(Converse2dError):
    """Kernel does not fit inside the target plane."""


class ScaleNotOne(Converse2dError):
    """The s=1 fast path was called with a config whose scale is not 1."""


class DimensionMismatch(Converse2dError):
    """Vector/matrix dimensions are inconsistent."""


class MalformedKernel(Converse2dError):
    """A kernel file could not be parsed."""


class UnsupportedImageFormat(Converse2dError):
    """Image file is not a readable PGM/PPM."""
