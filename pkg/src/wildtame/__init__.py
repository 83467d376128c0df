"""Wild and tame kernels of quadratic fields at p = 3."""

__version__ = "0.1.0"
