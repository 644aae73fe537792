"""Exact rational simplex: compiled int64 pivot kernel with a pure
big-int fallback, selected at import (set NSBOXES_PURE=1 to force the
fallback)."""

from ._errors import KernelOverflow, UnboundedError
from .driver import (
    ExactSimplex,
    SimplexResult,
    default_backend_name,
    kernel_available,
)

__all__ = [
    "ExactSimplex",
    "SimplexResult",
    "KernelOverflow",
    "UnboundedError",
    "default_backend_name",
    "kernel_available",
]
