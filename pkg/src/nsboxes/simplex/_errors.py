"""Exceptions shared by the simplex backends.

Kept in a leaf module so the compiled kernel and the pure backend can both
raise the same types without importing the driver.
"""


class KernelOverflow(ArithmeticError):
    """An int64 tableau update would not fit; the caller must lift to the
    arbitrary-precision backend and redo the pivot."""


class UnboundedError(RuntimeError):
    """The objective is unbounded below over the feasible region."""
