# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled int64 rational tableau.

Mirrors _pivot_py cell-for-cell: normalized fractions (den > 0, reduced,
zero as 0/1) and the identical Gauss-Jordan pivot, but on fixed-width
machine words with __int128 intermediates.  Cross-gcd reduction before
every multiply keeps products inside 126 bits; any value that will not
reduce back into int64 aborts the pivot with KernelOverflow *before* the
front buffer is touched (updates go to a back buffer, swapped only on
success), so the caller can lift the intact tableau to the pure backend
and repeat the pivot there.
"""

import array

from cpython cimport array

from ._errors import KernelOverflow

cdef extern from *:
    ctypedef long long int128 "__int128_t"

cdef long long LLMAX = 0x7FFFFFFFFFFFFFFF


cdef inline long long ll_abs(long long x) noexcept:
    return -x if x < 0 else x


cdef inline long long gcd_ll(long long a, long long b) noexcept:
    # Euclid on non-negative inputs
    cdef long long t
    while b:
        t = a % b
        a = b
        b = t
    return a


cdef inline int128 gcd_128(int128 a, int128 b) noexcept:
    cdef int128 t
    while b:
        t = a % b
        a = b
        b = t
    return a


cdef inline int frac_mul(long long an, long long ad, long long bn, long long bd,
                         long long *rn, long long *rd) noexcept:
    """r = a * b, reduced; 0 on success, -1 if the result escapes int64."""
    cdef long long g1, g2
    cdef int128 n, d, g
    if an == 0 or bn == 0:
        rn[0] = 0
        rd[0] = 1
        return 0
    g1 = gcd_ll(ll_abs(an), bd)
    g2 = gcd_ll(ll_abs(bn), ad)
    n = <int128> (an // g1) * (bn // g2)
    d = <int128> (ad // g2) * (bd // g1)
    if d < 0:
        n = -n
        d = -d
    g = gcd_128(-n if n < 0 else n, d)
    n //= g
    d //= g
    if n > LLMAX or -n > LLMAX or d > LLMAX:
        return -1
    rn[0] = <long long> n
    rd[0] = <long long> d
    return 0


cdef inline int frac_sub(long long xn, long long xd, long long tn, long long td,
                         long long *rn, long long *rd) noexcept:
    """r = x - t, reduced; 0 on success, -1 on overflow."""
    cdef long long g, tdg, xdg
    cdef int128 n, d, g2
    if tn == 0:
        rn[0] = xn
        rd[0] = xd
        return 0
    g = gcd_ll(xd, td)
    tdg = td // g
    xdg = xd // g
    n = <int128> xn * tdg - <int128> tn * xdg
    if n == 0:
        rn[0] = 0
        rd[0] = 1
        return 0
    d = <int128> xd * tdg
    g2 = gcd_128(-n if n < 0 else n, d)
    n //= g2
    d //= g2
    if n > LLMAX or -n > LLMAX or d > LLMAX:
        return -1
    rn[0] = <long long> n
    rd[0] = <long long> d
    return 0


cdef class CyTableau:
    cdef public int rows
    cdef public int cols
    cdef array.array _fn, _fd, _bn, _bd
    cdef long long[::1] fn, fd, bn, bd

    backend = "compiled"

    def __init__(self, rows, cols, nums, dens):
        if len(nums) != rows * cols or len(dens) != rows * cols:
            raise ValueError("flat buffers disagree with rows*cols")
        self.rows = rows
        self.cols = cols
        try:
            self._fn = array.array("q", nums)
            self._fd = array.array("q", dens)
        except OverflowError as exc:
            raise KernelOverflow("initial tableau exceeds int64") from exc
        self._bn = array.array("q", bytes(8 * rows * cols))
        self._bd = array.array("q", bytes(8 * rows * cols))
        self.fn = self._fn
        self.fd = self._fd
        self.bn = self._bn
        self.bd = self._bd
        cdef Py_ssize_t i
        for i in range(rows * cols):
            if self.fd[i] <= 0:
                raise ValueError("cell %d has non-positive denominator" % i)

    def cell(self, int r, int c):
        cdef Py_ssize_t i = r * self.cols + c
        return self.fn[i], self.fd[i]

    def row_list(self, int r):
        cdef Py_ssize_t i = r * self.cols
        return (
            self._fn[i : i + self.cols].tolist(),
            self._fd[i : i + self.cols].tolist(),
        )

    def col_list(self, int c):
        cdef array.array out_n = array.array("q", bytes(8 * self.rows))
        cdef array.array out_d = array.array("q", bytes(8 * self.rows))
        cdef long long[::1] vn = out_n
        cdef long long[::1] vd = out_d
        cdef Py_ssize_t r, i = c
        for r in range(self.rows):
            vn[r] = self.fn[i]
            vd[r] = self.fd[i]
            i += self.cols
        return out_n.tolist(), out_d.tolist()

    def snapshot(self):
        """Front buffers as Python lists, for lifting to the pure backend."""
        return self._fn.tolist(), self._fd.tolist()

    def pivot(self, int pr, int pc):
        cdef int cols = self.cols
        cdef Py_ssize_t base = pr * cols
        cdef long long pn = self.fn[base + pc]
        cdef long long pd = self.fd[base + pc]
        cdef Py_ssize_t r, j, o
        cdef long long fn_, fd_, xn, xd, tn, td
        cdef long long[::1] f_n = self.fn
        cdef long long[::1] f_d = self.fd
        cdef long long[::1] b_n = self.bn
        cdef long long[::1] b_d = self.bd
        if pn == 0:
            raise ZeroDivisionError("pivot on zero cell")
        if pn < 0:
            pn = -pn
            pd = -pd
        # scaled pivot row -> back buffer
        for j in range(base, base + cols):
            if f_n[j] == 0:
                b_n[j] = 0
                b_d[j] = 1
            elif frac_mul(f_n[j], f_d[j], pd, pn, &b_n[j], &b_d[j]) != 0:
                raise KernelOverflow("pivot row scale overflow")
        for r in range(self.rows):
            if r == pr:
                continue
            o = r * cols
            fn_ = f_n[o + pc]
            fd_ = f_d[o + pc]
            if fn_ == 0:
                for j in range(cols):
                    b_n[o + j] = f_n[o + j]
                    b_d[o + j] = f_d[o + j]
                continue
            for j in range(cols):
                if b_n[base + j] == 0:
                    b_n[o + j] = f_n[o + j]
                    b_d[o + j] = f_d[o + j]
                    continue
                if frac_mul(fn_, fd_, b_n[base + j], b_d[base + j], &tn, &td) != 0:
                    raise KernelOverflow("row update overflow")
                if frac_sub(f_n[o + j], f_d[o + j], tn, td, &xn, &xd) != 0:
                    raise KernelOverflow("row update overflow")
                b_n[o + j] = xn
                b_d[o + j] = xd
        self._fn, self._bn = self._bn, self._fn
        self._fd, self._bd = self._bd, self._fd
        self.fn = self._fn
        self.fd = self._fd
        self.bn = self._bn
        self.bd = self._bd

    def pivot_unit(self, int pr, int pc):
        """Pivot where column pc is zero outside row pr and the objective
        row, so only those two rows change.  Verified before touching
        anything; on overflow both rows are restored from the back
        buffer, keeping the pivot atomic."""
        cdef int cols = self.cols
        cdef int obj = self.rows - 1
        cdef Py_ssize_t base = pr * cols
        cdef Py_ssize_t o = obj * cols
        cdef Py_ssize_t r, j
        cdef long long pn, pd, fn_, fd_, tn, td, xn, xd
        cdef long long[::1] f_n = self.fn
        cdef long long[::1] f_d = self.fd
        cdef long long[::1] b_n = self.bn
        cdef long long[::1] b_d = self.bd
        for r in range(obj):
            if r != <Py_ssize_t> pr and f_n[r * cols + pc] != 0:
                raise ValueError(
                    "column %d not unit outside row %d" % (pc, pr)
                )
        pn = f_n[base + pc]
        pd = f_d[base + pc]
        if pn == 0:
            raise ZeroDivisionError("pivot on zero cell")
        if pn < 0:
            pn = -pn
            pd = -pd
        # stash both rows so an overflow can roll back
        for j in range(cols):
            b_n[base + j] = f_n[base + j]
            b_d[base + j] = f_d[base + j]
            b_n[o + j] = f_n[o + j]
            b_d[o + j] = f_d[o + j]
        try:
            for j in range(base, base + cols):
                if f_n[j] == 0:
                    continue
                if frac_mul(f_n[j], f_d[j], pd, pn, &f_n[j], &f_d[j]) != 0:
                    raise KernelOverflow("pivot row scale overflow")
            fn_ = f_n[o + pc]
            if fn_ == 0:
                return
            fd_ = f_d[o + pc]
            for j in range(cols):
                if f_n[base + j] == 0:
                    continue
                if frac_mul(fn_, fd_, f_n[base + j], f_d[base + j], &tn, &td) != 0:
                    raise KernelOverflow("objective update overflow")
                if frac_sub(f_n[o + j], f_d[o + j], tn, td, &xn, &xd) != 0:
                    raise KernelOverflow("objective update overflow")
                f_n[o + j] = xn
                f_d[o + j] = xd
        except KernelOverflow:
            for j in range(cols):
                f_n[base + j] = b_n[base + j]
                f_d[base + j] = b_d[base + j]
                f_n[o + j] = b_n[o + j]
                f_d[o + j] = b_d[o + j]
            raise
