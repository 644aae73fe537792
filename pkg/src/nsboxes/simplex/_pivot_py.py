"""Pure-Python dense rational tableau.

Cells are normalized fractions stored as two flat lists of Python ints
(numerators and denominators): den > 0, gcd(|num|, den) == 1, zero is 0/1.
Python ints never overflow, so this backend is the correctness reference
and the landing spot when the compiled int64 kernel overflows.

The pivot is the textbook Gauss-Jordan step: scale the pivot row by the
inverse of the pivot element, then subtract multiples of the scaled row
from every other row.  Both backends implement exactly this update, so a
solve produces identical tableaus cell-for-cell no matter where it runs.
"""

from math import gcd


class PureTableau:
    backend = "pure"

    __slots__ = ("rows", "cols", "nums", "dens")

    def __init__(self, rows, cols, nums, dens):
        if len(nums) != rows * cols or len(dens) != rows * cols:
            raise ValueError("flat buffers disagree with rows*cols")
        self.rows = rows
        self.cols = cols
        self.nums = list(nums)
        self.dens = list(dens)
        for i, d in enumerate(self.dens):
            if d <= 0:
                raise ValueError(f"cell {i} has non-positive denominator {d}")

    def cell(self, r, c):
        i = r * self.cols + c
        return self.nums[i], self.dens[i]

    def row_list(self, r):
        i = r * self.cols
        return self.nums[i : i + self.cols], self.dens[i : i + self.cols]

    def col_list(self, c):
        return self.nums[c :: self.cols], self.dens[c :: self.cols]

    def snapshot(self):
        return list(self.nums), list(self.dens)

    def pivot_unit(self, pr, pc):
        """Pivot where column pc is zero outside row pr and the objective
        row, so only those two rows change.  The caller promises this
        (residual-pair partner columns have it by construction); it is
        verified here because a violation would corrupt the tableau."""
        cols = self.cols
        nums = self.nums
        dens = self.dens
        obj = self.rows - 1
        for r in range(obj):
            if r != pr and nums[r * cols + pc] != 0:
                raise ValueError(f"column {pc} not unit outside row {pr}")
        base = pr * cols
        pn = nums[base + pc]
        pd = dens[base + pc]
        if pn == 0:
            raise ZeroDivisionError("pivot on zero cell")
        if pn < 0:
            pn, pd = -pn, -pd
        for j in range(base, base + cols):
            xn = nums[j]
            if xn == 0:
                continue
            xd = dens[j]
            g1 = gcd(abs(xn), pn)
            g2 = gcd(abs(pd), xd)
            nn = (xn // g1) * (pd // g2)
            nd = (xd // g2) * (pn // g1)
            if nd < 0:
                nn, nd = -nn, -nd
            nums[j] = nn
            dens[j] = nd
        o = obj * cols
        fn = nums[o + pc]
        if fn == 0:
            return
        fd = dens[o + pc]
        for j in range(cols):
            yn = nums[base + j]
            if yn == 0:
                continue
            yd = dens[base + j]
            g1 = gcd(abs(fn), yd)
            g2 = gcd(abs(yn), fd)
            tn = (fn // g1) * (yn // g2)
            td = (fd // g2) * (yd // g1)
            xn = nums[o + j]
            xd = dens[o + j]
            g = gcd(xd, td)
            tdg = td // g
            xdg = xd // g
            rn = xn * tdg - tn * xdg
            if rn == 0:
                nums[o + j] = 0
                dens[o + j] = 1
                continue
            rd = xd * tdg
            g = gcd(abs(rn), rd)
            nums[o + j] = rn // g
            dens[o + j] = rd // g

    def pivot(self, pr, pc):
        cols = self.cols
        nums = self.nums
        dens = self.dens
        base = pr * cols
        pn = nums[base + pc]
        pd = dens[base + pc]
        if pn == 0:
            raise ZeroDivisionError("pivot on zero cell")

        # Scale the pivot row by pd/pn, keeping denominators positive.
        if pn < 0:
            pn, pd = -pn, -pd
        for j in range(base, base + cols):
            xn = nums[j]
            if xn == 0:
                continue
            xd = dens[j]
            # x * pd/pn with cross-reduction before the multiply
            g1 = gcd(abs(xn), pn)
            g2 = gcd(abs(pd), xd)
            nn = (xn // g1) * (pd // g2)
            nd = (xd // g2) * (pn // g1)
            if nd < 0:
                nn, nd = -nn, -nd
            nums[j] = nn
            dens[j] = nd

        srow_n = nums[base : base + cols]
        srow_d = dens[base : base + cols]
        for r in range(self.rows):
            if r == pr:
                continue
            o = r * cols
            fn = nums[o + pc]
            if fn == 0:
                continue
            fd = dens[o + pc]
            for j in range(cols):
                yn = srow_n[j]
                if yn == 0:
                    continue
                yd = srow_d[j]
                # t = fac * y, cross-reduced
                g1 = gcd(abs(fn), yd)
                g2 = gcd(abs(yn), fd)
                tn = (fn // g1) * (yn // g2)
                td = (fd // g2) * (yd // g1)
                # cell = cell - t
                xn = nums[o + j]
                xd = dens[o + j]
                g = gcd(xd, td)
                tdg = td // g
                xdg = xd // g
                rn = xn * tdg - tn * xdg
                if rn == 0:
                    nums[o + j] = 0
                    dens[o + j] = 1
                    continue
                rd = xd * tdg
                g = gcd(abs(rn), rd)
                nums[o + j] = rn // g
                dens[o + j] = rd // g
