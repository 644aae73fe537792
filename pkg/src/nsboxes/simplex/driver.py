"""Exact revised-tableau simplex driver.

The driver owns the algorithm (pricing, ratio test, anti-cycling, basis
bookkeeping) and delegates only the arithmetic-heavy pivot to a backend:
the compiled int64 kernel when it is importable and the data fits, else
the pure big-int tableau.  Both backends produce bit-identical tableaus,
so which one ran is a performance detail, not a semantic one.

Tableau layout: rows 0..m-1 are constraint rows in canonical form for
`basis` (basic columns are unit vectors, right-hand sides non-negative),
row m is the objective row holding reduced costs and -z in the rhs cell.

Rules, chosen for determinism across backends:
  entering: most negative reduced cost by exact comparison, ties to the
    lowest column index.
  leaving: first row attaining the minimum ratio.  That rule alone can
    cycle in theory, so solve() keeps an exact watchdog: hashes of the
    sorted basis are collected while the objective value sits still,
    and a repeat (the same basis seen twice at the same objective, a
    provable cycle) switches the run permanently to Bland's rule,
    smallest-index entering with smallest-basic-index tie-breaking on
    the leaving row, which terminates from any feasible tableau.

For L1-fitting problems the caller can declare residual column pairs
(columns p, q with A_q = -A_p and positive costs, like the split
residuals r+/r- of an absolute value).  The leaving step then takes
long steps: when the blocking row's basic variable is one half of a
pair, swapping in the other half is a pivot on a +-1 unit column that
touches only that row and the objective row, and the walk keeps
crossing such breakpoints while the entering column's directional
derivative stays negative.  Breakpoints at ratio zero are crossed too;
the flip keeps a zero basic value at zero, so feasibility holds.  One
long step does the work of many plain pivots, which matters because a
plain pivot rewrites the whole tableau.
"""

import os
from dataclasses import dataclass
from fractions import Fraction

from ._errors import KernelOverflow, UnboundedError
from ._pivot_py import PureTableau

_FORCE_PURE = bool(os.environ.get("NSBOXES_PURE"))

try:
    from ._pivot_cy import CyTableau
except ImportError:
    CyTableau = None

_INT64_MAX = (1 << 63) - 1


def kernel_available() -> bool:
    return CyTableau is not None and not _FORCE_PURE


def default_backend_name() -> str:
    return "compiled" if kernel_available() else "pure"


@dataclass(frozen=True)
class SimplexResult:
    objective: Fraction
    pivots: int
    flips: int
    backend: str
    bland_switched: bool


class ExactSimplex:
    def __init__(self, rows, cols, nums, dens, basis, *,
                 residual_pairs=None, force_pure=False):
        if len(basis) != rows - 1:
            raise ValueError("basis length must equal the constraint row count")
        self.rows = rows
        self.cols = cols
        self.basis = list(basis)
        self._lifted = False
        self.pairs = {}
        if residual_pairs:
            for col, (partner, gain) in residual_pairs.items():
                gain = Fraction(gain)
                if gain <= 0:
                    raise ValueError("residual pair gain must be positive")
                self.pairs[col] = (partner, gain)
            for col, (partner, gain) in self.pairs.items():
                back = self.pairs.get(partner)
                if back is None or back[0] != col or back[1] != gain:
                    raise ValueError("residual pairs must be symmetric")
        use_pure = force_pure or _FORCE_PURE or CyTableau is None
        if not use_pure:
            use_pure = any(
                abs(v) > _INT64_MAX for v in nums
            ) or any(v > _INT64_MAX for v in dens)
        if use_pure:
            self._t = PureTableau(rows, cols, nums, dens)
        else:
            self._t = CyTableau(rows, cols, nums, dens)
        rn, rd = self._t.col_list(cols - 1)
        for r in range(rows - 1):
            if rn[r] < 0:
                raise ValueError(f"infeasible start: rhs of row {r} is negative")

    @classmethod
    def from_fractions(cls, cell_rows, basis, **kwargs):
        """Build from a list of rows of Fractions (rhs last, objective row
        last); the canonical-form requirements are the caller's contract."""
        rows = len(cell_rows)
        cols = len(cell_rows[0])
        nums = []
        dens = []
        for row in cell_rows:
            if len(row) != cols:
                raise ValueError("ragged tableau")
            for v in row:
                f = Fraction(v)
                nums.append(f.numerator)
                dens.append(f.denominator)
        return cls(rows, cols, nums, dens, basis, **kwargs)

    # -- inspection ----------------------------------------------------

    def cell(self, r, c) -> Fraction:
        n, d = self._t.cell(r, c)
        return Fraction(n, d)

    def objective_value(self) -> Fraction:
        return -self.cell(self.rows - 1, self.cols - 1)

    def reduced_cost(self, j) -> Fraction:
        return self.cell(self.rows - 1, j)

    def basic_values(self) -> dict:
        rn, rd = self._t.col_list(self.cols - 1)
        return {
            self.basis[r]: Fraction(rn[r], rd[r]) for r in range(self.rows - 1)
        }

    @property
    def backend(self) -> str:
        if self._lifted:
            return "compiled+pure"
        return self._t.backend

    # -- algorithm -----------------------------------------------------

    def _price(self, bland: bool):
        rn, rd = self._t.row_list(self.rows - 1)
        best = None
        bn = bd = 0
        for j in range(self.cols - 1):
            n = rn[j]
            if n >= 0:
                continue
            if bland:
                return j
            d = rd[j]
            if best is None or n * bd < bn * d:
                best, bn, bd = j, n, d
        return best

    def _ratio(self, pc: int, bland: bool = False):
        cn, cd = self._t.col_list(pc)
        hn, hd = self._t.col_list(self.cols - 1)
        if bland:
            # min ratio with ties broken by smallest basic-variable
            # index: together with smallest-index pricing this cannot
            # cycle, from any feasible tableau
            ties = None
            an = ad = 0
            for r in range(self.rows - 1):
                n = cn[r]
                if n <= 0:
                    continue
                num = hn[r] * cd[r]
                den = hd[r] * n
                if ties is None:
                    ties, an, ad = [r], num, den
                    continue
                lhs = num * ad
                rhs = an * den
                if lhs < rhs:
                    ties, an, ad = [r], num, den
                elif lhs == rhs:
                    ties.append(r)
            if ties is None:
                return None
            return min(ties, key=lambda r: self.basis[r])
        # default: first row attaining the minimum ratio; on the highly
        # degenerate distance LPs this wanders plateaus far less than a
        # lexicographic tie-break does, and the cycle detector in
        # solve() covers the (never yet observed) cycling case
        best = None
        an = ad = 0
        for r in range(self.rows - 1):
            n = cn[r]
            if n <= 0:
                continue
            # ratio = (hn/hd) / (n/d) = hn*d / (hd*n), all factors positive
            num = hn[r] * cd[r]
            den = hd[r] * n
            if best is None or num * ad < an * den:
                best, an, ad = r, num, den
        return best

    def _pivot(self, pr: int, pc: int):
        try:
            self._t.pivot(pr, pc)
        except KernelOverflow:
            nums, dens = self._t.snapshot()
            self._t = PureTableau(self.rows, self.cols, nums, dens)
            self._lifted = True
            self._t.pivot(pr, pc)

    def _pivot_unit(self, pr: int, pc: int):
        try:
            self._t.pivot_unit(pr, pc)
        except KernelOverflow:
            nums, dens = self._t.snapshot()
            self._t = PureTableau(self.rows, self.cols, nums, dens)
            self._lifted = True
            self._t.pivot_unit(pr, pc)

    def _advance(self, pc: int, bland: bool) -> int:
        """One step of the entering column pc: either a plain pivot or a
        breakpoint-crossing long step.  Returns the number of residual
        flips performed."""
        if not self.pairs or bland:
            pr = self._ratio(pc, bland)
            if pr is None:
                raise UnboundedError(f"column {pc} improves without bound")
            self._pivot(pr, pc)
            self.basis[pr] = pc
            return 0

        cn, cd = self._t.col_list(pc)
        hn, hd = self._t.col_list(self.cols - 1)
        cands = []
        for r in range(self.rows - 1):
            if cn[r] > 0:
                cands.append((Fraction(hn[r] * cd[r], hd[r] * cn[r]), r))
        if not cands:
            raise UnboundedError(f"column {pc} improves without bound")

        slope = self.reduced_cost(pc)
        reachable = slope
        saw_unpaired = False
        for _, r in cands:
            info = self.pairs.get(self.basis[r])
            if info is None:
                saw_unpaired = True
            else:
                reachable += info[1] * Fraction(cn[r], cd[r])
        if not saw_unpaired and reachable < 0:
            raise UnboundedError(f"column {pc} improves without bound")

        # Cross residual-pair breakpoints (zero-ratio ones included: the
        # flip keeps a zero basic value at zero, so feasibility holds)
        # while the directional derivative stays negative.
        cands.sort(key=lambda item: (item[0], item[1]))
        flips = 0
        for _, r in cands:
            info = self.pairs.get(self.basis[r])
            if info is None:
                break
            partner, gain = info
            step = gain * Fraction(cn[r], cd[r])
            if slope + step >= 0:
                break
            self._pivot_unit(r, partner)
            self.basis[r] = partner
            slope += step
            flips += 1
            if self.reduced_cost(pc) != slope:
                raise AssertionError(
                    "slope bookkeeping diverged from the tableau"
                )
        # The flips changed which rows block, so pick the leaving row
        # fresh.  Crossed rows now have a non-positive coefficient and
        # drop out, so the final step lands at or past every crossed
        # breakpoint and restores any transiently negative rhs.
        pr = self._ratio(pc)
        if pr is None:
            raise AssertionError("long step lost its blocking row")
        self._pivot(pr, pc)
        self.basis[pr] = pc
        return flips

    def solve(self, *, max_pivots: int = 200_000) -> SimplexResult:
        pivots = 0
        flips = 0
        bland = False
        plateau = set()
        prev_obj = self._t.cell(self.rows - 1, self.cols - 1)
        while True:
            pc = self._price(bland)
            if pc is None:
                break
            if pivots >= max_pivots:
                raise RuntimeError(f"no optimum within {max_pivots} pivots")
            flips += self._advance(pc, bland)
            pivots += 1
            obj = self._t.cell(self.rows - 1, self.cols - 1)
            if obj == prev_obj:
                # exact cycle detection: a repeated basis at an unchanged
                # objective means the current rules are looping, so fall
                # back to Bland's rule, which cannot cycle
                key = hash(tuple(sorted(self.basis)))
                if key in plateau:
                    bland = True
                else:
                    plateau.add(key)
            else:
                plateau.clear()
            prev_obj = obj
        return SimplexResult(
            objective=self.objective_value(),
            pivots=pivots,
            flips=flips,
            backend=self.backend,
            bland_switched=bland,
        )
