"""Compare the compiled pivot kernel against the pure-Python tableau.

Records the exact pivot sequence of a real polytope-distance solve,
replays it raw on each backend to time the arithmetic alone, then runs
the same solves end to end through the driver.  Run from the repository
root:

    python3 benchmarks/bench_pivot.py
"""

import time

from nsboxes.anf import BooleanFunctionANF
from nsboxes.boxes import make_full_correlation, make_npr
from nsboxes.localdist import _assemble_full, l1_distance_to_local
from nsboxes.simplex import ExactSimplex, kernel_available
from nsboxes.simplex._pivot_py import PureTableau


class RecordingSimplex(ExactSimplex):
    """Driver that logs every (kind, row, col) pivot it performs."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.log = []

    def _pivot(self, pr, pc):
        self.log.append((False, pr, pc))
        super()._pivot(pr, pc)

    def _pivot_unit(self, pr, pc):
        self.log.append((True, pr, pc))
        super()._pivot_unit(pr, pc)


def distance_problem(box):
    nrows, ncols, nums, dens, basis = _assemble_full(box)
    nent = (1 << box.n) ** 2
    nvert = 1 << (2 * box.n)
    pairs = {}
    for e in range(nent):
        pairs[nvert + e] = (nvert + nent + e, 2)
        pairs[nvert + nent + e] = (nvert + e, 2)
    return nrows, ncols, nums, dens, basis, pairs


def replay(label, cls, rows, cols, nums, dens, log):
    t = cls(rows, cols, nums, dens)
    t0 = time.perf_counter()
    for unit, pr, pc in log:
        if unit:
            t.pivot_unit(pr, pc)
        else:
            t.pivot(pr, pc)
    dt = time.perf_counter() - t0
    full = sum(1 for u, _, _ in log if not u)
    cell_ns = dt / (max(full, 1) * rows * cols) * 1e9
    print(
        f"  {label:<9} {len(log)} pivots ({full} full) on {rows}x{cols} "
        f"in {dt * 1e3:7.1f} ms ({cell_ns:6.1f} ns/cell of full pivots)"
    )
    return dt


def time_distance(box, label, force_pure):
    t0 = time.perf_counter()
    cert = l1_distance_to_local(box, force_pure=force_pure)
    dt = time.perf_counter() - t0
    per = dt / cert.pivots if cert.pivots else float("nan")
    print(
        f"  {label:<28} {cert.backend:<9} {cert.pivots:>5} pivots "
        f"{dt * 1e3:>9.1f} ms  ({per * 1e3:.2f} ms/pivot)"
    )
    return cert


def main():
    print("kernel available:", kernel_available())

    box = make_npr(3)
    rows, cols, nums, dens, basis, pairs = distance_problem(box)
    rec = RecordingSimplex(
        rows, cols, nums, dens, basis, residual_pairs=pairs, force_pure=True
    )
    rec.solve()
    print(f"\nreplaying a recorded 3-party distance solve ({rows}x{cols}):")
    t_pure = replay("pure", PureTableau, rows, cols, nums, dens, rec.log)
    if kernel_available():
        from nsboxes.simplex._pivot_cy import CyTableau

        t_comp = replay("compiled", CyTableau, rows, cols, nums, dens, rec.log)
        print(f"  speedup: {t_pure / t_comp:.1f}x")

    print("\npolytope-distance solves (end to end):")
    box4 = make_full_correlation(
        BooleanFunctionANF.from_terms(4, [[1, 2, 3], [1, 4]])
    )
    for b, label in ((box, "3 parties (66x193)"), (box4, "4 parties (258x769)")):
        if kernel_available():
            time_distance(b, label, force_pure=False)
        time_distance(b, label + " [pure]", force_pure=True)


if __name__ == "__main__":
    main()
