"""Iterated two-copy distillation of correlated non-local boxes.

One round wires two copies of epsilon*PR + (1-epsilon)*EVEN through the
distillation wiring and lands back in the same family with

    epsilon' = epsilon * (2^(n-1) + 1 - epsilon) / 2^(n-1).

bs_round proves this at the box level for its own output every time: it
composes exact tables, re-derives epsilon' entrywise, and refuses to return
if either the family membership or the scalar map is violated. distill_to
then iterates the scalar map, which squares numerator and denominator sizes
every round; once the exact representation would exceed a configurable bit
budget the trace continues with certified dyadic enclosures (outward
rounding, monotone map), so termination decisions stay rigorous.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .boxes import (
    ConditionalBox,
    NoiseFamilyMember,
    box_equal,
    decompose_epsilon,
    make_even_parity,
    make_npr,
    mix,
)
from .encoding import MAX_PARTIES
from .wiring import WiringProtocol, bs_wiring, compose_adaptive

ONE = Fraction(1)


def _check_n(n: int):
    if not 2 <= n <= MAX_PARTIES:
        raise ValueError(f"n={n} outside supported range 2..{MAX_PARTIES}")


def _t_poly(n: int, eps: Fraction) -> Fraction:
    half_pow = 1 << (n - 1)
    return eps * (half_pow + 1 - eps) / half_pow


def t_map(n: int, eps) -> Fraction:
    """One distillation round on the noise parameter."""
    _check_n(n)
    eps = Fraction(eps)
    if not 0 <= eps <= 1:
        raise ValueError(f"epsilon={eps} outside [0, 1]")
    return _t_poly(n, eps)


def t_derivative(n: int, eps) -> Fraction:
    _check_n(n)
    half_pow = 1 << (n - 1)
    return Fraction(half_pow + 1 - 2 * Fraction(eps), half_pow)


@dataclass(frozen=True)
class StabilityReport:
    n: int
    derivative_at_0: Fraction
    derivative_at_1: Fraction
    classification: tuple  # ("repulsive", "attractive")


def stability_report(n: int) -> StabilityReport:
    """Fixed-point derivatives of the round map at 0 and 1.

    The closed forms 1 + 2^(1-n) and 1 + 2^(1-n) - 2^(2-n) are cross-checked
    against an exact central finite difference with step 1/10^6; the map is
    quadratic, so the difference quotient must agree to well within 1/10^9.
    """
    _check_n(n)
    d0 = t_derivative(n, 0)
    d1 = t_derivative(n, 1)
    assert d0 == 1 + Fraction(1, 1 << (n - 1))
    assert d1 == 1 + Fraction(1, 1 << (n - 1)) - Fraction(1, 1 << (n - 2))
    h = Fraction(1, 10**6)
    tol = Fraction(1, 10**9)
    for point, closed in ((Fraction(0), d0), (ONE, d1)):
        fd = (_t_poly(n, point + h) - _t_poly(n, point - h)) / (2 * h)
        if abs(fd - closed) > tol:
            raise AssertionError(f"finite difference {fd} disagrees with {closed}")
    if not (d0 > 1 and d1 < 1):
        raise AssertionError("fixed-point classification violated")
    return StabilityReport(n, d0, d1, ("repulsive", "attractive"))


def bs_round(member: NoiseFamilyMember) -> NoiseFamilyMember:
    """Compose two copies through the distillation wiring, exactly.

    Verifies that the composed box really is epsilon'*PR + (1-epsilon')*EVEN
    and that epsilon' matches the scalar map; both are hard errors.
    """
    n = member.n
    _check_n(n)
    pr, even = make_npr(n), make_even_parity(n)
    if not (box_equal(member.target, pr) and box_equal(member.local, even)):
        raise ValueError("member must mix the n-party PR box with the even-parity box")
    realized = member.realized()
    composed = compose_adaptive(realized, realized, bs_wiring(n))
    eps_next = decompose_epsilon(composed, pr, even)
    expected = t_map(n, member.epsilon)
    if eps_next != expected:
        raise AssertionError(
            f"composed coefficient {eps_next} != scalar map value {expected}"
        )
    return NoiseFamilyMember(pr, even, eps_next)


@dataclass(frozen=True)
class DistillationTrace:
    """Per-round noise parameters; round k consumes 2^k original copies.

    epsilons holds exact values for as many rounds as fit the bit budget;
    tail_bounds holds certified [lo, hi] enclosures for any later rounds.
    """

    n: int
    epsilons: tuple
    tail_bounds: tuple = ()
    delta: Fraction | None = None

    @property
    def rounds(self) -> int:
        return len(self.epsilons) - 1 + len(self.tail_bounds)

    @property
    def copies_used(self) -> int:
        return 1 << self.rounds

    def final_lower_bound(self) -> Fraction:
        if self.tail_bounds:
            return self.tail_bounds[-1][0]
        return self.epsilons[-1]

    def verify(self) -> bool:
        """Exact prefix must follow the map and increase strictly inside (0,1)."""
        for prev, cur in zip(self.epsilons, self.epsilons[1:]):
            if cur != _t_poly(self.n, prev):
                raise AssertionError("trace breaks the round map")
            if 0 < prev < 1 and not cur > prev:
                raise AssertionError("trace not strictly increasing")
        lo_prev = self.epsilons[-1]
        for lo, hi in self.tail_bounds:
            if not (lo <= hi and lo >= lo_prev):
                raise AssertionError("tail bounds not monotone")
            lo_prev = lo
        return True


def _round_down(value: Fraction, prec: int) -> Fraction:
    scaled = value.numerator * (1 << prec) // value.denominator
    return Fraction(scaled, 1 << prec)


def _round_up(value: Fraction, prec: int) -> Fraction:
    scaled = -((-value.numerator * (1 << prec)) // value.denominator)
    return Fraction(scaled, 1 << prec)


DEFAULT_EXACT_BIT_LIMIT = 1 << 18


def distill_to(
    n: int,
    epsilon0,
    delta,
    *,
    audit_boxlevel: bool = False,
    audit_rounds: int = 6,
    exact_bit_limit: int = DEFAULT_EXACT_BIT_LIMIT,
    max_rounds: int = 100_000,
) -> DistillationTrace:
    """Iterate rounds until 1 - epsilon_m < delta.

    The scalar map is iterated exactly while numerator plus denominator stay
    within exact_bit_limit bits; afterwards certified enclosures take over
    (the map is increasing on [0, 1], so interval iteration is sound). With
    audit_boxlevel the first audit_rounds rounds are recomputed through full
    box-level compositions, which must agree with the scalar map; the cap
    exists because entry sizes square every round, so a full-depth audit
    would dwarf the scalar iteration it is meant to check.
    """
    _check_n(n)
    eps = Fraction(epsilon0)
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError(f"delta={delta} outside (0, 1)")
    if eps == 1:
        raise ValueError("epsilon=1 is already maximal; nothing to distill")
    if eps == 0:
        raise ValueError("epsilon=0 is the repelling fixed point; unreachable target")
    if not 0 < eps < 1:
        raise ValueError(f"epsilon={eps} outside [0, 1]")

    goal = 1 - delta  # stop once epsilon > goal
    exact: list = [eps]
    member = None
    if audit_boxlevel:
        member = NoiseFamilyMember(make_npr(n), make_even_parity(n), eps)

    while exact[-1] <= goal:
        if len(exact) - 1 >= max_rounds:
            raise RuntimeError(f"no convergence within {max_rounds} rounds")
        cur = exact[-1]
        if cur.numerator.bit_length() + cur.denominator.bit_length() > exact_bit_limit:
            break
        nxt = _t_poly(n, cur)
        if audit_boxlevel and len(exact) - 1 < audit_rounds:
            member = bs_round(member)
            if member.epsilon != nxt:
                raise AssertionError("box-level audit disagrees with scalar map")
        exact.append(nxt)
    else:
        return DistillationTrace(n, tuple(exact), (), delta)

    prec = 192
    while True:
        lo, hi = exact[-1], exact[-1]
        tail: list = []
        undecided = False
        while True:
            if len(exact) - 1 + len(tail) >= max_rounds:
                raise RuntimeError(f"no convergence within {max_rounds} rounds")
            lo = _round_down(_t_poly(n, lo), prec)
            hi = _round_up(_t_poly(n, hi), prec)
            if hi > 1:
                hi = ONE
            tail.append((lo, hi))
            if lo > goal:
                return DistillationTrace(n, tuple(exact), tuple(tail), delta)
            if hi > goal:
                undecided = True  # enclosure straddles the threshold
                break
        if undecided:
            prec *= 2
            if prec > 1 << 16:
                raise RuntimeError("cannot certify the stopping round; threshold too tight")


@dataclass(frozen=True)
class RelationsReport:
    n: int
    pr_pr: bool
    pr_pc: bool
    pc_pr: bool
    pc_pc: bool

    @property
    def all_hold(self) -> bool:
        return self.pr_pr and self.pr_pc and self.pc_pr and self.pc_pc


def verify_relations(n: int, wiring: WiringProtocol | None = None) -> RelationsReport:
    """Exact composition table of {PR, EVEN} x {PR, EVEN} under the wiring.

    PRxPR, PRxEVEN give PR; EVENxEVEN gives EVEN; EVENxPR gives the mixture
    with weight 2^(1-n) on PR. A custom wiring can be supplied to show the
    checker actually discriminates.
    """
    _check_n(n)
    w = wiring if wiring is not None else bs_wiring(n)
    pr, pc = make_npr(n), make_even_parity(n)
    lam = Fraction(1, 1 << (n - 1))
    return RelationsReport(
        n=n,
        pr_pr=box_equal(compose_adaptive(pr, pr, w), pr),
        pr_pc=box_equal(compose_adaptive(pr, pc, w), pr),
        pc_pr=box_equal(compose_adaptive(pc, pr, w), mix(pr, pc, lam)),
        pc_pc=box_equal(compose_adaptive(pc, pc, w), pc),
    )
