"""Conditional probability boxes P(a|x) for n parties with binary i/o.

A box stores one exact distribution over output vectors per input vector.
Rows are indexed by the integer encoding of the input (x_1 = least
significant bit) and entries by the encoding of the output. Every row must
sum to exactly 1; entries are fractions.Fraction.

Full-correlation boxes are uniform over the output-parity class selected
by a Boolean function of the inputs: P(a|x) = 2^(1-n) if XOR(a) = f(x),
else 0. The n-party PR box takes f = x_1...x_n, the even-parity box f = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .anf import BooleanFunctionANF
from .encoding import MAX_PARTIES, index_to_bits, parity

ZERO = Fraction(0)
ONE = Fraction(1)


class FamilyDecompositionError(ValueError):
    """Raised when a box is not a convex combination of the given pair."""


class ConditionalBox:
    __slots__ = ("n", "_rows", "_supports")

    def __init__(self, n: int, rows, validate: bool = True):
        if not 1 <= n <= MAX_PARTIES:
            raise ValueError(f"n={n} outside supported range 1..{MAX_PARTIES}")
        size = 1 << n
        frozen = []
        for xi, row in enumerate(rows):
            row = tuple(Fraction(p) for p in row)
            if len(row) != size:
                raise ValueError(f"row {xi} has {len(row)} entries, expected {size}")
            if validate:
                if any(p < 0 for p in row):
                    raise ValueError(f"negative probability in row {xi}")
                if sum(row) != ONE:
                    raise ValueError(f"row {xi} sums to {sum(row)}, not 1")
            frozen.append(row)
        if len(frozen) != size:
            raise ValueError(f"{len(frozen)} rows, expected {size}")
        self.n = n
        self._rows = tuple(frozen)
        self._supports = tuple(
            tuple(ai for ai, p in enumerate(row) if p) for row in self._rows
        )

    def prob_index(self, xi: int, ai: int) -> Fraction:
        return self._rows[xi][ai]

    def prob(self, x_bits, a_bits) -> Fraction:
        xi = sum(b << i for i, b in enumerate(x_bits))
        ai = sum(b << i for i, b in enumerate(a_bits))
        return self._rows[xi][ai]

    def row(self, xi: int) -> tuple:
        return self._rows[xi]

    def support(self, xi: int) -> tuple:
        return self._supports[xi]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConditionalBox):
            return NotImplemented
        return self.n == other.n and self._rows == other._rows

    __hash__ = None

    def __repr__(self) -> str:
        return f"ConditionalBox(n={self.n})"


def make_full_correlation(f: BooleanFunctionANF) -> ConditionalBox:
    """Uniform over the output-parity class picked by f at each input."""
    n = f.n
    size = 1 << n
    weight = Fraction(1, 1 << (n - 1))
    tt = f.truth_table()
    rows = []
    for xi in range(size):
        want = tt[xi]
        rows.append(tuple(weight if parity(ai) == want else ZERO for ai in range(size)))
    return ConditionalBox(n, rows, validate=False)


def make_npr(n: int) -> ConditionalBox:
    """n-party PR box: output parity equals the product of all inputs."""
    return make_full_correlation(BooleanFunctionANF.product_term(n, range(1, n + 1)))


def make_even_parity(n: int) -> ConditionalBox:
    """Uniform over even-parity outputs regardless of input (local)."""
    return make_full_correlation(BooleanFunctionANF.zero(n))


def mix(b1: ConditionalBox, b2: ConditionalBox, epsilon) -> ConditionalBox:
    """epsilon * b1 + (1 - epsilon) * b2, entrywise exact."""
    epsilon = Fraction(epsilon)
    if not 0 <= epsilon <= 1:
        raise ValueError(f"epsilon={epsilon} outside [0, 1]")
    if b1.n != b2.n:
        raise ValueError("party counts differ")
    rest = 1 - epsilon
    rows = [
        tuple(epsilon * p + rest * q for p, q in zip(b1.row(xi), b2.row(xi)))
        for xi in range(1 << b1.n)
    ]
    return ConditionalBox(b1.n, rows, validate=False)


def box_equal(b1: ConditionalBox, b2: ConditionalBox) -> bool:
    return b1 == b2


def l1_box_distance(b1: ConditionalBox, b2: ConditionalBox) -> Fraction:
    """Plain entrywise sum of |P1 - P2| over all inputs and outputs."""
    if b1.n != b2.n:
        raise ValueError("party counts differ")
    total = ZERO
    for xi in range(1 << b1.n):
        for p, q in zip(b1.row(xi), b2.row(xi)):
            total += abs(p - q)
    return total


@dataclass(frozen=True)
class NonsignalingReport:
    ok: bool
    # On failure: the output subset whose marginal moved, and the two full
    # input vectors (as indices) that only differ outside the subset.
    subset: tuple = ()
    x_index: int = -1
    x_alt_index: int = -1

    def __bool__(self) -> bool:
        return self.ok


def _marginal_without(box: ConditionalBox, xi: int, party: int):
    """Marginal of all outputs except `party` (1-based), as a tuple."""
    n = box.n
    bit = 1 << (party - 1)
    low = bit - 1
    out = [ZERO] * (1 << (n - 1))
    for ai in box.support(xi):
        key = (ai & low) | ((ai >> 1) & ~low)
        out[key] += box.prob_index(xi, ai)
    return tuple(out)


def is_nonsignaling(box: ConditionalBox) -> NonsignalingReport:
    """Check that no party's input shifts the other parties' marginals.

    Single-input flips suffice: invariance of the (n-1)-party marginal under
    each excluded party's input implies invariance of every sub-marginal
    under every input change outside the subset (sum out further parties,
    then chain one flip at a time).
    """
    n = box.n
    if n == 1:
        return NonsignalingReport(ok=True)
    for party in range(1, n + 1):
        bit = 1 << (party - 1)
        for xi in range(1 << n):
            if xi & bit:
                continue
            other = xi | bit
            if _marginal_without(box, xi, party) != _marginal_without(box, other, party):
                subset = tuple(i for i in range(1, n + 1) if i != party)
                return NonsignalingReport(
                    ok=False, subset=subset, x_index=xi, x_alt_index=other
                )
    return NonsignalingReport(ok=True)


def subset_outputs_uniform(box: ConditionalBox, k: int) -> bool:
    """True when every output subset of size <= k is uniform at every input."""
    n = box.n
    if not 1 <= k <= n - 1:
        raise ValueError(f"k={k} outside 1..{n - 1}")
    for size in range(1, k + 1):
        target = Fraction(1, 1 << size)
        for subset in combinations(range(n), size):
            for xi in range(1 << n):
                acc: dict = {}
                for ai in box.support(xi):
                    key = sum(((ai >> pos) & 1) << j for j, pos in enumerate(subset))
                    acc[key] = acc.get(key, ZERO) + box.prob_index(xi, ai)
                if len(acc) != (1 << size) or any(v != target for v in acc.values()):
                    return False
    return True


def decompose_epsilon(box: ConditionalBox, target: ConditionalBox, local: ConditionalBox) -> Fraction:
    """Recover epsilon with box = epsilon*target + (1-epsilon)*local, exactly.

    Raises FamilyDecompositionError if no epsilon in [0, 1] fits every entry
    or if target == local (no unique coefficient).
    """
    if not box.n == target.n == local.n:
        raise ValueError("party counts differ")
    eps = None
    for xi in range(1 << box.n):
        for b, t, l in zip(box.row(xi), target.row(xi), local.row(xi)):
            if t != l:
                cand = (b - l) / (t - l)
                if eps is None:
                    eps = cand
                elif cand != eps:
                    raise FamilyDecompositionError(
                        "box is not in the family: inconsistent coefficient"
                    )
            elif b != t:
                raise FamilyDecompositionError(
                    "box is not in the family: entry off the segment"
                )
    if eps is None:
        raise FamilyDecompositionError(
            "target and local coincide; coefficient is not unique"
        )
    if not 0 <= eps <= 1:
        raise FamilyDecompositionError(f"coefficient {eps} outside [0, 1]")
    return eps


@dataclass(frozen=True)
class NoiseFamilyMember:
    """Point on the segment epsilon*target + (1-epsilon)*local."""

    target: ConditionalBox
    local: ConditionalBox
    epsilon: Fraction

    def __post_init__(self):
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if self.target.n != self.local.n:
            raise ValueError("party counts differ")
        if not 0 <= self.epsilon <= 1:
            raise ValueError(f"epsilon={self.epsilon} outside [0, 1]")

    @property
    def n(self) -> int:
        return self.target.n

    def realized(self) -> ConditionalBox:
        return mix(self.target, self.local, self.epsilon)
