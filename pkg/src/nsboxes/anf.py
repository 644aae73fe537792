"""Boolean functions over GF(2) in algebraic normal form.

A function f : {0,1}^n -> {0,1} is stored as the set of monomials with
coefficient 1, so f(x) = XOR over stored I of AND_{i in I} x_i. Party
indices inside monomials are 1-based; the constant term is the empty
monomial. Truth tables are tuples of length 2^n indexed with x_1 as the
least significant bit.

The structural summary (monomial_structure) looks only at monomials of
degree >= 2: degree <= 1 terms are affine and can be produced locally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .encoding import MAX_PARTIES, index_to_bits

Monomial = frozenset


@dataclass(frozen=True)
class BooleanFunctionANF:
    n: int
    monomials: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not 1 <= self.n <= MAX_PARTIES:
            raise ValueError(f"n={self.n} outside supported range 1..{MAX_PARTIES}")
        norm = frozenset(frozenset(m) for m in self.monomials)
        for mono in norm:
            for i in mono:
                if not (isinstance(i, int) and 1 <= i <= self.n):
                    raise ValueError(f"monomial index {i!r} outside 1..{self.n}")
        object.__setattr__(self, "monomials", norm)

    @classmethod
    def from_terms(cls, n: int, terms) -> "BooleanFunctionANF":
        return cls(n, frozenset(frozenset(t) for t in terms))

    @classmethod
    def zero(cls, n: int) -> "BooleanFunctionANF":
        return cls(n, frozenset())

    @classmethod
    def product_term(cls, n: int, indices) -> "BooleanFunctionANF":
        return cls(n, frozenset([frozenset(indices)]))

    def evaluate(self, bits) -> int:
        if len(bits) != self.n:
            raise ValueError(f"expected {self.n} bits, got {len(bits)}")
        acc = 0
        for mono in self.monomials:
            term = 1
            for i in mono:
                term &= bits[i - 1]
                if not term:
                    break
            acc ^= term
        return acc

    def truth_table(self) -> tuple:
        """Evaluate at all 2^n points. Deliberately not the Moebius route."""
        return tuple(self.evaluate(index_to_bits(x, self.n)) for x in range(1 << self.n))

    def degree(self) -> int:
        return max((len(m) for m in self.monomials), default=0)

    def is_affine(self) -> bool:
        return self.degree() <= 1

    def __xor__(self, other: "BooleanFunctionANF") -> "BooleanFunctionANF":
        if self.n != other.n:
            raise ValueError("cannot XOR functions on different party counts")
        return BooleanFunctionANF(self.n, self.monomials ^ other.monomials)

    def serialize(self) -> list:
        return sorted(sorted(m) for m in self.monomials)

    def __str__(self) -> str:
        if not self.monomials:
            return "0"
        parts = []
        for mono in self.serialize():
            parts.append("1" if not mono else "".join(f"x{i}" for i in mono))
        return " + ".join(parts)


def anf_from_truth_table(tt) -> BooleanFunctionANF:
    """Moebius transform of a truth table over GF(2).

    The transform is an involution: applying it to ANF coefficients laid out
    as a table returns the truth table. Round trips against
    BooleanFunctionANF.truth_table (direct evaluation) are checked in tests.
    """
    size = len(tt)
    if size < 2 or size & (size - 1):
        raise ValueError(f"truth table length {size} is not a power of two >= 2")
    n = size.bit_length() - 1
    coeffs = list(tt)
    for v in coeffs:
        if v not in (0, 1):
            raise ValueError(f"truth table entry {v!r} is not 0 or 1")
    for j in range(n):
        bit = 1 << j
        for i in range(size):
            if i & bit:
                coeffs[i] ^= coeffs[i ^ bit]
    monomials = frozenset(
        frozenset(i + 1 for i in range(n) if idx & (1 << i))
        for idx in range(size)
        if coeffs[idx]
    )
    return BooleanFunctionANF(n, monomials)


def strip_local_part(f: BooleanFunctionANF):
    """Split f into (degree >= 2 part, affine part)."""
    nonlocal_terms = frozenset(m for m in f.monomials if len(m) >= 2)
    local_terms = f.monomials - nonlocal_terms
    return BooleanFunctionANF(f.n, nonlocal_terms), BooleanFunctionANF(f.n, local_terms)


@dataclass(frozen=True)
class MonomialStructure:
    """Degree >= 2 monomials of a function and how they overlap.

    components partitions j_set into groups that share no party across
    groups (connected components of the pairwise-intersection graph),
    n_j is the number of groups, m[I] counts parties of I appearing in
    no other member of j_set, support is the union of j_set.
    """

    j_set: frozenset
    components: tuple
    n_j: int
    m: dict
    support: frozenset

    def max_m(self) -> int:
        return max(self.m.values(), default=0)


def monomial_structure(f: BooleanFunctionANF) -> MonomialStructure:
    j_set = frozenset(m for m in f.monomials if len(m) >= 2)
    members = sorted(j_set, key=lambda mono: sorted(mono))

    parent = {mono: mono for mono in members}

    def find(a):
        while parent[a] is not a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra is not rb:
            parent[ra] = rb

    by_var: dict = {}
    for mono in members:
        for i in mono:
            by_var.setdefault(i, []).append(mono)
    for group in by_var.values():
        for other in group[1:]:
            union(group[0], other)

    comp_map: dict = {}
    for mono in members:
        comp_map.setdefault(find(mono), []).append(mono)
    components = tuple(
        sorted(
            (frozenset(group) for group in comp_map.values()),
            key=lambda grp: min(sorted(mono) for mono in grp),
        )
    )

    m = {}
    for mono in members:
        others = set()
        for other in members:
            if other != mono:
                others |= other
        m[mono] = len(mono - others)

    support = frozenset().union(*members) if members else frozenset()
    return MonomialStructure(
        j_set=j_set,
        components=components,
        n_j=len(components),
        m=m,
        support=support,
    )
