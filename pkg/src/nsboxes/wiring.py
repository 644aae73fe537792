"""Adaptive wirings and exact compositions of boxes.

A two-box wiring runs the first box on the real inputs, computes each
party's second input from (x_i, a_i), runs the second box, and outputs
h_i(x_i, a_i, b_i). Both lookups are stored as truth tables per party, so a
protocol is finite data, not code.

The distillation wiring feeds y_i = x_i AND (1 - a_i) into the second box
and outputs c_i = a_i XOR b_i.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .anf import BooleanFunctionANF
from .boxes import ConditionalBox, make_full_correlation, make_npr
from .encoding import index_to_bits

ZERO = Fraction(0)


@dataclass(frozen=True)
class WiringProtocol:
    """Per-party lookup tables: g[i][x][a] -> second input, h[i][x][a][b] -> output."""

    n: int
    g_tables: tuple
    h_tables: tuple

    def __post_init__(self):
        if len(self.g_tables) != self.n or len(self.h_tables) != self.n:
            raise ValueError("one g and one h table required per party")
        try:
            g_ok = all(
                len(tab) == 2
                and all(len(row) == 2 and set(row) <= {0, 1} for row in tab)
                for tab in self.g_tables
            )
            h_ok = all(
                len(tab) == 2
                and all(
                    len(row) == 2
                    and all(len(cell) == 2 and set(cell) <= {0, 1} for cell in row)
                    for row in tab
                )
                for tab in self.h_tables
            )
        except TypeError:
            raise ValueError("wiring tables must nest tuples of bits") from None
        if not g_ok:
            raise ValueError("g tables must be 2x2 bits")
        if not h_ok:
            raise ValueError("h tables must be 2x2x2 bits")

    @classmethod
    def from_rules(cls, n: int, g_rule, h_rule) -> "WiringProtocol":
        """Tabulate the same pair of bit rules for every party."""
        g = tuple(
            tuple(tuple(g_rule(x, a) & 1 for a in range(2)) for x in range(2))
            for _ in range(n)
        )
        h = tuple(
            tuple(
                tuple(tuple(h_rule(x, a, b) & 1 for b in range(2)) for a in range(2))
                for x in range(2)
            )
            for _ in range(n)
        )
        return cls(n, g, h)


def bs_wiring(n: int) -> WiringProtocol:
    """y_i = x_i AND NOT a_i, c_i = a_i XOR b_i."""
    return WiringProtocol.from_rules(
        n, lambda x, a: x & (1 - a), lambda x, a, b: a ^ b
    )


def compose_adaptive(
    b1: ConditionalBox, b2: ConditionalBox, wiring: WiringProtocol
) -> ConditionalBox:
    """Exact distribution of the wired pair, iterating supports only."""
    n = b1.n
    if b2.n != n or wiring.n != n:
        raise ValueError("party counts differ")
    size = 1 << n
    g, h = wiring.g_tables, wiring.h_tables
    rows = []
    for xi in range(size):
        xbits = index_to_bits(xi, n)
        out = [ZERO] * size
        for ai in b1.support(xi):
            p1 = b1.prob_index(xi, ai)
            yi = 0
            for i in range(n):
                yi |= g[i][xbits[i]][(ai >> i) & 1] << i
            for bi in b2.support(yi):
                ci = 0
                for i in range(n):
                    ci |= h[i][xbits[i]][(ai >> i) & 1][(bi >> i) & 1] << i
                out[ci] += p1 * b2.prob_index(yi, bi)
        rows.append(out)
    return ConditionalBox(n, rows)


def _xor_convolve(row1, row2, size):
    """Distribution of c = a XOR b for independent a ~ row1, b ~ row2."""
    out = [ZERO] * size
    for ai, p in enumerate(row1):
        if not p:
            continue
        for bi, q in enumerate(row2):
            if q:
                out[ai ^ bi] += p * q
    return out


def build_from_prs(f: BooleanFunctionANF):
    """Realize the full-correlation box of f from one n-party PR box per monomial.

    For monomial I, party i feeds x_i when i is in I and the constant 1
    otherwise; every party outputs the XOR of its bits across all boxes.
    Returns (composed box, number of PR boxes used). Degree <= 1 monomials
    still consume a box here even though they are locally simulable.

    With no monomials at all, the XOR of an empty set of boxes is the
    all-zero output, so a shared even-parity pad stands in for the shared
    randomness that makes the outputs uniform; the pad is distribution-
    neutral whenever at least one box is present and is skipped then.
    """
    n = f.n
    size = 1 << n
    monomials = sorted(f.monomials, key=lambda m: (len(m), sorted(m)))
    if not monomials:
        return make_full_correlation(BooleanFunctionANF.zero(n)), 0
    pr = make_npr(n)
    rows = []
    for xi in range(size):
        xbits = index_to_bits(xi, n)
        dist = None
        for mono in monomials:
            ui = 0
            for i in range(n):
                bit = xbits[i] if (i + 1) in mono else 1
                ui |= bit << i
            contribution = pr.row(ui)
            dist = (
                list(contribution)
                if dist is None
                else _xor_convolve(dist, contribution, size)
            )
        rows.append(dist)
    return ConditionalBox(n, rows), len(monomials)


def lemma3_compose(
    p1: ConditionalBox,
    g1: BooleanFunctionANF,
    p2: ConditionalBox,
    k1: int,
    k2: int,
    k3: int,
) -> ConditionalBox:
    """Merge a box on parties 1..k2 with a product box on parties k1..n.

    p1 must be the full-correlation box of g1 (k2 parties); p2 must be the
    full-correlation box, on parties k1..n, of the product x_k1 ... x_k3.
    Parties k1..k2 belong to both boxes and output a XOR b; parties below
    k1 output a alone, parties above k2 output b alone. The result is the
    full-correlation box of g1 XOR x_k1...x_k3 on all n parties (verified
    by tests, not assumed here).
    """
    n = k1 + p2.n - 1
    if not (0 < k1 <= k2 < k3 <= n):
        raise ValueError(f"need 0 < k1 <= k2 < k3 <= n, got {(k1, k2, k3, n)}")
    if k2 >= n:
        raise ValueError("first box must cover fewer than all parties")
    if p1.n != k2 or g1.n != k2:
        raise ValueError("p1 and g1 must cover parties 1..k2")
    if p1 != make_full_correlation(g1):
        raise ValueError("p1 is not the full-correlation box of g1")
    window = BooleanFunctionANF.product_term(p2.n, range(1, k3 - k1 + 2))
    if p2 != make_full_correlation(window):
        raise ValueError("p2 is not the product-term box for parties k1..k3")

    size = 1 << n
    rows = []
    for xi in range(size):
        x1i = xi & ((1 << k2) - 1)
        x2i = xi >> (k1 - 1)
        out = [ZERO] * size
        for ai in p1.support(x1i):
            p = p1.prob_index(x1i, ai)
            for bi in p2.support(x2i):
                ci = 0
                for party in range(1, n + 1):
                    abit = (ai >> (party - 1)) & 1 if party <= k2 else 0
                    bbit = (bi >> (party - k1)) & 1 if party >= k1 else 0
                    ci |= (abit ^ bbit) << (party - 1)
                out[ci] += p * p2.prob_index(x2i, bi)
        rows.append(out)
    return ConditionalBox(n, rows)


def xor_local_part(box: ConditionalBox, local: BooleanFunctionANF) -> ConditionalBox:
    """Each party XORs an affine share into its output: a_i ^= x_i for
    singleton terms, party 1 absorbs the constant term."""
    n = box.n
    if local.n != n:
        raise ValueError("party counts differ")
    if local.degree() > 1:
        raise ValueError("only degree <= 1 terms can be applied locally")
    const = 1 if frozenset() in local.monomials else 0
    var_mask = 0
    for mono in local.monomials:
        if mono:
            (i,) = mono
            var_mask |= 1 << (i - 1)
    size = 1 << n
    rows = []
    for xi in range(size):
        shift = (xi & var_mask) ^ const
        old = box.row(xi)
        out = [ZERO] * size
        for ai in range(size):
            out[ai ^ shift] = old[ai]
        rows.append(out)
    return ConditionalBox(n, rows, validate=False)


def xor_merge(b1: ConditionalBox, b2: ConditionalBox) -> ConditionalBox:
    """Both boxes receive the same input and each party XORs its two bits."""
    if b1.n != b2.n:
        raise ValueError("party counts differ")
    size = 1 << b1.n
    rows = [_xor_convolve(b1.row(xi), b2.row(xi), size) for xi in range(size)]
    return ConditionalBox(b1.n, rows)


def embed_parties(box: ConditionalBox, n: int, parties) -> ConditionalBox:
    """Lift a k-party box to n parties: the listed parties (strictly
    ascending) run the box on their own inputs, everyone else outputs 0."""
    parties = tuple(parties)
    k = box.n
    if len(parties) != k:
        raise ValueError("need exactly one slot per box party")
    if list(parties) != sorted(set(parties)):
        raise ValueError("party slots must be strictly ascending")
    if parties and not (1 <= parties[0] and parties[-1] <= n):
        raise ValueError("party slot out of range")
    rows = []
    for xi in range(1 << n):
        sub = 0
        for j, p in enumerate(parties):
            sub |= ((xi >> (p - 1)) & 1) << j
        out = [ZERO] * (1 << n)
        for ai in box.support(sub):
            ci = 0
            for j, p in enumerate(parties):
                ci |= ((ai >> j) & 1) << (p - 1)
            out[ci] = box.prob_index(sub, ai)
        rows.append(out)
    return ConditionalBox(n, rows)


def collapse_parties(
    box: ConditionalBox, constants: dict, absorbed, receiver: int
) -> ConditionalBox:
    """Fix absorbed parties' inputs and fold their outputs into the receiver.

    constants must assign exactly the absorbed parties. Remaining parties
    keep their relative order; the receiver outputs its own bit XOR all
    absorbed bits.
    """
    n = box.n
    absorbed = frozenset(absorbed)
    for i in absorbed:
        if not 1 <= i <= n:
            raise ValueError(f"party {i} out of range")
    if receiver in absorbed or not 1 <= receiver <= n:
        raise ValueError(f"receiver {receiver} must be a kept party")
    if set(constants) != set(absorbed):
        raise ValueError("constants must assign exactly the absorbed parties")
    if any(constants[i] not in (0, 1) for i in constants):
        raise ValueError("constant inputs must be bits")

    kept = [i for i in range(1, n + 1) if i not in absorbed]
    m = len(kept)
    absorbed_mask = 0
    for i in absorbed:
        absorbed_mask |= 1 << (i - 1)
    const_bits = 0
    for i, bit in constants.items():
        const_bits |= bit << (i - 1)
    recv_pos = kept.index(receiver)

    rows = []
    for xs in range(1 << m):
        xi = const_bits
        for j, i in enumerate(kept):
            xi |= ((xs >> j) & 1) << (i - 1)
        out = [ZERO] * (1 << m)
        for ai in box.support(xi):
            fold = (ai & absorbed_mask).bit_count() & 1
            ci = 0
            for j, i in enumerate(kept):
                ci |= ((ai >> (i - 1)) & 1) << j
            ci ^= fold << recv_pos
            out[ci] += box.prob_index(xi, ai)
        rows.append(out)
    return ConditionalBox(m, rows)


def sample(box: ConditionalBox, x_bits, rng: random.Random) -> tuple:
    """Draw one output vector exactly: probabilities are rescaled to a common
    integer denominator and a uniform integer picks the outcome."""
    xi = sum(b << i for i, b in enumerate(x_bits))
    support = box.support(xi)
    denom = lcm(*(box.prob_index(xi, ai).denominator for ai in support))
    r = rng.randrange(denom)
    acc = 0
    for ai in support:
        p = box.prob_index(xi, ai)
        acc += p.numerator * (denom // p.denominator)
        if r < acc:
            return index_to_bits(ai, box.n)
    raise AssertionError("row probabilities did not sum to 1")


def sample_many(box: ConditionalBox, x_bits, count: int, seed: int) -> dict:
    """Frequency table of `count` draws with an explicitly seeded generator
    (Python's Mersenne Twister via random.Random)."""
    rng = random.Random(seed)
    freq: dict = {}
    for _ in range(count):
        a = sample(box, x_bits, rng)
        freq[a] = freq.get(a, 0) + 1
    return freq
