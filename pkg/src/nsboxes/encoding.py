"""Shared bit-vector and rational-string conventions.

Inputs and outputs of an n-party box are length-n vectors of bits, one bit
per party. Two encodings are used everywhere:

* integer index: party i occupies bit position i-1, so x_1 is the least
  significant bit of the index;
* display string: party 1 is the leftmost character, so "011" means
  x1=0, x2=1, x3=1.

Probabilities and map values are exact rationals (fractions.Fraction) and
serialize as "p/q" in lowest terms, q always written out.
"""

from __future__ import annotations

import re
from fractions import Fraction

MAX_PARTIES = 8

_RATIONAL_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")


def bits_to_index(bits) -> int:
    """Pack a bit vector (party 1 first) into an integer index."""
    idx = 0
    for pos, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"bit value {b!r} is not 0 or 1")
        idx |= b << pos
    return idx


def index_to_bits(idx: int, n: int) -> tuple:
    """Unpack an integer index into an n-bit vector (party 1 first)."""
    if not 0 <= idx < (1 << n):
        raise ValueError(f"index {idx} out of range for n={n}")
    return tuple((idx >> pos) & 1 for pos in range(n))


def parse_bits(s: str, n: int | None = None) -> tuple:
    """Parse a display string like "011" into a bit vector."""
    if not s or any(ch not in "01" for ch in s):
        raise ValueError(f"bit string {s!r} must be a nonempty run of 0/1")
    if n is not None and len(s) != n:
        raise ValueError(f"bit string {s!r} has length {len(s)}, expected {n}")
    return tuple(int(ch) for ch in s)


def format_bits(bits) -> str:
    return "".join(str(b) for b in bits)


def parity(idx: int) -> int:
    """XOR of the bits of idx."""
    return idx.bit_count() & 1


def parse_rational(s: str) -> Fraction:
    """Parse "p/q" (or a bare integer) into an exact rational."""
    if isinstance(s, int):
        return Fraction(s)
    m = _RATIONAL_RE.match(s.strip()) if isinstance(s, str) else None
    if m is None:
        raise ValueError(f"{s!r} is not an exact rational; write it as p/q")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"{s!r} has a zero denominator")
    return Fraction(num, den)


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"
