"""Box specification documents: strict JSON in, canonical JSON out.

A document names one box. Five kinds: npr and even_parity need only n;
full_correlation carries the defining function as monomial index lists;
mixture nests two component documents with an exact weight; table lists
every conditional distribution outright.  Parsing is strict: unknown
fields, missing fields, or malformed rationals are rejected with the
path to the offending field, because a silently dropped typo in a
monomial list would corrupt every value computed downstream.

Bitstring keys put party 1 leftmost. All rationals travel as "p/q".
"""

import json
from fractions import Fraction

from .anf import BooleanFunctionANF
from .boxes import ConditionalBox, make_even_parity, make_full_correlation, make_npr, mix
from .encoding import (
    MAX_PARTIES,
    bits_to_index,
    format_bits,
    format_rational,
    index_to_bits,
    parse_bits,
    parse_rational,
)

KINDS = ("full_correlation", "npr", "even_parity", "mixture", "table")


class SpecDocumentError(ValueError):
    """Malformed box document; `path` locates the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path or '<document>'}: {message}")


def _fail(path, message):
    raise SpecDocumentError(path, message)


def _expect_fields(doc, path, required, optional=()):
    for field in required:
        if field not in doc:
            _fail(path, f"missing required field {field!r}")
    allowed = set(required) | set(optional)
    for field in doc:
        if field not in allowed:
            _fail(f"{path}.{field}" if path else field, "unknown field")


def _parse_n(doc, path):
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        _fail(f"{path}.n" if path else "n", "must be an integer")
    if not 1 <= n <= MAX_PARTIES:
        _fail(f"{path}.n" if path else "n", f"outside supported range 1..{MAX_PARTIES}")
    return n


def _parse_anf(raw, n, path):
    if not isinstance(raw, list):
        _fail(path, "must be a list of monomial index lists")
    terms = []
    for i, term in enumerate(raw):
        tpath = f"{path}[{i}]"
        if not isinstance(term, list):
            _fail(tpath, "must be a list of 1-based party indices")
        seen = set()
        for j, idx in enumerate(term):
            if not isinstance(idx, int) or isinstance(idx, bool):
                _fail(f"{tpath}[{j}]", "party index must be an integer")
            if not 1 <= idx <= n:
                _fail(f"{tpath}[{j}]", f"party index {idx} outside 1..{n}")
            if idx in seen:
                _fail(f"{tpath}[{j}]", f"party index {idx} repeated")
            seen.add(idx)
        terms.append(term)
    return BooleanFunctionANF.from_terms(n, terms)


def _parse_rational_field(raw, path):
    if not isinstance(raw, str):
        _fail(path, 'rationals are strings "p/q"')
    try:
        return parse_rational(raw)
    except ValueError as exc:
        _fail(path, str(exc))


def _parse_probs(raw, n, path):
    if not isinstance(raw, dict):
        _fail(path, "must map input bitstrings to output distributions")
    size = 1 << n
    rows = []
    seen_inputs = set()
    for key in raw:
        kpath = f"{path}.{key}"
        try:
            bits = parse_bits(key, n)
        except ValueError as exc:
            _fail(kpath, str(exc))
        xi = bits_to_index(bits)
        if xi in seen_inputs:
            _fail(kpath, "input listed twice")
        seen_inputs.add(xi)
    if len(seen_inputs) != size:
        missing = next(x for x in range(size) if x not in seen_inputs)
        _fail(path, f"missing input {format_bits(index_to_bits(missing, n))}")

    table = {}
    for key, dist in raw.items():
        kpath = f"{path}.{key}"
        xi = bits_to_index(parse_bits(key, n))
        if not isinstance(dist, dict):
            _fail(kpath, "must map output bitstrings to rationals")
        row = [Fraction(0)] * size
        for outkey, value in dist.items():
            opath = f"{kpath}.{outkey}"
            try:
                obits = parse_bits(outkey, n)
            except ValueError as exc:
                _fail(opath, str(exc))
            ai = bits_to_index(obits)
            if row[ai]:
                _fail(opath, "output listed twice")
            p = _parse_rational_field(value, opath)
            if p < 0:
                _fail(opath, f"negative probability {value}")
            row[ai] = p
        if sum(row) != 1:
            _fail(kpath, f"distribution sums to {sum(row)}, not 1")
        table[xi] = row
    for xi in range(size):
        rows.append(table[xi])
    return rows


def parse_box_document(doc, path: str = "") -> ConditionalBox:
    """Interpret one document (already JSON-decoded) as a box."""
    if not isinstance(doc, dict):
        _fail(path, "document must be a JSON object")
    if "kind" not in doc:
        _fail(path, "missing required field 'kind'")
    kind = doc["kind"]
    if kind not in KINDS:
        _fail(f"{path}.kind" if path else "kind",
              f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")

    if kind == "npr":
        _expect_fields(doc, path, ("n", "kind"))
        return make_npr(_parse_n(doc, path))
    if kind == "even_parity":
        _expect_fields(doc, path, ("n", "kind"))
        return make_even_parity(_parse_n(doc, path))
    if kind == "full_correlation":
        _expect_fields(doc, path, ("n", "kind", "anf"))
        n = _parse_n(doc, path)
        f = _parse_anf(doc["anf"], n, f"{path}.anf" if path else "anf")
        return make_full_correlation(f)
    if kind == "mixture":
        _expect_fields(doc, path, ("kind", "epsilon", "components"))
        eps = _parse_rational_field(
            doc["epsilon"], f"{path}.epsilon" if path else "epsilon"
        )
        if not 0 <= eps <= 1:
            _fail(f"{path}.epsilon" if path else "epsilon",
                  f"mixture weight {doc['epsilon']} outside [0, 1]")
        comps = doc["components"]
        cpath = f"{path}.components" if path else "components"
        if not isinstance(comps, list) or len(comps) != 2:
            _fail(cpath, "must list exactly two component documents")
        first = parse_box_document(comps[0], f"{cpath}[0]")
        second = parse_box_document(comps[1], f"{cpath}[1]")
        if first.n != second.n:
            _fail(cpath, f"components disagree on n: {first.n} vs {second.n}")
        return mix(first, second, eps)
    # kind == "table"
    _expect_fields(doc, path, ("n", "kind", "probs"))
    n = _parse_n(doc, path)
    rows = _parse_probs(doc["probs"], n, f"{path}.probs" if path else "probs")
    try:
        return ConditionalBox(n, rows)
    except ValueError as exc:
        _fail(path, str(exc))


def load_box_document(text: str) -> ConditionalBox:
    """Parse JSON text into a box; line/column diagnostics on bad JSON."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecDocumentError(
            "", f"not valid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})"
        ) from exc
    return parse_box_document(doc)


def box_to_document(box: ConditionalBox) -> dict:
    """Canonical table-form document; parsing it back rebuilds the box."""
    n = box.n
    probs = {}
    for xi in range(1 << n):
        row = box.row(xi)
        probs[format_bits(index_to_bits(xi, n))] = {
            format_bits(index_to_bits(ai, n)): format_rational(p)
            for ai, p in enumerate(row)
            if p
        }
    return {"n": n, "kind": "table", "probs": probs}
