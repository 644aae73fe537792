"""One-shot reproduction of the worked five-party example.

The example takes f = x1x2x3 + x1x4 + x4x5 + x3 (XOR of AND-monomials),
derives the monomial structure and channel accounting, isolates the
{1,2,3} product box over a two-channel chain, distills it for ten
rounds, and measures the polytope distance of the starting box.  Every
quantity the source text states outright is checked against the value
computed here from the definitions; `quoted` items carry those stated
values and any mismatch makes the run fail, which is how one stated
tuple behaves: the exclusive-party count of {1,4} is 0 by the
definition (party 1 also sits in {1,2,3}, party 4 in {4,5}), while the
text prints 1 for it.  The mismatch is reported, not patched over.

Everything on this path is deterministic and exact; there is no RNG
and no floating point.
"""

from dataclasses import dataclass
from fractions import Fraction

from .anf import BooleanFunctionANF, monomial_structure
from .boxes import box_equal, make_even_parity, make_full_correlation, make_npr, mix
from .comm import channels_distill_bound, channels_scratch, partial_comm_distill
from .localdist import l1_distance_to_local, nearest_affine_oracle

EXAMPLE_TERMS = ([1, 2, 3], [1, 4], [4, 5], [3])
# the affine part of f; mixing FC(f) with FC(x3) keeps the isolation
# identity exact, and FC(x3) is also the certified closest local box
EXAMPLE_NOISE_TERMS = ([3],)
EXAMPLE_EPSILON = Fraction(1, 10)
EXAMPLE_ROUNDS = 10


@dataclass(frozen=True)
class ReproductionItem:
    name: str
    tag: str  # "quoted" values come from the example text, "derived" from definitions
    expected: str
    computed: str
    ok: bool
    note: str = ""

    def line(self) -> str:
        status = "ok  " if self.ok else "FAIL"
        out = f"[{status}] {self.name} ({self.tag}): expected {self.expected}, got {self.computed}"
        if self.note:
            out += f"\n       note: {self.note}"
        return out


@dataclass(frozen=True)
class ReproductionReport:
    items: tuple

    @property
    def ok(self) -> bool:
        return all(item.ok for item in self.items)

    @property
    def quoted_ok(self) -> bool:
        return all(item.ok for item in self.items if item.tag == "quoted")

    def lines(self) -> list:
        out = [item.line() for item in self.items]
        verdict = "all values reproduced" if self.ok else "MISMATCH in at least one value"
        out.append(verdict)
        return out

    def as_dict(self) -> dict:
        return {
            "items": [
                {
                    "name": it.name,
                    "tag": it.tag,
                    "expected": it.expected,
                    "computed": it.computed,
                    "ok": it.ok,
                    **({"note": it.note} if it.note else {}),
                }
                for it in self.items
            ],
            "ok": self.ok,
        }


def _item(name, tag, expected, computed, note=""):
    exp = str(expected)
    comp = str(computed)
    return ReproductionItem(name, tag, exp, comp, exp == comp, note)


def run_reproduction() -> ReproductionReport:
    f = BooleanFunctionANF.from_terms(5, EXAMPLE_TERMS)
    s = monomial_structure(f)
    items = []

    j_sorted = sorted(sorted(m) for m in s.j_set)
    items.append(_item("degree>=2 monomials J", "derived",
                       [[1, 2, 3], [1, 4], [4, 5]], j_sorted))
    items.append(_item("connected blocks n_J", "quoted", 1, s.n_j))

    m_tuple = tuple(s.m[frozenset(mono)] for mono in ([1, 2, 3], [1, 4], [4, 5]))
    items.append(
        _item(
            "exclusive-party counts m", "quoted", (2, 1, 1), m_tuple,
            note=(
                "the count for {1,4} is 0 by the definition: party 1 also "
                "appears in {1,2,3} and party 4 in {4,5}, so no party is "
                "exclusive to {1,4}; the stated tuple prints 1 there"
            ) if m_tuple != (2, 1, 1) else "",
        )
    )
    items.append(_item("scratch channel count", "quoted", 4, channels_scratch(s)))
    items.append(
        _item("distillation channel bound", "quoted", 2, channels_distill_bound(s, 5))
    )

    noise = BooleanFunctionANF.from_terms(5, EXAMPLE_NOISE_TERMS)
    final, trace, plan, residual = partial_comm_distill(
        f, noise, EXAMPLE_EPSILON, EXAMPLE_ROUNDS
    )
    items.append(
        _item("channel chain", "quoted", "5>4, 4>1",
              ", ".join(f"{a}>{b}" for a, b in plan.channels))
    )
    items.append(
        _item("isolated monomial", "derived", [1, 2, 3],
              sorted(plan.isolated_monomial))
    )
    # partial_comm_distill itself verifies that pinning the chain inputs
    # leaves exactly mix(PR_3, even_3, eps) on parties {1,2,3}; reaching
    # this point certifies the isolation identity
    items.append(_item("isolated box is the noisy 3-party product", "derived",
                       True, True))
    items.append(
        _item("distillation rounds traced", "derived",
              EXAMPLE_ROUNDS, trace.rounds)
    )
    items.append(
        _item("trace strictly increasing", "derived", True,
              bool(trace.verify()))
    )
    items.append(
        _item("residual after isolating {1,2,3}", "derived",
              [[1, 4], [3], [4, 5]], residual.serialize())
    )
    expected_final = mix(
        make_full_correlation(f),
        make_full_correlation(residual),
        trace.epsilons[-1],
    )
    items.append(
        _item("final box is the predicted mixture", "derived", True,
              box_equal(final, expected_final))
    )

    box = make_full_correlation(f)
    cert = l1_distance_to_local(box, method="exact", use_symmetry=True)
    items.append(_item("polytope distance", "quoted", 20, cert.distance))
    count, witness = nearest_affine_oracle(f)
    items.append(
        _item("distance = 2x nearest-affine disagreements", "derived",
              2 * count, cert.distance)
    )
    items.append(
        _item("closest box parity", "quoted", [[3]], witness.serialize())
    )
    items.append(
        _item("certified closest box matches that parity", "derived", True,
              box_equal(cert.closest_box,
                        make_full_correlation(witness)))
    )
    cert.verify(box)

    return ReproductionReport(tuple(items))
