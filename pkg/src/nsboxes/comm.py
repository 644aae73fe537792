"""Channel accounting for distilling full-correlation boxes.

A box whose function has a single connected block of overlapping non-local
monomials can be simulated from scratch with |support| - 1 one-way channels.
Distilling an existing noisy copy is cheaper: isolate the monomial with the
most exclusive parties, let everyone else send their bits toward a receiver
inside it, run the two-copy protocol on the isolated noisy product box, and
recombine.  This module builds the channel plans, evaluates the cost
formulas, executes the whole pipeline exactly at the box level, and surveys
every three-party function for the cost-advantage precondition.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

from .anf import (
    BooleanFunctionANF,
    MonomialStructure,
    anf_from_truth_table,
    monomial_structure,
)
from .boxes import (
    NoiseFamilyMember,
    box_equal,
    make_even_parity,
    make_full_correlation,
    make_npr,
    mix,
)
from .distill import DistillationTrace, bs_round
from .wiring import collapse_parties, embed_parties, xor_merge

_HYPOTHESIS = "hypothesis n_J = 1 violated"


def _require_single_component(s: MonomialStructure):
    if s.n_j != 1:
        raise ValueError(f"{_HYPOTHESIS} (n_J = {s.n_j})")


def _require_party_range(s: MonomialStructure, n: int):
    if s.support and max(s.support) > n:
        raise ValueError("structure names a party beyond n")


def channels_scratch(s: MonomialStructure) -> int:
    """One-way channels to simulate the box from scratch: |support| - 1."""
    _require_single_component(s)
    return len(s.support) - 1


def channels_distill_bound(s: MonomialStructure, n: int) -> int:
    """Channel bound when distilling a noisy copy instead: n - 1 - max m,
    collapsing to 0 when one monomial owns all n parties."""
    _require_single_component(s)
    _require_party_range(s, n)
    top = s.max_m()
    return 0 if top == n else n - 1 - top


def corollary_holds(s: MonomialStructure, n: int) -> bool:
    """True when distillation is certified cheaper than simulation from
    scratch: max m exceeds the number of parties outside the support."""
    _require_single_component(s)
    _require_party_range(s, n)
    return s.max_m() > n - len(s.support)


@dataclass(frozen=True, eq=True)
class CommunicationPlan:
    """Directed channel chain isolating one monomial's noisy product box.

    constant_assignment pins the input of every non-isolated party; the
    channels carry those parties' bits down a chain into the receiver.
    """

    n: int
    isolated_monomial: frozenset
    receiver: int
    channels: tuple
    constant_assignment: dict

    def __post_init__(self):
        outside = set(range(1, self.n + 1)) - set(self.isolated_monomial)
        if self.receiver not in self.isolated_monomial:
            raise ValueError("receiver must act in the isolated box")
        for snd, rcv in self.channels:
            if snd == rcv:
                raise ValueError("channel with sender = receiver")
            if not (1 <= snd <= self.n and 1 <= rcv <= self.n):
                raise ValueError("channel endpoint out of range")
        for (a, b), (c, _) in zip(self.channels, self.channels[1:]):
            if b != c:
                raise ValueError("channels must form a chain")
        if self.channels and self.channels[-1][1] != self.receiver:
            raise ValueError("chain must terminate at the receiver")
        if set(self.constant_assignment) != outside:
            raise ValueError("constants must cover exactly the non-isolated parties")
        if any(b not in (0, 1) for b in self.constant_assignment.values()):
            raise ValueError("constant inputs must be bits")
        senders = {snd for snd, _ in self.channels}
        if not outside <= senders:
            raise ValueError("every non-isolated party must send")

    __hash__ = None

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "isolated_monomial": sorted(self.isolated_monomial),
            "receiver": self.receiver,
            "channels": [list(c) for c in self.channels],
            "constant_assignment": {
                str(p): b for p, b in sorted(self.constant_assignment.items())
            },
        }


def make_isolation_plan(s: MonomialStructure, n: int) -> CommunicationPlan:
    """Channel chain for the monomial with the most exclusive parties.

    Ties pick the lexicographically smallest monomial.  The receiver is the
    smallest member of it shared with another monomial (falling back to its
    smallest member); every other non-exclusive party sends, chained in
    descending index order.  The chain length must meet the distillation
    bound, which fails only when a single monomial covers a proper subset
    of the parties: the leftover parties then hold pure-noise marginals
    that still need n - m channels, and no plan is emitted.
    """
    _require_single_component(s)
    _require_party_range(s, n)
    if s.max_m() < 1:
        raise ValueError("no monomial has an exclusive party; nothing to isolate")
    istar = min(s.j_set, key=lambda mono: (-s.m[mono], sorted(mono)))
    others = [K for K in s.j_set if K != istar]
    exclusive = istar.difference(*others) if others else istar
    shared = sorted(istar - exclusive)
    receiver = shared[0] if shared else min(istar)
    senders = [p for p in range(1, n + 1) if p != receiver and p not in exclusive]
    bound = channels_distill_bound(s, n)
    if len(senders) > bound:
        raise ValueError(
            f"isolating {sorted(istar)} needs {len(senders)} channels, above "
            f"the bound {bound}; the accounting requires every party to "
            "appear in some non-local monomial"
        )
    chain = sorted(senders, reverse=True)
    channels = tuple(zip(chain, chain[1:] + [receiver]))
    constants = {p: 0 for p in range(1, n + 1) if p not in istar}
    return CommunicationPlan(n, istar, receiver, channels, constants)


def partial_comm_distill(
    f: BooleanFunctionANF,
    local_noise: BooleanFunctionANF,
    epsilon,
    rounds: int,
):
    """Distill eps*FC(f) + (1-eps)*FC(local_noise) along an isolation plan.

    The realized input is XORed with a fresh copy of the local box, the
    non-isolated inputs are pinned to the plan constants and their outputs
    folded into the receiver, leaving exactly the noisy product box on the
    isolated parties; `rounds` two-copy rounds run on it at the box level,
    and the result is recombined with the perfectly-simulated remaining
    monomials.  Returns (final, trace, plan, residual) with
    final = eps_m*FC(f) + (1-eps_m)*FC(residual), residual = f minus the
    isolated monomial.  Every equality along the way is checked exactly.
    """
    eps = Fraction(epsilon)
    if not 0 < eps < 1:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    if rounds < 0:
        raise ValueError("rounds must be nonnegative")
    if local_noise.n != f.n:
        raise ValueError("party counts differ")
    if local_noise.degree() > 1:
        raise ValueError("local noise must have degree <= 1")
    n = f.n
    plan = make_isolation_plan(monomial_structure(f), n)
    istar = plan.isolated_monomial

    # pinning the non-isolated inputs to 0 must reduce the shifted function
    # to the bare product on the isolated parties
    shifted = f ^ local_noise
    pinned = frozenset(mono for mono in shifted.monomials if mono <= istar)
    if pinned != {istar}:
        extra = sorted(sorted(mono) for mono in pinned ^ {istar})
        raise ValueError(
            f"isolation leaves {extra} instead of the bare isolated monomial"
        )

    local_box = make_full_correlation(local_noise)
    realized = mix(make_full_correlation(f), local_box, eps)
    merged = xor_merge(realized, local_box)
    outside = sorted(set(range(1, n + 1)) - istar)
    isolated = collapse_parties(
        merged, dict(plan.constant_assignment), outside, plan.receiver
    )
    k = len(istar)
    pr_k, pc_k = make_npr(k), make_even_parity(k)
    if not box_equal(isolated, mix(pr_k, pc_k, eps)):
        raise AssertionError("isolated box is not the expected noisy product box")

    member = NoiseFamilyMember(pr_k, pc_k, eps)
    epsilons = [eps]
    for _ in range(rounds):
        member = bs_round(member)
        epsilons.append(member.epsilon)
    trace = DistillationTrace(k, tuple(epsilons))

    residual = BooleanFunctionANF(n, frozenset(f.monomials - {istar}))
    distilled = embed_parties(member.realized(), n, sorted(istar))
    final = xor_merge(distilled, make_full_correlation(residual))
    expected = mix(
        make_full_correlation(f), make_full_correlation(residual), member.epsilon
    )
    if not box_equal(final, expected):
        raise AssertionError("recombined box does not match the predicted mixture")
    return final, trace, plan, residual


@dataclass(frozen=True)
class FunctionSurveyEntry:
    code: int
    n_j: int
    m: tuple
    scratch: int
    distill_bound: int
    corollary: bool


@dataclass(frozen=True)
class OrbitSummary:
    """One equivalence class under input flips/permutations and output
    complement.  n_j and scratch are constant across the class (maximal
    monomials survive relabeling); max_m is not, because flips toggle
    non-maximal monomials, so the corollary verdict is tallied per member.
    """

    representative: int
    size: int
    is_nonlocal: bool
    n_j: int
    scratch: int | None
    max_m_range: tuple
    corollary_true: int
    corollary_false: int


@dataclass(frozen=True)
class SurveyReport:
    """Channel accounting across all 256 three-party functions.

    Orbits group functions equivalent under input flips, input permutations,
    and output complement.  precondition_failures lists non-local orbits in
    which no member at all satisfies the precondition, i.e. no local
    relabeling opens the certified channel saving; the pairwise-product
    triangle is such a class, so the precondition is not universal among
    non-local three-party functions.
    """

    total: int
    nonlocal_count: int
    entries: tuple
    orbits: tuple
    precondition_failures: tuple

    @property
    def all_nonlocal_satisfy_precondition(self) -> bool:
        return not self.precondition_failures


def _orbit_codes(code: int) -> frozenset:
    seen = set()
    for perm in permutations(range(3)):
        for flips in range(8):
            for comp in (0, 1):
                g = 0
                for x in range(8):
                    y = 0
                    for j in range(3):
                        y |= (((x >> perm[j]) & 1) ^ ((flips >> j) & 1)) << j
                    g |= (((code >> y) & 1) ^ comp) << x
                seen.add(g)
    return frozenset(seen)


def _survey_stats(code: int):
    f = anf_from_truth_table([(code >> i) & 1 for i in range(8)])
    s = monomial_structure(f)
    if not s.j_set:
        return s, None
    entry = FunctionSurveyEntry(
        code=code,
        n_j=s.n_j,
        m=tuple(sorted((tuple(sorted(mono)), cnt) for mono, cnt in s.m.items())),
        scratch=channels_scratch(s),
        distill_bound=channels_distill_bound(s, 3),
        corollary=corollary_holds(s, 3),
    )
    return s, entry


def survey_three_party() -> SurveyReport:
    """Exhaustive sweep of all 256 functions on three inputs.

    Any two degree >= 2 monomials on three variables share a party, so every
    non-local function here has a single connected block and all three cost
    quantities are defined.
    """
    entries = []
    stats = {}
    for code in range(256):
        s, entry = _survey_stats(code)
        stats[code] = (s, entry)
        if entry is not None:
            entries.append(entry)

    orbits = []
    failures = []
    assigned = set()
    for code in range(256):
        if code in assigned:
            continue
        orbit = _orbit_codes(code)
        assigned |= orbit
        rep = min(orbit)
        s, entry = stats[rep]
        max_ms, holds, fails = [], 0, 0
        for member in orbit:
            ms, mentry = stats[member]
            if (ms.n_j, len(ms.support)) != (s.n_j, len(s.support)):
                raise AssertionError("orbit members disagree on invariant pattern")
            if (mentry is None) != (entry is None):
                raise AssertionError("orbit mixes local and non-local members")
            max_ms.append(ms.max_m())
            if mentry is not None:
                holds += 1 if mentry.corollary else 0
                fails += 0 if mentry.corollary else 1
        summary = OrbitSummary(
            representative=rep,
            size=len(orbit),
            is_nonlocal=entry is not None,
            n_j=s.n_j,
            scratch=entry.scratch if entry else None,
            max_m_range=(min(max_ms), max(max_ms)),
            corollary_true=holds,
            corollary_false=fails,
        )
        orbits.append(summary)
        if entry is not None and holds == 0:
            failures.append(rep)

    return SurveyReport(
        total=256,
        nonlocal_count=len(entries),
        entries=tuple(entries),
        orbits=tuple(sorted(orbits, key=lambda o: o.representative)),
        precondition_failures=tuple(sorted(failures)),
    )
