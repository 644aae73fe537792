"""Acceptance gate: one test per criterion, one PASS/FAIL line each.

Run with -s to see the lines as they print. Oracles are computed inside
the tests, independently of the library code they check. One check is
expected to fail: the stated exclusive-party count tuple for the
five-party worked example disagrees with the value the definition
yields, and the test asserts the stated tuple rather than papering over
the difference.
"""

import math
import time
from fractions import Fraction as F
from random import Random

from nsboxes.anf import BooleanFunctionANF, anf_from_truth_table, monomial_structure
from nsboxes.boxes import (
    NoiseFamilyMember,
    box_equal,
    is_nonsignaling,
    make_even_parity,
    make_full_correlation,
    make_npr,
    mix,
    subset_outputs_uniform,
)
from nsboxes.comm import channels_distill_bound, corollary_holds, survey_three_party
from nsboxes.distill import bs_round, distill_to, stability_report, t_map, verify_relations
from nsboxes.reproduce import run_reproduction
from nsboxes.wiring import (
    bs_wiring,
    build_from_prs,
    compose_adaptive,
    lemma3_compose,
    sample_many,
    xor_local_part,
)


def check(num, desc, ok):
    print(f"{'PASS' if ok else 'FAIL'} criterion {num}: {desc}")
    assert ok, f"criterion {num}: {desc}"


def test_01_composition_relations():
    t0 = time.perf_counter()
    for n in (2, 3, 4, 5):
        rep = verify_relations(n)
        assert rep.pr_pr and rep.pr_pc and rep.pc_pr and rep.pc_pc
        assert rep.all_hold
    elapsed = time.perf_counter() - t0
    check(1, f"all four composition relations exact for n=2..5 "
             f"({elapsed:.2f}s < 10s)", elapsed < 10)


def test_02_scalar_map_soundness():
    rng = Random(28)
    t0 = time.perf_counter()
    for _ in range(25):
        q = rng.randint(2, 999)
        eps = F(rng.randint(1, q - 1), q)
        n = rng.choice((2, 3, 4))
        member = NoiseFamilyMember(make_npr(n), make_even_parity(n), eps)
        out = bs_round(member)  # box-level: composes, decomposes, verifies
        assert out.epsilon == t_map(n, eps)
        assert out.epsilon == eps * (2 ** (n - 1) + 1 - eps) / 2 ** (n - 1)
    elapsed = time.perf_counter() - t0
    check(2, f"box-level round equals the scalar map on 25 random "
             f"rationals ({elapsed:.2f}s < 30s)", elapsed < 30)


def test_03_fixed_point_stability():
    for n in range(2, 9):
        rep = stability_report(n)
        assert rep.derivative_at_0 == 1 + F(1, 2 ** (n - 1))
        assert rep.derivative_at_1 == 1 + F(1, 2 ** (n - 1)) - F(1, 2 ** (n - 2))
        assert rep.classification == ("repulsive", "attractive")
        # independent second-order one-sided stencils; the map is
        # quadratic, so these reproduce the derivative exactly while
        # keeping every evaluation point inside [0, 1]
        h = F(1, 10 ** 6)
        fd0 = (4 * t_map(n, h) - 3 * t_map(n, 0) - t_map(n, 2 * h)) / (2 * h)
        fd1 = (3 * t_map(n, 1) - 4 * t_map(n, 1 - h) + t_map(n, 1 - 2 * h)) / (2 * h)
        assert abs(fd0 - rep.derivative_at_0) < F(1, 10 ** 9)
        assert abs(fd1 - rep.derivative_at_1) < F(1, 10 ** 9)
    check(3, "fixed-point derivatives exact for n=2..8, classified "
             "(repulsive, attractive), finite differences within 1e-9", True)


def oracle_round_count(n, eps0, delta):
    """Directed-rounding interval iteration, independent of distill.py.

    The round map is increasing on [0, 1], so rounding down tracks a
    certified lower bound and rounding up a certified upper bound; the
    count is exact when both bounds cross the threshold at the same round.
    """
    denom = 1 << 240
    pow2 = 2 ** (n - 1)

    def step(v):
        return v * (pow2 + 1 - v) / pow2

    lo = hi = F(eps0)
    rounds = 0
    while 1 - lo >= delta:
        assert 1 - hi >= delta, "bounds disagree on the stopping round"
        lo = F(math.floor(step(lo) * denom), denom)
        hi = min(F(-math.floor(-step(hi) * denom), denom), F(1))
        rounds += 1
    assert 1 - hi < delta, "bounds disagree on the stopping round"
    return rounds


def test_04_convergence_with_audit():
    expected = oracle_round_count(3, F(1, 10), F(1, 1000))
    trace = distill_to(3, F(1, 10), F(1, 1000),
                       audit_boxlevel=True, audit_rounds=4)
    trace.verify()
    assert trace.rounds == expected
    assert 1 - trace.final_lower_bound() < F(1, 1000)
    # redo the first four rounds through full box composition here too
    member = NoiseFamilyMember(make_npr(3), make_even_parity(3), F(1, 10))
    for k in range(1, 5):
        member = bs_round(member)
        assert member.epsilon == trace.epsilons[k]
    check(4, f"n=3 from 1/10 reaches 1-eps < 1/1000 in {trace.rounds} rounds "
             f"(= independent oracle), box audit exact for rounds 1..4",
          trace.rounds == expected)


def test_05_worked_example():
    t0 = time.perf_counter()
    report = run_reproduction()
    elapsed = time.perf_counter() - t0
    by_name = {it.name: it for it in report.items}

    quoted_m = by_name.pop("exclusive-party counts m")  # asserted separately
    bad = [it.name for it in by_name.values() if not it.ok]
    assert not bad, f"unexpected mismatches: {bad}"

    assert by_name["connected blocks n_J"].computed == "1"
    assert by_name["scratch channel count"].computed == "4"
    assert by_name["distillation channel bound"].computed == "2"
    assert by_name["channel chain"].computed == "5>4, 4>1"
    assert by_name["isolated monomial"].computed == "[1, 2, 3]"
    assert by_name["isolated box is the noisy 3-party product"].computed == "True"
    assert by_name["polytope distance"].computed == "20"
    assert by_name["closest box parity"].computed == "[[3]]"
    assert by_name["certified closest box matches that parity"].computed == "True"
    assert quoted_m.computed == str((2, 0, 1))  # what the definition yields

    ok = elapsed < 600
    check(5, f"five-party worked example: isolation chain, exact mixture, "
             f"distance 20 with x3-parity witness ({elapsed:.1f}s < 600s)", ok)


def test_05_stated_exclusive_counts():
    """The one stated value the definition does not reproduce.

    Exclusive-party counts: a party counts for a monomial only when it
    appears in no other degree >= 2 monomial. In {1,4}, party 1 also sits
    in {1,2,3} and party 4 in {4,5}, so the middle count is 0, yet the
    stated tuple is (2,1,1). Asserted as stated; expected to fail.
    """
    f = BooleanFunctionANF.from_terms(5, [[1, 2, 3], [1, 4], [4, 5], [3]])
    s = monomial_structure(f)
    m_tuple = tuple(s.m[frozenset(mono)] for mono in ([1, 2, 3], [1, 4], [4, 5]))
    check(5, f"stated exclusive-party counts (2, 1, 1); definition gives "
             f"{m_tuple}", m_tuple == (2, 1, 1))


def random_anf(rng, n):
    monos = [frozenset(i + 1 for i in range(n) if mask >> i & 1)
             for mask in range(1 << n) if rng.random() < 0.3]
    return BooleanFunctionANF(n, frozenset(monos))


def test_06_construction_soundness():
    for code in range(256):
        f = anf_from_truth_table([(code >> i) & 1 for i in range(8)])
        built, used = build_from_prs(f)
        assert box_equal(built, make_full_correlation(f))
        assert used == len(f.monomials)

    rng = Random(13)
    for _ in range(50):
        f = random_anf(rng, rng.choice((4, 5)))
        built, _ = build_from_prs(f)
        assert box_equal(built, make_full_correlation(f))

    for _ in range(20):
        n = rng.choice((3, 4, 5))
        k1 = rng.randint(1, n - 1)
        k2 = rng.randint(k1, n - 1)
        k3 = rng.randint(k2 + 1, n)
        g1 = random_anf(rng, k2)
        p1 = make_full_correlation(g1)
        p2 = make_full_correlation(
            BooleanFunctionANF.product_term(n - k1 + 1, range(1, k3 - k1 + 2)))
        got = lemma3_compose(p1, g1, p2, k1, k2, k3)
        lifted = BooleanFunctionANF(n, g1.monomials)
        want = make_full_correlation(
            lifted ^ BooleanFunctionANF.product_term(n, range(k1, k3 + 1)))
        assert box_equal(got, want)
    check(6, "PR-per-monomial construction exact on all 256 three-party "
             "functions + 50 random at n=4,5; merge rule exact on 20 "
             "random admissible instances", True)


def test_07_moebius_round_trips():
    for code in range(256):
        tt = tuple((code >> i) & 1 for i in range(8))
        f = anf_from_truth_table(tt)
        assert f.truth_table() == tt

    rng = Random(7)
    for _ in range(200):
        n = rng.choice((4, 5))
        tt = tuple(rng.getrandbits(1) for _ in range(1 << n))
        f = anf_from_truth_table(tt)
        assert f.truth_table() == tt
        again = anf_from_truth_table(f.truth_table())
        assert again == f
    check(7, "Moebius transform round trips all 256 three-party tables "
             "and 200 random tables at n=4,5", True)


def corpus():
    f5 = BooleanFunctionANF.from_terms(5, [[1, 2, 3], [1, 4], [4, 5], [3]])
    f3 = BooleanFunctionANF.from_terms(3, [[1, 2], [3]])
    boxes = []
    for n in (2, 3, 4, 5):
        boxes.append((f"npr{n}", make_npr(n)))
        boxes.append((f"even{n}", make_even_parity(n)))
    boxes.append(("fc5", make_full_correlation(f5)))
    boxes.append(("fc3", make_full_correlation(f3)))
    for eps in (F(1, 10), F(1, 2), F(9, 10)):
        boxes.append((f"mix2@{eps}", mix(make_npr(2), make_even_parity(2), eps)))
    boxes.append(("mix3", mix(make_npr(3), make_even_parity(3), F(1, 7))))
    noisy = mix(make_npr(3), make_even_parity(3), F(1, 10))
    boxes.append(("wired3", compose_adaptive(noisy, noisy, bs_wiring(3))))
    boxes.append(("built", build_from_prs(f3)[0]))
    boxes.append(("merged", lemma3_compose(
        make_full_correlation(BooleanFunctionANF.product_term(2, (1, 2))),
        BooleanFunctionANF.product_term(2, (1, 2)),
        make_full_correlation(BooleanFunctionANF.product_term(2, (1, 2))),
        2, 2, 3)))
    boxes.append(("shifted", xor_local_part(
        noisy, BooleanFunctionANF.from_terms(3, [[2], []]))))
    return boxes


def test_08_property_suites_and_sampling():
    for name, box in corpus():
        assert is_nonsignaling(box).ok, name
        for k in range(1, box.n):
            assert subset_outputs_uniform(box, k), (name, k)

    pairs = [
        ("npr2", make_npr(2), (1, 1)),
        ("npr3", make_npr(3), (1, 1, 1)),
        ("npr3", make_npr(3), (0, 0, 0)),
        ("even3", make_even_parity(3), (1, 0, 1)),
        ("mix2", mix(make_npr(2), make_even_parity(2), F(1, 10)), (1, 1)),
        ("mix3", mix(make_npr(3), make_even_parity(3), F(1, 2)), (0, 1, 1)),
        ("npr4", make_npr(4), (1, 1, 1, 1)),
        ("fc3", make_full_correlation(
            BooleanFunctionANF.from_terms(3, [[1, 2], [3]])), (1, 1, 0)),
        ("fc5", make_full_correlation(BooleanFunctionANF.from_terms(
            5, [[1, 2, 3], [1, 4], [4, 5], [3]])), (1,) * 5),
        ("bs2", mix(make_npr(2), make_even_parity(2), t_map(2, F(1, 3))), (1, 0)),
    ]
    count = 100_000
    for k, (name, box, bits) in enumerate(pairs):
        freq = sample_many(box, bits, count, 100 + k)
        xi = sum(b << i for i, b in enumerate(bits))
        for ai in range(1 << box.n):
            p = box.prob_index(xi, ai)
            got = freq.get(tuple((ai >> i) & 1 for i in range(box.n)), 0)
            if p == 0:
                assert got == 0, (name, ai)
                continue
            dev = F(got, count) - p
            assert dev * dev <= 9 * p * (1 - p) / count, (name, bits, ai)
    check(8, "non-signaling + subset uniformity across the corpus; "
             "10 sampled (box, input) pairs within 3 sigma at 1e5 draws", True)


def test_09_three_party_survey():
    report = survey_three_party()
    assert report.total == 256

    # pairwise-product triangle: no relabeling satisfies the precondition
    triangle = BooleanFunctionANF.from_terms(3, [[1, 2], [1, 3], [2, 3]])
    assert not corollary_holds(monomial_structure(triangle), 3)
    tri_code = sum(b << x for x, b in enumerate(triangle.truth_table()))
    orbit = set()
    from itertools import permutations
    for perm in permutations(range(3)):
        for flips in range(8):
            for comp in (0, 1):
                g = 0
                for x in range(8):
                    y = 0
                    for j in range(3):
                        y |= (((x >> perm[j]) & 1) ^ ((flips >> j) & 1)) << j
                    g |= (((tri_code >> y) & 1) ^ comp) << x
                orbit.add(g)
    assert min(orbit) in report.precondition_failures

    # the triple product needs no channels at all when distilling
    anded = BooleanFunctionANF.product_term(3, (1, 2, 3))
    assert channels_distill_bound(monomial_structure(anded), 3) == 0
    and_code = sum(b << x for x, b in enumerate(anded.truth_table()))
    entry = next(e for e in report.entries if e.code == and_code)
    assert entry.distill_bound == 0

    # the blanket claim fails and the report says so
    assert report.all_nonlocal_satisfy_precondition is False
    assert report.precondition_failures
    check(9, "survey: triangle orbit fails the precondition, triple product "
             "distills with 0 channels, blanket claim surfaced as false", True)
