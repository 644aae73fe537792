import dataclasses
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsboxes.anf import BooleanFunctionANF
from nsboxes.boxes import (
    box_equal,
    is_nonsignaling,
    make_even_parity,
    make_full_correlation,
    make_npr,
    mix,
)
from nsboxes.localdist import (
    CertificateError,
    DistanceCertificate,
    LocalVertex,
    enumerate_vertices,
    l1_distance_to_local,
    nearest_affine_oracle,
)

F = Fraction


def fc(n, terms):
    return make_full_correlation(BooleanFunctionANF.from_terms(n, terms))


# -- vertices ----------------------------------------------------------


def test_vertex_count():
    assert sum(1 for _ in enumerate_vertices(2)) == 16
    assert sum(1 for _ in enumerate_vertices(3)) == 64


def test_vertex_outputs_follow_code():
    # party i answers with bit x_i of the input; code packs the two
    # answer bits per party as (out1 << 1) | out0
    n = 2
    code = 0
    for i in range(n):
        code |= 0b10 << (2 * i)  # out0 = 0, out1 = 1 for every party
    v = LocalVertex(n, code)
    for xi in range(1 << n):
        assert v.output_for(xi) == xi


def test_vertex_box_is_deterministic_and_nonsignaling():
    v = LocalVertex(3, 0b011010)
    b = v.box()
    assert is_nonsignaling(b).ok
    for xi in range(8):
        row = b.row(xi)
        assert row[v.output_for(xi)] == 1
        assert sum(row) == 1


def test_vertex_code_range_checked():
    with pytest.raises(ValueError):
        LocalVertex(2, 256)
    with pytest.raises(ValueError):
        LocalVertex(2, -1)


# -- nearest affine oracle ---------------------------------------------


def test_oracle_zero_on_affine_functions():
    for terms in ([], [[1]], [[2]], [[1], [2], []]):
        f = BooleanFunctionANF.from_terms(3, terms)
        count, witness = nearest_affine_oracle(f)
        assert count == 0
        assert witness == f


def test_oracle_golden_five_party():
    f = BooleanFunctionANF.from_terms(5, [[1, 2, 3], [1, 4], [4, 5], [3]])
    count, witness = nearest_affine_oracle(f)
    assert count == 10
    assert witness == BooleanFunctionANF.from_terms(5, [[3]])


def test_oracle_golden_triple_and():
    count, witness = nearest_affine_oracle(
        BooleanFunctionANF.from_terms(3, [[1, 2, 3]])
    )
    assert count == 1
    assert witness == BooleanFunctionANF.from_terms(3, [])


# -- distance goldens ----------------------------------------------------


def test_distance_npr2():
    cert = l1_distance_to_local(make_npr(2))
    assert cert.distance == 2
    assert cert.verify(make_npr(2))


def test_distance_npr3():
    cert = l1_distance_to_local(make_npr(3))
    assert cert.distance == 2
    assert cert.verify(make_npr(3))


def test_distance_even_parity_is_zero():
    for n in (2, 3):
        cert = l1_distance_to_local(make_even_parity(n))
        assert cert.distance == 0
        assert cert.verify(make_even_parity(n))


def test_distance_four_party_golden():
    box = fc(4, [[1, 2, 3], [1, 4]])
    cert = l1_distance_to_local(box)
    assert cert.distance == 8
    assert cert.verify(box)


def test_distance_five_party_golden_symmetric():
    box = fc(5, [[1, 2, 3], [1, 4], [4, 5], [3]])
    cert = l1_distance_to_local(box, use_symmetry=True)
    assert cert.distance == 20
    assert cert.method == "exact+symmetry"
    assert box_equal(cert.closest_box, fc(5, [[3]]))
    assert cert.verify(box)


def test_distance_matches_doubled_affine_count_all_n3():
    # for full-correlation boxes the polytope distance is exactly twice
    # the Hamming distance to the nearest affine function
    for tt in range(256):
        terms = [
            [i + 1 for i in range(3) if (m >> i) & 1]
            for m in range(8)
            if (tt >> m) & 1
        ]
        f = BooleanFunctionANF.from_terms(3, terms)
        box = make_full_correlation(f)
        count, _ = nearest_affine_oracle(f)
        cert = l1_distance_to_local(box)
        assert cert.distance == 2 * count, f.monomials


def test_mixing_scales_distance_linearly():
    base = make_npr(2)
    local = make_even_parity(2)
    for eps in (F(1, 3), F(3, 4), F(1, 10)):
        cert = l1_distance_to_local(mix(base, local, eps))
        assert cert.distance == eps * 2


# -- certificate self-checks ---------------------------------------------


def _npr2_cert():
    return l1_distance_to_local(make_npr(2))


def test_verify_rejects_wrong_box():
    cert = _npr2_cert()
    with pytest.raises(CertificateError):
        cert.verify(make_even_parity(2))


def test_verify_rejects_tampered_distance():
    cert = _npr2_cert()
    bad = dataclasses.replace(cert, distance=F(3, 2))
    with pytest.raises(CertificateError):
        bad.verify(make_npr(2))


def test_verify_rejects_tampered_weights():
    cert = _npr2_cert()
    (c0, w0), *rest = cert.weights
    bad = dataclasses.replace(cert, weights=((c0, w0 / 2), *rest))
    with pytest.raises(CertificateError, match="sum"):
        bad.verify(make_npr(2))
    bad = dataclasses.replace(cert, weights=((c0 ^ 1, w0), *rest))
    with pytest.raises(CertificateError):
        bad.verify(make_npr(2))


def test_verify_rejects_tampered_dual():
    cert = _npr2_cert()
    dual = list(cert.dual)
    dual[0] += 2  # leaves [-1, 1]
    with pytest.raises(CertificateError, match=r"\[-1,1\]"):
        dataclasses.replace(cert, dual=tuple(dual)).verify(make_npr(2))
    dual = list(cert.dual)
    dual[0], dual[1] = dual[1], dual[0]
    bad = dataclasses.replace(cert, dual=tuple(dual))
    with pytest.raises(CertificateError):
        bad.verify(make_npr(2))


def test_verify_rejects_tampered_closest_box():
    cert = _npr2_cert()
    bad = dataclasses.replace(cert, closest_box=make_npr(2))
    with pytest.raises(CertificateError):
        bad.verify(make_npr(2))


def test_as_dict_round_trippable_shape():
    cert = _npr2_cert()
    d = cert.as_dict()
    assert d["n"] == 2
    assert d["distance"] == "2/1"
    assert d["closest_box"]["kind"] == "table"
    assert set(len(k) for k in d["closest_box"]["probs"]) == {2}
    assert all("/" in w for _, w in d["weights"])
    assert len(d["dual"]) == 16
    assert d["pivots"] == cert.pivots


# -- options ---------------------------------------------------------------


def test_symmetry_agrees_with_full_solve():
    for box in (make_npr(2), make_npr(3), make_even_parity(3)):
        full = l1_distance_to_local(box)
        sym = l1_distance_to_local(box, use_symmetry=True)
        assert full.distance == sym.distance
        sym.verify(box)


def test_symmetry_rejects_asymmetric_box():
    box = make_npr(2)
    asym = mix(box, LocalVertex(2, 0).box(), F(1, 2))
    with pytest.raises(ValueError, match="invariant"):
        l1_distance_to_local(asym, use_symmetry=True)


def test_party_cap():
    box = make_npr(6)
    with pytest.raises(ValueError, match="cap"):
        l1_distance_to_local(box)


def test_unknown_method_rejected():
    with pytest.raises(ValueError, match="method"):
        l1_distance_to_local(make_npr(2), method="float")


def test_force_pure_same_certificate():
    a = l1_distance_to_local(make_npr(2))
    b = l1_distance_to_local(make_npr(2), force_pure=True)
    assert b.backend == "pure"
    assert (a.distance, a.weights, a.dual) == (b.distance, b.weights, b.dual)


@given(st.integers(min_value=0, max_value=255))
@settings(max_examples=40, deadline=None)
def test_distance_bounds_full_correlation_n3(tt):
    terms = [
        [i + 1 for i in range(3) if (m >> i) & 1]
        for m in range(8)
        if (tt >> m) & 1
    ]
    box = make_full_correlation(BooleanFunctionANF.from_terms(3, terms))
    cert = l1_distance_to_local(box)
    # the worst 3-party full-correlation box sits at 2x the covering
    # radius of the length-8 first-order Reed-Muller code, which is 2
    assert 0 <= cert.distance <= 4
    assert cert.verify(box)


# -- presolve -----------------------------------------------------------


scipy = pytest.importorskip("scipy", reason="presolve needs scipy")


def test_presolve_agrees_on_goldens():
    for box, want in ((make_npr(2), 2), (make_npr(3), 2), (make_even_parity(3), 0)):
        cert = l1_distance_to_local(box, method="presolve")
        assert cert.distance == want
        assert cert.verify(box)


def test_presolve_five_party():
    box = fc(5, [[1, 2, 3], [1, 4], [4, 5], [3]])
    cert = l1_distance_to_local(box, method="presolve")
    assert cert.distance == 20
    assert cert.verify(box)
