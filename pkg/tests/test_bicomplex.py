import random
from math import comb

import pytest

from fss.bicomplex import (
    BicomplexError,
    Bicomplex,
    FormAlgebra,
    conjugate,
    expand,
    from_json,
    presentation_partners,
    to_json,
    validate,
)
from fss.dsl import parse
from fss.linalg import Matrix
from fss.models import get_family, nakamura_family
from fss.scalars import Scalar
from fss.spectral import page1, table_order

from helpers import model, pageset, random_bicomplex


def test_torus_like_two_generators():
    pres = parse("gen a : (1,0) conj b;\ngen b : (0,1) conj a;\n")
    B = expand(pres)
    assert {bd: B.dim(*bd) for bd in B.bidegrees()} == {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}
    assert all(B.del_(*bd).is_zero() and B.delbar(*bd).is_zero() for bd in B.bidegrees())


def test_empty_presentation_is_a_point():
    B = expand(parse(""))
    assert B.dim(0, 0) == 1 and B.total_dim(0) == 1


def test_nakamura_t0_phi2():
    B = model("nakamura", "0")
    labels = B.labels(1, 0)
    j = labels.index("phi2")
    col = B.delbar(1, 0).column(j)
    assert not any(col)
    d = dict(zip(B.labels(2, 0), B.del_(1, 0).column(j)))
    assert d["phi1^phi2"] == Scalar(-1)
    assert all(not v for k, v in d.items() if k != "phi1^phi2")


def test_nakamura_half_weight_term():
    B = model("nakamura", "1/2")
    # 3 generators of each type, weights -2..2
    assert sum(B.dim(*bd) for bd in B.bidegrees()) == 5 * 64
    assert not validate(B)
    j = B.labels(0, 1).index("phibar2")
    d = dict(zip(B.labels(1, 1), B.del_(0, 1).column(j)))
    assert d["u[1]*phi1^phibar1"] == Scalar.parse("1/2")
    assert d["phi1^phibar2"] == Scalar(-1)


@pytest.mark.parametrize("W", [1, 2, 3])
def test_weight_cutoff_stability(W):
    B = model("nakamura", "1/2", W)
    assert not validate(B)
    assert B.truncated_rule_terms == ()
    ref = pageset("nakamura", "1/2")
    ps = pageset("nakamura", "1/2", W)
    assert [ps.profile(r) for r in range(1, 5)] == [ref.profile(r) for r in range(1, 5)]


def test_zero_window_reports_truncation():
    B = model("nakamura", "1/2", 0)
    assert len(B.truncated_rule_terms) == 1
    assert "phibar2" in B.truncated_rule_terms[0]
    assert model("nakamura", "0", 0).truncated_rule_terms == ()


def test_weights_none_is_window_zero():
    a = model("nakamura", "1/2", None, "none")
    b = model("nakamura", "1/2", 0)
    assert a == b


def test_weight_lowering_rejected():
    from fss.bicomplex import DTerm, GeneratorDecl, StructurePresentation
    from fss.scalars import ParamExpr

    pres = StructurePresentation(
        (GeneratorDecl("a", (1, 0), 0, "b"), GeneratorDecl("b", (0, 1), 0, "a"), GeneratorDecl("u", (0, 0), 1, "u")),
        {"a": (DTerm(ParamExpr.const(1), -1, ("a", "b")),)},
        (),
        "u",
    )
    with pytest.raises(BicomplexError):
        expand(pres)


def test_d_squared_nonzero_rejected():
    pres = parse(
        "gen a : (1,0) conj b;\ngen b : (0,1) conj a;\ngen c : (1,0) conj e;\ngen e : (0,1) conj c;\n"
        "gen f : (1,0) conj g;\ngen g : (0,1) conj f;\n"
        "d c = a^b;\nd f = c^e;\n"
    )
    with pytest.raises(BicomplexError, match="d\\^2"):
        expand(pres)


def test_fault_injection_names_bidegree():
    # at t=0 every nakamura differential is phi1 ^ (...), so rescaling an
    # entry never breaks d^2 = 0; iwasawa couples del and delbar
    B = model("iwasawa")
    assert not validate(B)
    found = 0
    for bd in B.bidegrees():
        M = B.del_(*bd)
        for i, j, x in M.nonzero_entries():
            dels = dict(B.dels)
            dels[bd] = M.replace(i, j, x * 2)
            report = validate(Bicomplex(B.n, B.basis, dels, B.delbars))
            if report:
                near = {bd, (bd[0] - 1, bd[1]), (bd[0], bd[1] - 1)}
                assert any(v.bidegree in near for v in report)
                assert all("basis element" in v.detail for v in report)
                found += 1
    assert found


@pytest.mark.parametrize("name", ["nakamura", "torus", "iwasawa"])
def test_euler_characteristic_of_expansion(name):
    fam = get_family(name)
    B = expand(fam.presentation, fam.values())
    odd = len(fam.presentation.odd_generators)
    window = 2 * 2 + 1 if fam.presentation.weight_symbol else 1
    chi = sum((-1) ** (p + q) * B.dim(p, q) for p, q in B.bidegrees())
    assert chi == sum((-1) ** k * comb(odd, k) for k in range(odd + 1)) * window


@pytest.mark.parametrize("t", ["0", "1/2", "i/3"])
def test_leibniz(t):
    fam = nakamura_family()
    alg = FormAlgebra(fam.presentation, fam.values(Scalar.parse(t)))
    rng = random.Random(t)
    B = model("nakamura", t)
    elems = [e for bd in B.bidegrees() for e in B.basis[bd]]
    for _ in range(200):
        a, b = rng.choice(elems), rng.choice(elems)
        if abs(a.weight + b.weight) > 2:
            continue
        f, g = {(a.monomial, a.weight): Scalar(1)}, {(b.monomial, b.weight): Scalar(1)}
        lhs = alg.d(alg.wedge(f, g))
        sign = -1 if len(a.monomial) % 2 else 1
        r1 = alg.wedge(alg.d(f), g)
        r2 = alg.wedge(f, alg.d(g))
        rhs = dict(r1)
        for k, v in r2.items():
            rhs[k] = rhs.get(k, Scalar(0)) + v * sign
        rhs = {k: v for k, v in rhs.items() if v}
        assert lhs == rhs


def test_conjugate_involution_and_swap():
    B = model("nakamura", "0")
    partners = presentation_partners(nakamura_family().presentation)
    C = conjugate(B, partners)
    assert conjugate(C, partners) == B
    for (p, q) in B.bidegrees():
        assert C.dim(q, p) == B.dim(p, q)
        assert C.del_(q, p) == B.delbar(p, q).conj()
        assert C.delbar(q, p) == B.del_(p, q).conj()


def test_conjugate_e1_swaps_on_nakamura_t0():
    B = model("nakamura", "0")
    C = conjugate(B, presentation_partners(nakamura_family().presentation))
    E, F = page1(B), page1(C)
    assert all(F.dim(p, q) == E.dim(q, p) for p, q in table_order(3))


def test_conjugate_missing_partner():
    B = model("torus")
    with pytest.raises(BicomplexError):
        conjugate(B, {"phi1": "phibar1"})


@pytest.mark.parametrize("seed", [1, 2])
def test_json_roundtrip(seed):
    for B in (model("nakamura", "1/2"), random_bicomplex(seed, grams=True)):
        assert from_json(to_json(B)) == B
