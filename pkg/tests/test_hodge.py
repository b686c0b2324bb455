"""Modified Laplacian, harmonic spaces, three-space decomposition and Green operator."""

import random

import pytest

from fss.bicomplex import Bicomplex
from fss.hodge import (
    HodgeError,
    build_hodge,
    check_finite_rank_form,
    green,
    is_positive_definite,
    ker_lapt_dims,
    orthogonal_basis,
    psd_certificate,
    three_space_decomposition,
)
from fss.linalg import Matrix, Subspace, gram_adjoint, image, inner, kernel, orthogonal_projector
from fss.scalars import ONE, ZERO, Scalar
from fss.spectral import einf_and_degeneration, table_order

from helpers import E2_0, E2_T, SHIPPED, hodge, model, pageset, profile, rand_scalar, random_bicomplex


def zero_complex(n=2, d=2):
    dims = {(p, q): d for p in range(n + 1) for q in range(n + 1)}
    basis = {bd: [f"x{bd[0]}{bd[1]}_{i}" for i in range(k)] for bd, k in dims.items()}
    dels = {(p, q): Matrix.zeros(d, d) for p in range(n) for q in range(n + 1)}
    delbars = {(p, q): Matrix.zeros(d, d) for p in range(n + 1) for q in range(n)}
    return Bicomplex(n, basis, dels, delbars, None, name="zero")


def e2_dims(name, t):
    return {bd: pageset(name, t).page(2).dim(*bd) for bd in table_order(3)}


def test_harmonic_t0_middle():
    assert hodge("nakamura", "0").harmonic_dims(1, 1) == 9


def test_harmonic_t_half_spanned_by_closed_forms():
    H = hodge("nakamura", "1/2")
    B = H.B
    assert H.harmonic_dims(1, 0) == 2
    labels = [e.label for e in B.basis[(1, 0)]]
    want = Subspace(len(labels), [tuple(ONE if l == g else ZERO for l in labels) for g in ("phi1", "phi3")])
    assert H.harmonic[(1, 0)] == want


def test_zero_differential_everything_harmonic():
    H = build_hodge(zero_complex())
    for bd, L in H.lapt.items():
        assert L.is_zero()
        assert H.lapt_kernel[bd].dim == H.B.dim(*bd)
        assert H.harmonic_dims(*bd) == H.B.dim(*bd)


def test_ker_lapt_t0_equals_e2():
    H = hodge("nakamura", "0")
    k = ker_lapt_dims(H)
    assert profile(k) == E2_0
    assert sum(k[(p, 2 - p)] for p in range(3)) == 5


def test_ker_lapt_t_half_degree_two():
    k = ker_lapt_dims(hodge("nakamura", "1/2"))
    assert sum(k[(p, 2 - p)] for p in range(3)) == 6


def test_ker_lapt_t_half_reference_table():
    assert profile(ker_lapt_dims(hodge("nakamura", "1/2"))) == E2_T


@pytest.mark.parametrize("name,t", SHIPPED)
def test_ker_lapt_equals_e2_shipped(name, t):
    assert ker_lapt_dims(hodge(name, t)) == e2_dims(name, t)


@pytest.mark.parametrize("seed", range(12))
def test_ker_lapt_equals_e2_random_metric(seed):
    B = random_bicomplex(seed, grams=True)
    H = build_hodge(B)
    ps = einf_and_degeneration(B)
    for p, q in table_order(B.n):
        assert H.lapt_kernel[(p, q)].dim == ps.page(2).dim(p, q)


def test_three_space_t0_middle():
    H = hodge("nakamura", "0")
    dec = three_space_decomposition(H, 1, 1)
    assert dec.dims[0] == 3
    assert sum(dec.dims) == H.B.dim(1, 1)


def test_three_space_t_half_02():
    H = hodge("nakamura", "1/2")
    dec = three_space_decomposition(H, 0, 2)
    assert dec.dims[0] == 3
    assert sum(dec.dims) == H.B.dim(0, 2)


def test_three_space_zero_complex():
    H = build_hodge(zero_complex())
    for p, q in table_order(2):
        assert three_space_decomposition(H, p, q).dims == (H.B.dim(p, q), 0, 0)


@pytest.mark.parametrize("name,t", SHIPPED)
def test_three_space_all_bidegrees(name, t):
    H = hodge(name, t)
    for p, q in table_order(H.B.n):
        dec = three_space_decomposition(H, p, q)
        assert sum(dec.dims) == H.B.dim(p, q)


@pytest.mark.parametrize("seed", range(6))
def test_three_space_random_metric(seed):
    H = build_hodge(random_bicomplex(100 + seed, grams=True))
    for p, q in table_order(H.B.n):
        three_space_decomposition(H, p, q)


@pytest.mark.parametrize("name,t", [("nakamura", "0"), ("nakamura", "1/2")])
def test_green_identities(name, t):
    H = hodge(name, t)
    for p, q in table_order(H.B.n):
        L = H.lapt[(p, q)]
        Gr = green(H, p, q)
        G = H.B.gram_or_none(p, q)
        P = orthogonal_projector(H.lapt_kernel[(p, q)], G)
        I = Matrix.identity(L.rows)
        assert L @ Gr + P == I
        assert Gr @ L + P == I
        assert Gr @ P == Matrix.zeros(L.rows, L.rows)
        assert gram_adjoint(Gr, G, G) == Gr


def test_green_random_metric():
    H = build_hodge(random_bicomplex(7, grams=True))
    for p, q in table_order(H.B.n):
        L, Gr = H.lapt[(p, q)], green(H, p, q)
        G = H.B.gram_or_none(p, q)
        P = orthogonal_projector(H.lapt_kernel[(p, q)], G)
        assert L @ Gr + P == Matrix.identity(L.rows)
        assert gram_adjoint(Gr, G, G) == Gr


def test_green_zero_complex():
    H = build_hodge(zero_complex())
    for p, q in table_order(2):
        assert green(H, p, q).is_zero()


@pytest.mark.parametrize("name,t", [("nakamura", "0"), ("nakamura", "1/2")])
def test_psd_certificate(name, t):
    H = hodge(name, t)
    for p, q in table_order(H.B.n):
        cert = psd_certificate(H, p, q)
        d = H.B.dim(p, q)
        total = Matrix.zeros(d, d)
        for _, M, Ms in cert:
            total = total + Ms @ M
        assert total == H.lapt[(p, q)]


def test_lapt_nonnegative_on_random_vectors():
    H = hodge("nakamura", "1/2")
    rng = random.Random(3)
    bds = [bd for bd in table_order(3) if H.B.dim(*bd)]
    for _ in range(100):
        bd = rng.choice(bds)
        x = tuple(rand_scalar(rng) for _ in range(H.B.dim(*bd)))
        v = inner(H.lapt[bd] @ x, x, H.B.gram_or_none(*bd))
        assert v.im == 0 and v.re >= 0
        if v.re == 0:
            assert H.lapt_kernel[bd].contains(x)


@pytest.mark.parametrize("name,t", [("nakamura", "0"), ("nakamura", "1/2"), ("iwasawa", "0")])
def test_finite_rank_form(name, t):
    H = hodge(name, t)
    for p, q in table_order(H.B.n):
        assert check_finite_rank_form(H, p, q)


@pytest.mark.parametrize("seed", range(4))
def test_finite_rank_form_random_metric(seed):
    H = build_hodge(random_bicomplex(200 + seed, grams=True))
    for p, q in table_order(H.B.n):
        assert check_finite_rank_form(H, p, q)


def test_projector_is_orthogonal():
    H = build_hodge(random_bicomplex(11, grams=True))
    for bd, P in H.pproj.items():
        G = H.B.gram_or_none(*bd)
        assert P @ P == P
        assert gram_adjoint(P, G, G) == P
        assert image(P) == H.harmonic[bd]


def test_orthogonal_basis():
    B = random_bicomplex(5, grams=True)
    bd = max(B.basis, key=lambda b: B.dim(*b))
    G = B.gram_or_none(*bd)
    d = B.dim(*bd)
    V = Subspace.full(d)
    es = orthogonal_basis(V, G)
    assert len(es) == d
    for a in range(d):
        for b in range(a):
            assert inner(es[a], es[b], G) == ZERO


def test_positive_definite():
    assert is_positive_definite(Matrix.identity(3))
    M = Matrix([[ONE, Scalar(2)], [Scalar(2), ONE]], 2, 2)
    assert not is_positive_definite(M)
    assert not is_positive_definite(Matrix([[ONE, Scalar(0, 1)], [Scalar(0, 1), ONE]], 2, 2))


def test_non_definite_gram_rejected():
    B = model("nakamura", "0")
    bad = {bd: -Matrix.identity(B.dim(*bd)) for bd in B.basis if B.dim(*bd)}
    B2 = Bicomplex(B.n, B.basis, B.dels, B.delbars, bad, name="bad")
    with pytest.raises(ValueError):
        build_hodge(B2)
