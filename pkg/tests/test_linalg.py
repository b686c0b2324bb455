import random
from fractions import Fraction

import pytest
import sympy

from fss.linalg import (
    LinalgError,
    Matrix,
    Subspace,
    complement,
    coordinates,
    gram_adjoint,
    image,
    inner,
    intersect,
    inverse,
    kernel,
    orthogonal_projector,
    preimage,
    rank,
    rref,
    solve,
    subspace_sum,
)
from fss.scalars import ONE, ZERO, Scalar

from helpers import rand_invertible, rand_scalar


def rand_matrix(rng, r, c, density=0.6, complex_=True):
    return Matrix([[rand_scalar(rng, complex_=complex_) if rng.random() < density else ZERO for _ in range(c)] for _ in range(r)], r, c)


def to_sympy(M):
    return sympy.Matrix(M.rows, M.cols, lambda i, j: sympy.Rational(M[i, j].re.numerator, M[i, j].re.denominator)
                        + sympy.I * sympy.Rational(M[i, j].im.numerator, M[i, j].im.denominator))


@pytest.mark.parametrize("seed", range(60))
def test_rref_matches_sympy(seed):
    rng = random.Random(seed)
    M = rand_matrix(rng, rng.randint(1, 6), rng.randint(1, 6), complex_=seed % 2 == 0)
    rows, piv = rref(M.data, M.cols)
    S, spiv = to_sympy(M).rref()
    assert tuple(piv) == tuple(spiv)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            assert sympy.nsimplify(S[i, j] - (sympy.Rational(x.re.numerator, x.re.denominator) + sympy.I * sympy.Rational(x.im.numerator, x.im.denominator))) == 0


@pytest.mark.parametrize("seed", range(40))
def test_rank_nullity_and_kernel(seed):
    rng = random.Random(seed)
    M = rand_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
    K = kernel(M)
    assert rank(M) + K.dim == M.cols
    assert image(M).dim == rank(M) == to_sympy(M).rank()
    for v in K.vectors:
        assert not any(M @ v)


@pytest.mark.parametrize("seed", range(30))
def test_subspace_calculus(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 6)
    U = Subspace(n, [[rand_scalar(rng) for _ in range(n)] for _ in range(rng.randint(0, n))])
    V = Subspace(n, [[rand_scalar(rng) for _ in range(n)] for _ in range(rng.randint(0, n))])
    S, X = subspace_sum(U, V), intersect(U, V)
    assert S.dim + X.dim == U.dim + V.dim
    assert X <= U and X <= V and U <= S and V <= S
    ext = complement(X, U)
    assert len(ext) == U.dim - X.dim
    assert subspace_sum(X, Subspace(n, ext)) == U
    A = rand_matrix(rng, rng.randint(1, 5), n)
    P = preimage(A, Subspace(A.rows, [A @ v for v in U.vectors]))
    assert U <= P and kernel(A) <= P
    assert P.dim == (subspace_sum(U, kernel(A))).dim


def test_solve_and_coordinates():
    A = Matrix([[1, 2], [3, 4], [5, 6]])
    x = solve(A, (Scalar(5), Scalar(11), Scalar(17)))
    assert A @ x == (Scalar(5), Scalar(11), Scalar(17))
    assert solve(A, (ONE, ZERO, ZERO)) is None
    c = coordinates((Scalar(3), Scalar(7)), [(ONE, Scalar(2)), (ONE, Scalar(5))])
    assert c == (Scalar(Fraction(8, 3)), Scalar(Fraction(1, 3)))


@pytest.mark.parametrize("seed", range(15))
def test_inverse(seed):
    rng = random.Random(seed)
    M = rand_invertible(rng, rng.randint(1, 5))
    assert (M @ inverse(M)).is_identity() and (inverse(M) @ M).is_identity()


def test_inverse_singular():
    with pytest.raises(LinalgError):
        inverse(Matrix([[1, 2], [2, 4]]))


@pytest.mark.parametrize("seed", range(15))
def test_gram_adjoint_and_projector(seed):
    rng = random.Random(seed)
    m, n = rng.randint(1, 4), rng.randint(1, 4)
    Ls, Ld = rand_invertible(rng, n), rand_invertible(rng, m)
    Gs, Gd = Ls.H @ Ls, Ld.H @ Ld
    A = rand_matrix(rng, m, n)
    As = gram_adjoint(A, Gs, Gd)
    x = [rand_scalar(rng) for _ in range(n)]
    y = [rand_scalar(rng) for _ in range(m)]
    assert inner(A @ x, y, Gd) == inner(x, As @ y, Gs)
    V = Subspace(n, [[rand_scalar(rng) for _ in range(n)] for _ in range(rng.randint(0, n))])
    P = orthogonal_projector(V, Gs)
    assert P @ P == P and image(P) == V
    assert Gs @ P == P.H @ Gs


def test_gram_adjoint_rejects_non_hermitian():
    with pytest.raises(LinalgError):
        gram_adjoint(Matrix([[1]]), Matrix([[1]]), Matrix([[Scalar(0, 1)]]))
