"""Exact dense linear algebra over Q(i).

Rows are cleared of denominators and reduced with fraction-free
Gauss-Jordan elimination over the Gaussian integers (pivot = first nonzero
entry in column order, rows swapped into place).  Subspaces are stored in a
canonical form, the reduced row echelon form of a spanning set, so that two
subspaces are equal exactly when their stored bases are equal.

Matrices act on column vectors.  Vectors are plain tuples of
:class:`~fss.scalars.Scalar`.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, List, Optional, Sequence, Tuple

from .scalars import ONE, ZERO, Scalar, _mk

__all__ = [
    "LinalgError",
    "Matrix",
    "Subspace",
    "rref",
    "kernel",
    "image",
    "rank",
    "solve",
    "inverse",
    "subspace_sum",
    "intersect",
    "preimage",
    "complement",
    "coordinates",
    "gram_adjoint",
    "orthogonal_projector",
    "inner",
]

Vector = Tuple[Scalar, ...]


class LinalgError(ValueError):
    pass


# --------------------------------------------------------------------------
# fraction-free elimination kernel
# --------------------------------------------------------------------------


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _clear_row(row: Sequence[Scalar]):
    """Scale a row of Scalars to Gaussian integers (re list, im list)."""
    den = 1
    for x in row:
        d = x.re.denominator
        if d != 1:
            den = _lcm(den, d)
        d = x.im.denominator
        if d != 1:
            den = _lcm(den, d)
    if den == 1:
        return [x.re.numerator for x in row], [x.im.numerator for x in row]
    return (
        [x.re.numerator * (den // x.re.denominator) for x in row],
        [x.im.numerator * (den // x.im.denominator) for x in row],
    )


def _ffgj_real(a: List[List[int]], ncols: int):
    """In-place fraction-free Gauss-Jordan over Z.  Returns (den, pivots)."""
    m = len(a)
    d = 1
    pivots: List[int] = []
    no_pivots: List[int] = []
    i = 0
    if not m:
        return 1, pivots
    for j in range(ncols):
        aij = a[i][j]
        if not aij:
            for ip in range(i + 1, m):
                if a[ip][j]:
                    a[i], a[ip] = a[ip], a[i]
                    aij = a[i][j]
                    break
            else:
                no_pivots.append(j)
                continue
        if pivots:
            pv = aij * a[0][pivots[0]] // d
            for ip, jp in enumerate(pivots):
                a[ip][jp] = pv
        for jnp in no_pivots:
            for ip in range(i):
                v = a[ip][jnp]
                if v:
                    a[ip][jnp] = v * aij // d
        rowi = a[i]
        tail = [(k, rowi[k]) for k in range(j + 1, ncols) if rowi[k]]
        for jp in range(m):
            if jp == i:
                continue
            aj = a[jp]
            f = aj[j]
            if f:
                for k in range(j + 1, ncols):
                    aj[k] = aij * aj[k]
                for k, v in tail:
                    aj[k] -= f * v
                if d != 1:
                    for k in range(j + 1, ncols):
                        if aj[k]:
                            aj[k] //= d
                aj[j] = 0
            elif aij != d:
                for k in range(j + 1, ncols):
                    if aj[k]:
                        aj[k] = aj[k] * aij // d
        pivots.append(j)
        i += 1
        if i >= m:
            break
        d = aij
    den = a[0][pivots[0]] if pivots else 1
    return den, pivots


def _gmul(ar, ai, br, bi):
    return ar * br - ai * bi, ar * bi + ai * br


def _gdiv(xr, xi, dr, di):
    # exact division in Z[i]
    n = dr * dr + di * di
    qr = xr * dr + xi * di
    qi = xi * dr - xr * di
    return qr // n, qi // n


def _ffgj_complex(ar: List[List[int]], ai: List[List[int]], ncols: int):
    """Fraction-free Gauss-Jordan over Z[i] on split real/imag rows."""
    m = len(ar)
    dr, di = 1, 0
    pivots: List[int] = []
    no_pivots: List[int] = []
    i = 0
    if not m:
        return (1, 0), pivots
    for j in range(ncols):
        pr, pi = ar[i][j], ai[i][j]
        if not pr and not pi:
            for ip in range(i + 1, m):
                if ar[ip][j] or ai[ip][j]:
                    ar[i], ar[ip] = ar[ip], ar[i]
                    ai[i], ai[ip] = ai[ip], ai[i]
                    pr, pi = ar[i][j], ai[i][j]
                    break
            else:
                no_pivots.append(j)
                continue
        trivial_d = dr == 1 and di == 0
        if pivots:
            j0 = pivots[0]
            vr, vi = _gmul(pr, pi, ar[0][j0], ai[0][j0])
            if not trivial_d:
                vr, vi = _gdiv(vr, vi, dr, di)
            for ip, jp in enumerate(pivots):
                ar[ip][jp], ai[ip][jp] = vr, vi
        for jnp in no_pivots:
            for ip in range(i):
                xr, xi = ar[ip][jnp], ai[ip][jnp]
                if xr or xi:
                    xr, xi = _gmul(xr, xi, pr, pi)
                    if not trivial_d:
                        xr, xi = _gdiv(xr, xi, dr, di)
                    ar[ip][jnp], ai[ip][jnp] = xr, xi
        rr, ri = ar[i], ai[i]
        tail = [(k, rr[k], ri[k]) for k in range(j + 1, ncols) if rr[k] or ri[k]]
        for jp in range(m):
            if jp == i:
                continue
            xr_row, xi_row = ar[jp], ai[jp]
            fr, fi = xr_row[j], xi_row[j]
            if fr or fi or not trivial_d or pr != 1 or pi != 0:
                for k in range(j + 1, ncols):
                    xr, xi = xr_row[k], xi_row[k]
                    if xr or xi:
                        xr_row[k], xi_row[k] = _gmul(xr, xi, pr, pi)
                for k, vr, vi in tail:
                    sr, si = _gmul(fr, fi, vr, vi)
                    xr_row[k] -= sr
                    xi_row[k] -= si
                if not trivial_d:
                    for k in range(j + 1, ncols):
                        xr, xi = xr_row[k], xi_row[k]
                        if xr or xi:
                            xr_row[k], xi_row[k] = _gdiv(xr, xi, dr, di)
                xr_row[j] = 0
                xi_row[j] = 0
        pivots.append(j)
        i += 1
        if i >= m:
            break
        dr, di = pr, pi
    if pivots:
        den = (ar[0][pivots[0]], ai[0][pivots[0]])
    else:
        den = (1, 0)
    return den, pivots


def rref(rows: Sequence[Sequence[Scalar]], ncols: Optional[int] = None):
    """Reduced row echelon form of a list of rows.

    Returns ``(nonzero_rows, pivots)`` where ``nonzero_rows`` are tuples of
    Scalars with leading entry 1 in the columns listed by ``pivots``.
    """
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if not rows or not ncols:
        return [], []
    cleared = [_clear_row(r) for r in rows]
    if all(not any(im) for _, im in cleared):
        a = [re for re, _ in cleared]
        den, pivots = _ffgj_real(a, ncols)
        out = []
        for r in range(len(pivots)):
            out.append(tuple(_mk(Fraction(v, den), Fraction(0)) if v else ZERO for v in a[r]))
        return out, pivots
    ar = [re for re, _ in cleared]
    ai = [im for _, im in cleared]
    (dr, di), pivots = _ffgj_complex(ar, ai, ncols)
    n = dr * dr + di * di
    out = []
    for r in range(len(pivots)):
        row = []
        for xr, xi in zip(ar[r], ai[r]):
            if xr or xi:
                qr = xr * dr + xi * di
                qi = xi * dr - xr * di
                row.append(_mk(Fraction(qr, n), Fraction(qi, n)))
            else:
                row.append(ZERO)
        out.append(tuple(row))
    return out, pivots


# --------------------------------------------------------------------------
# matrices
# --------------------------------------------------------------------------


class Matrix:
    """Dense matrix of Scalars, stored row-major."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data: Iterable[Iterable], rows: Optional[int] = None, cols: Optional[int] = None):
        d = [tuple(Scalar.coerce(x) for x in row) for row in data]
        if rows is None:
            rows = len(d)
        if cols is None:
            cols = len(d[0]) if d else 0
        if len(d) != rows or any(len(r) != cols for r in d):
            raise LinalgError("inconsistent matrix dimensions")
        self.rows = rows
        self.cols = cols
        self.data = d

    @classmethod
    def _raw(cls, data: List[Tuple[Scalar, ...]], rows: int, cols: int) -> "Matrix":
        m = object.__new__(cls)
        m.rows = rows
        m.cols = cols
        m.data = data
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        row = (ZERO,) * cols
        return cls._raw([row] * rows, rows, cols)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls._raw(
            [tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)], n, n
        )

    @classmethod
    def diagonal(cls, entries: Sequence) -> "Matrix":
        n = len(entries)
        ent = [Scalar.coerce(e) for e in entries]
        return cls._raw(
            [tuple(ent[i] if i == j else ZERO for j in range(n)) for i in range(n)], n, n
        )

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[Scalar]], rows: int) -> "Matrix":
        cols = len(columns)
        if any(len(c) != rows for c in columns):
            raise LinalgError("column length mismatch")
        return cls._raw([tuple(c[i] for c in columns) for i in range(rows)], rows, cols)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, idx):
        i, j = idx
        return self.data[i][j]

    def column(self, j: int) -> Vector:
        return tuple(row[j] for row in self.data)

    def columns(self) -> List[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def replace(self, i: int, j: int, value) -> "Matrix":
        data = list(self.data)
        row = list(data[i])
        row[j] = Scalar.coerce(value)
        data[i] = tuple(row)
        return Matrix._raw(data, self.rows, self.cols)

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.cols != other.rows:
                raise LinalgError(f"shape mismatch {self.shape} @ {other.shape}")
            n = other.cols
            odata = other.data
            out = []
            for row in self.data:
                acc = [ZERO] * n
                for k, a in enumerate(row):
                    if a:
                        orow = odata[k]
                        for j in range(n):
                            b = orow[j]
                            if b:
                                acc[j] = acc[j] + a * b
                out.append(tuple(acc))
            return Matrix._raw(out, self.rows, n)
        vec = tuple(other)
        if len(vec) != self.cols:
            raise LinalgError("vector length mismatch")
        res = []
        for row in self.data:
            acc = ZERO
            for a, b in zip(row, vec):
                if a and b:
                    acc = acc + a * b
            res.append(acc)
        return tuple(res)

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise LinalgError(f"shape mismatch {self.shape} + {other.shape}")
        return Matrix._raw(
            [tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.data, other.data)],
            self.rows,
            self.cols,
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise LinalgError(f"shape mismatch {self.shape} - {other.shape}")
        return Matrix._raw(
            [tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.data, other.data)],
            self.rows,
            self.cols,
        )

    def __neg__(self) -> "Matrix":
        return Matrix._raw([tuple(-a for a in r) for r in self.data], self.rows, self.cols)

    def scale(self, c) -> "Matrix":
        c = Scalar.coerce(c)
        return Matrix._raw([tuple(c * a for a in r) for r in self.data], self.rows, self.cols)

    @property
    def T(self) -> "Matrix":
        return Matrix._raw([tuple(r[j] for r in self.data) for j in range(self.cols)], self.cols, self.rows)

    @property
    def H(self) -> "Matrix":
        """Conjugate transpose."""
        return Matrix._raw(
            [tuple(r[j].conj() for r in self.data) for j in range(self.cols)], self.cols, self.rows
        )

    def conj(self) -> "Matrix":
        return Matrix._raw([tuple(a.conj() for a in r) for r in self.data], self.rows, self.cols)

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.data)

    def is_identity(self) -> bool:
        return self.rows == self.cols and all(
            (x == ONE) if i == j else (not x) for i, r in enumerate(self.data) for j, x in enumerate(r)
        )

    def is_hermitian(self) -> bool:
        return self.rows == self.cols and self == self.H

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise LinalgError("row count mismatch in hstack")
        return Matrix._raw([a + b for a, b in zip(self.data, other.data)], self.rows, self.cols + other.cols)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self.data == other.data

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(self.data)))

    def nonzero_entries(self):
        for i, r in enumerate(self.data):
            for j, x in enumerate(r):
                if x:
                    yield i, j, x

    def to_strings(self) -> List[List[str]]:
        return [[str(x) for x in r] for r in self.data]

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols})"


# --------------------------------------------------------------------------
# subspaces
# --------------------------------------------------------------------------


class Subspace:
    """A subspace of Q(i)^n held in canonical (reduced echelon) form.

    ``basis`` is a Matrix whose columns are the canonical basis vectors;
    ``pivots`` are their leading coordinates.
    """

    __slots__ = ("ambient_dim", "_vectors", "pivots")

    def __init__(self, ambient_dim: int, vectors: Iterable[Sequence[Scalar]] = ()):
        vecs = [tuple(v) for v in vectors]
        if any(len(v) != ambient_dim for v in vecs):
            raise LinalgError("vector does not live in the ambient space")
        rows, piv = rref(vecs, ambient_dim)
        self.ambient_dim = ambient_dim
        self._vectors = tuple(rows)
        self.pivots = tuple(piv)

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n)

    @classmethod
    def full(cls, n: int) -> "Subspace":
        s = object.__new__(cls)
        s.ambient_dim = n
        s._vectors = tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))
        s.pivots = tuple(range(n))
        return s

    @property
    def dim(self) -> int:
        return len(self._vectors)

    def __len__(self):
        return self.dim

    @property
    def vectors(self) -> Tuple[Vector, ...]:
        return self._vectors

    @property
    def basis(self) -> Matrix:
        return Matrix.from_columns(self._vectors, self.ambient_dim)

    def contains(self, v: Sequence[Scalar]) -> bool:
        v = list(v)
        if len(v) != self.ambient_dim:
            raise LinalgError("vector does not live in the ambient space")
        # reduce against the echelon basis
        for b, p in zip(self._vectors, self.pivots):
            c = v[p]
            if c:
                for k in range(p, self.ambient_dim):
                    if b[k]:
                        v[k] = v[k] - c * b[k]
        return not any(v)

    def __le__(self, other: "Subspace") -> bool:
        _check_ambient(self, other)
        return all(other.contains(v) for v in self._vectors)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self._vectors == other._vectors

    def __hash__(self):
        return hash((self.ambient_dim, self._vectors))

    def __add__(self, other: "Subspace") -> "Subspace":
        return subspace_sum(self, other)

    def __and__(self, other: "Subspace") -> "Subspace":
        return intersect(self, other)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def _check_ambient(u: Subspace, v: Subspace):
    if u.ambient_dim != v.ambient_dim:
        raise LinalgError(f"ambient dimension mismatch: {u.ambient_dim} vs {v.ambient_dim}")


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------


def _kernel_vectors(rows: Sequence[Sequence[Scalar]], ncols: int) -> List[Vector]:
    red, piv = rref(rows, ncols)
    pivset = set(piv)
    out = []
    for free in range(ncols):
        if free in pivset:
            continue
        v = [ZERO] * ncols
        v[free] = ONE
        for r, p in zip(red, piv):
            x = r[free]
            if x:
                v[p] = -x
        out.append(tuple(v))
    return out


def kernel(A: Matrix) -> Subspace:
    return Subspace(A.cols, _kernel_vectors(A.data, A.cols))


def image(A: Matrix) -> Subspace:
    return Subspace(A.rows, A.columns())


def rank(A: Matrix) -> int:
    if A.rows <= A.cols:
        return len(rref(A.data, A.cols)[1])
    return len(rref(A.T.data, A.rows)[1])


def solve(A: Matrix, b: Sequence[Scalar]) -> Optional[Vector]:
    """One solution of ``A x = b`` (free variables set to zero), or None."""
    b = tuple(b)
    if len(b) != A.rows:
        raise LinalgError("right-hand side length mismatch")
    aug = [row + (bi,) for row, bi in zip(A.data, b)]
    red, piv = rref(aug, A.cols + 1)
    if piv and piv[-1] == A.cols:
        return None
    x = [ZERO] * A.cols
    for r, p in zip(red, piv):
        x[p] = r[A.cols]
    return tuple(x)


def inverse(A: Matrix) -> Matrix:
    n = A.rows
    if A.cols != n:
        raise LinalgError("inverse of a non-square matrix")
    if n == 0:
        return Matrix.zeros(0, 0)
    ident = Matrix.identity(n)
    aug = [a + e for a, e in zip(A.data, ident.data)]
    red, piv = rref(aug, 2 * n)
    if len(piv) < n or piv[n - 1] != n - 1:
        raise LinalgError("matrix is singular")
    return Matrix._raw([r[n:] for r in red], n, n)


def subspace_sum(U: Subspace, V: Subspace) -> Subspace:
    _check_ambient(U, V)
    return Subspace(U.ambient_dim, U.vectors + V.vectors)


def intersect(U: Subspace, V: Subspace) -> Subspace:
    _check_ambient(U, V)
    n = U.ambient_dim
    if not U.dim or not V.dim:
        return Subspace.zero(n)
    ku, kv = U.dim, V.dim
    # [U | -V] a = 0  ->  U a_u = V a_v
    rows = [
        tuple(u[i] for u in U.vectors) + tuple(-v[i] for v in V.vectors) for i in range(n)
    ]
    coeffs = _kernel_vectors(rows, ku + kv)
    out = []
    for c in coeffs:
        vec = [ZERO] * n
        for a, u in zip(c[:ku], U.vectors):
            if a:
                for i in range(n):
                    if u[i]:
                        vec[i] = vec[i] + a * u[i]
        out.append(vec)
    return Subspace(n, out)


def preimage(A: Matrix, V: Subspace) -> Subspace:
    """``{x : A x in V}``."""
    if V.ambient_dim != A.rows:
        raise LinalgError("preimage: target subspace lives in the wrong space")
    k = V.dim
    rows = [A.data[i] + tuple(-v[i] for v in V.vectors) for i in range(A.rows)]
    sols = _kernel_vectors(rows, A.cols + k)
    return Subspace(A.cols, [s[: A.cols] for s in sols])


def complement(B: Subspace, Z: Subspace) -> List[Vector]:
    """Vectors of ``Z``'s canonical basis that extend ``B`` to a basis of ``Z``.

    ``B`` must be contained in ``Z``.  The choice is deterministic: basis
    vectors of Z are scanned in order and kept when they raise the rank.
    """
    _check_ambient(B, Z)
    chosen: List[Vector] = []
    cur = B
    for v in Z.vectors:
        if not cur.contains(v):
            chosen.append(v)
            cur = Subspace(Z.ambient_dim, cur.vectors + (v,))
        if cur.dim == Z.dim:
            break
    return chosen


def coordinates(v: Sequence[Scalar], vectors: Sequence[Sequence[Scalar]]) -> Optional[Vector]:
    """Coefficients ``c`` with ``sum c_j vectors[j] == v``, or None."""
    n = len(v)
    if not vectors:
        return () if not any(v) else None
    A = Matrix.from_columns(vectors, n)
    return solve(A, v)


def inner(x: Sequence[Scalar], y: Sequence[Scalar], G: Optional[Matrix] = None) -> Scalar:
    """``<x, y>_G = y^H G x`` (linear in ``x``)."""
    if G is not None:
        x = G @ x
    acc = ZERO
    for a, b in zip(x, y):
        if a and b:
            acc = acc + a * b.conj()
    return acc


def gram_adjoint(A: Matrix, G_src: Optional[Matrix] = None, G_dst: Optional[Matrix] = None) -> Matrix:
    """Adjoint of ``A: src -> dst`` for the Gram inner products on each side.

    Satisfies ``<A x, y>_dst = <x, A* y>_src``; with identity Grams this is
    the conjugate transpose.
    """
    for G, n in ((G_src, A.cols), (G_dst, A.rows)):
        if G is not None:
            if G.shape != (n, n):
                raise LinalgError("Gram matrix has the wrong size")
            if not G.is_hermitian():
                raise LinalgError("Gram matrix is not Hermitian")
    out = A.H
    if G_dst is not None and not G_dst.is_identity():
        out = out @ G_dst
    if G_src is not None and not G_src.is_identity():
        out = inverse(G_src) @ out
    return out


def orthogonal_projector(V: Subspace, G: Optional[Matrix] = None) -> Matrix:
    """G-orthogonal projector onto ``V``."""
    n = V.ambient_dim
    if not V.dim:
        return Matrix.zeros(n, n)
    if V.dim == n:
        return Matrix.identity(n)
    B = V.basis
    BhG = B.H if G is None else B.H @ G
    M = BhG @ B
    return B @ (inverse(M) @ BhG)
