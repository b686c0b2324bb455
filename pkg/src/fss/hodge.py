"""Exact finite-dimensional Hodge theory for a bicomplex with Gram metrics.

Adjoints are Gram adjoints, ``<A x, y> = <x, A* y>``, so every operator here
is a plain matrix over Q(i) and every identity is checked by equality.

    lap2  = delbar delbar* + delbar* delbar
    pproj = orthogonal projector onto ker lap2
    lap1p = del pproj del* + del* pproj del
    lapt  = lap1p + lap2

``lapt`` is a sum of operators ``M* M`` and so positive semidefinite; its
kernel is compared with the second page of the spectral sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .bicomplex import Bicomplex
from .linalg import (
    Matrix,
    Subspace,
    gram_adjoint,
    image,
    inner,
    intersect,
    inverse,
    kernel,
    orthogonal_projector,
    subspace_sum,
)
from .scalars import ZERO, Scalar

__all__ = [
    "HodgeError",
    "HodgeModel",
    "Decomposition",
    "build_hodge",
    "ker_lapt_dims",
    "three_space_decomposition",
    "green",
    "psd_certificate",
    "check_finite_rank_form",
    "is_positive_definite",
    "orthogonal_basis",
]

Bidegree = Tuple[int, int]


class HodgeError(RuntimeError):
    """An operator identity failed on an assembled model."""


def is_positive_definite(G: Matrix) -> bool:
    """Hermitian positive definiteness by exact symmetric elimination."""
    if not G.is_hermitian():
        return False
    n = G.rows
    a = [list(G.data[i]) for i in range(n)]
    for k in range(n):
        piv = a[k][k]
        if piv.im != 0 or piv.re <= 0:
            return False
        inv = piv.inv()
        for i in range(k + 1, n):
            f = a[i][k] * inv
            if f:
                for j in range(k + 1, n):
                    a[i][j] = a[i][j] - f * a[k][j]
    return True


def orthogonal_basis(V: Subspace, G: Optional[Matrix] = None) -> List[Tuple[Scalar, ...]]:
    """Un-normalized Gram-Schmidt; stays in Q(i)."""
    out: List[Tuple[Scalar, ...]] = []
    norms: List[Scalar] = []
    for v in V.vectors:
        w = list(v)
        for e, nrm in zip(out, norms):
            c = inner(v, e, G) * nrm.inv()
            if c:
                w = [x - c * y for x, y in zip(w, e)]
        w = tuple(w)
        out.append(w)
        norms.append(inner(w, w, G))
    return out


def _self_adjoint(L: Matrix, G: Optional[Matrix]) -> bool:
    if G is None:
        return L == L.H
    return G @ L == L.H @ G


def _orthogonal(U: Subspace, V: Subspace, G: Optional[Matrix]) -> bool:
    for u in U.vectors:
        for v in V.vectors:
            if inner(u, v, G):
                return False
    return True


def _span_image(M: Matrix, S: Subspace) -> Subspace:
    return Subspace(M.rows, [M @ v for v in S.vectors])


@dataclass
class Decomposition:
    kernel: Subspace
    exact: Subspace
    coexact: Subspace

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.kernel.dim, self.exact.dim, self.coexact.dim


@dataclass
class HodgeModel:
    B: Bicomplex
    delbar_star: Dict[Bidegree, Matrix] = field(default_factory=dict)
    del_star: Dict[Bidegree, Matrix] = field(default_factory=dict)
    lap2: Dict[Bidegree, Matrix] = field(default_factory=dict)
    harmonic: Dict[Bidegree, Subspace] = field(default_factory=dict)
    pproj: Dict[Bidegree, Matrix] = field(default_factory=dict)
    lap1p: Dict[Bidegree, Matrix] = field(default_factory=dict)
    lapt: Dict[Bidegree, Matrix] = field(default_factory=dict)
    lapt_kernel: Dict[Bidegree, Subspace] = field(default_factory=dict)
    _green: Dict[Bidegree, Matrix] = field(default_factory=dict)

    def harmonic_dims(self, p: int, q: int) -> int:
        return self.harmonic[(p, q)].dim

    def G(self, p: int, q: int) -> Optional[Matrix]:
        return self.B.gram_or_none(p, q)

    # maps with the out-of-grid cases folded in
    def dbs(self, p: int, q: int) -> Matrix:
        """``delbar*: A^{p,q} -> A^{p,q-1}``."""
        return self.delbar_star.get((p, q)) or Matrix.zeros(self.B.dim(p, q - 1), self.B.dim(p, q))

    def ds(self, p: int, q: int) -> Matrix:
        """``del*: A^{p,q} -> A^{p-1,q}``."""
        return self.del_star.get((p, q)) or Matrix.zeros(self.B.dim(p - 1, q), self.B.dim(p, q))

    def proj(self, p: int, q: int) -> Matrix:
        d = self.B.dim(p, q)
        return self.pproj.get((p, q)) or Matrix.zeros(d, d)


def build_hodge(B: Bicomplex, check: bool = True) -> HodgeModel:
    """Assemble every operator and verify the structural identities."""
    for bd in B.bidegrees():
        G = B.gram_or_none(*bd)
        if G is not None and not is_positive_definite(G):
            raise ValueError(f"Gram matrix at {bd} is not Hermitian positive definite")
    H = HodgeModel(B)
    bds = B.bidegrees()
    for (p, q) in bds:
        if q > 0:
            H.delbar_star[(p, q)] = gram_adjoint(B.delbar(p, q - 1), B.gram_or_none(p, q - 1), B.gram_or_none(p, q))
        else:
            H.delbar_star[(p, q)] = Matrix.zeros(0, B.dim(p, q))
        if p > 0:
            H.del_star[(p, q)] = gram_adjoint(B.del_(p - 1, q), B.gram_or_none(p - 1, q), B.gram_or_none(p, q))
        else:
            H.del_star[(p, q)] = Matrix.zeros(0, B.dim(p, q))
    for (p, q) in bds:
        L = B.delbar(p, q - 1) @ H.dbs(p, q) + H.dbs(p, q + 1) @ B.delbar(p, q)
        H.lap2[(p, q)] = L
        H.harmonic[(p, q)] = kernel(L)
        H.pproj[(p, q)] = orthogonal_projector(H.harmonic[(p, q)], B.gram_or_none(p, q))
    for (p, q) in bds:
        L1 = B.del_(p - 1, q) @ H.proj(p - 1, q) @ H.ds(p, q) + H.ds(p + 1, q) @ H.proj(p + 1, q) @ B.del_(p, q)
        H.lap1p[(p, q)] = L1
        H.lapt[(p, q)] = L1 + H.lap2[(p, q)]
        H.lapt_kernel[(p, q)] = kernel(H.lapt[(p, q)])
    if check:
        _check_model(H)
    return H


def _check_model(H: HodgeModel):
    B = H.B
    for (p, q) in B.bidegrees():
        G = B.gram_or_none(p, q)
        P = H.pproj[(p, q)]
        where = f"at {(p, q)}"
        if P @ P != P:
            raise HodgeError(f"harmonic projector not idempotent {where}")
        if not _self_adjoint(P, G):
            raise HodgeError(f"harmonic projector not self-adjoint {where}")
        if image(P) != H.harmonic[(p, q)]:
            raise HodgeError(f"harmonic projector has the wrong image {where}")
        kd = kernel(B.delbar(p, q))
        kds = kernel(H.dbs(p, q))
        if H.harmonic[(p, q)] != intersect(kd, kds):
            raise HodgeError(f"ker lap2 differs from ker delbar cap ker delbar* {where}")
        ex = image(B.delbar(p, q - 1))
        co = image(H.dbs(p, q + 1))
        if H.harmonic[(p, q)].dim + ex.dim + co.dim != B.dim(p, q):
            raise HodgeError(f"harmonic decomposition does not fill the space {where}")
        if not (_orthogonal(H.harmonic[(p, q)], ex, G) and _orthogonal(H.harmonic[(p, q)], co, G) and _orthogonal(ex, co, G)):
            raise HodgeError(f"harmonic decomposition is not orthogonal {where}")
        for name in ("lap2", "lap1p", "lapt"):
            if not _self_adjoint(getattr(H, name)[(p, q)], G):
                raise HodgeError(f"{name} not self-adjoint {where}")
        cert = psd_certificate(H, p, q)
        total = Matrix.zeros(B.dim(p, q), B.dim(p, q))
        for _, M, Ms in cert:
            total = total + Ms @ M
        if total != H.lapt[(p, q)]:
            raise HodgeError(f"PSD factorization does not reproduce lapt {where}")


def ker_lapt_dims(H: HodgeModel) -> Dict[Bidegree, int]:
    return {bd: S.dim for bd, S in H.lapt_kernel.items()}


def psd_certificate(H: HodgeModel, p: int, q: int) -> List[Tuple[str, Matrix, Matrix]]:
    """``[(name, M, M*)]`` with ``lapt = sum M* M``."""
    B = H.B
    out = []
    # delbar and delbar*
    M1 = B.delbar(p, q)
    out.append(("delbar", M1, H.dbs(p, q + 1)))
    M2 = H.dbs(p, q)
    out.append(("delbar*", M2, B.delbar(p, q - 1)))
    # p'' del* and p'' del; pproj is self-adjoint so (p'' X)* = X* p''
    M3 = H.proj(p - 1, q) @ H.ds(p, q)
    out.append(("p''del*", M3, B.del_(p - 1, q) @ H.proj(p - 1, q)))
    M4 = H.proj(p + 1, q) @ B.del_(p, q)
    out.append(("p''del", M4, H.ds(p + 1, q) @ H.proj(p + 1, q)))
    for name, M, Ms in out:
        src, dst = (p, q), _target(name, p, q)
        if Ms != gram_adjoint(M, B.gram_or_none(*src), B.gram_or_none(*dst)):
            raise HodgeError(f"{name} adjoint mismatch at {(p, q)}")
    return out


def _target(name: str, p: int, q: int) -> Bidegree:
    return {
        "delbar": (p, q + 1),
        "delbar*": (p, q - 1),
        "p''del*": (p - 1, q),
        "p''del": (p + 1, q),
    }[name]


def three_space_decomposition(H: HodgeModel, p: int, q: int) -> Decomposition:
    """``(ker lapt, im delbar + del(ker delbar), im delbar* + del*(harmonic))`` with checks."""
    B = H.B
    G = B.gram_or_none(p, q)
    d = B.dim(p, q)
    K = H.lapt_kernel[(p, q)]
    kd_prev = kernel(B.delbar(p - 1, q)) if p > 0 else Subspace.zero(0)
    S2 = subspace_sum(image(B.delbar(p, q - 1)), _span_image(B.del_(p - 1, q), kd_prev))
    harm_next = H.harmonic.get((p + 1, q), Subspace.zero(0))
    S3 = subspace_sum(image(H.dbs(p, q + 1)), _span_image(H.ds(p + 1, q), harm_next))
    where = f"at {(p, q)}"
    if not (_orthogonal(K, S2, G) and _orthogonal(K, S3, G) and _orthogonal(S2, S3, G)):
        raise HodgeError(f"three-space decomposition is not orthogonal {where}")
    if K.dim + S2.dim + S3.dim != d:
        raise HodgeError(f"three-space decomposition does not fill the space {where}")
    closed = intersect(kernel(H.proj(p + 1, q) @ B.del_(p, q)), kernel(B.delbar(p, q)))
    if subspace_sum(K, S2) != closed:
        raise HodgeError(f"ker lapt + S2 differs from ker(p''del) cap ker delbar {where}")
    coclosed = intersect(kernel(H.proj(p - 1, q) @ H.ds(p, q)), kernel(H.dbs(p, q)))
    if subspace_sum(K, S3) != coclosed:
        raise HodgeError(f"ker lapt + S3 differs from ker(p''del*) cap ker delbar* {where}")
    if subspace_sum(S2, S3) != image(H.lapt[(p, q)]):
        raise HodgeError(f"S2 + S3 differs from im lapt {where}")
    return Decomposition(K, S2, S3)


def green(H: HodgeModel, p: int, q: int) -> Matrix:
    """Partial inverse of ``lapt`` vanishing on its kernel."""
    key = (p, q)
    if key in H._green:
        return H._green[key]
    L = H.lapt[key]
    P = orthogonal_projector(H.lapt_kernel[key], H.B.gram_or_none(p, q))
    Gr = inverse(L + P) - P
    H._green[key] = Gr
    return Gr


def check_finite_rank_form(H: HodgeModel, p: int, q: int) -> bool:
    """``lap1p phi = sum_a <del* phi, e_a>/|e_a|^2 del e_a + sum_b <del phi, e_b>/|e_b|^2 del* e_b``.

    ``e_a`` and ``e_b`` run over orthogonal bases of the harmonic spaces at
    ``(p-1, q)`` and ``(p+1, q)``.
    """
    B = H.B
    d = B.dim(p, q)
    low = orthogonal_basis(H.harmonic.get((p - 1, q), Subspace.zero(0)), B.gram_or_none(p - 1, q)) if p > 0 else []
    high = orthogonal_basis(H.harmonic.get((p + 1, q), Subspace.zero(0)), B.gram_or_none(p + 1, q)) if p < B.n else []
    Dl, Dsl = B.del_(p - 1, q), H.ds(p, q)
    Dh, Dsh = B.del_(p, q), H.ds(p + 1, q)
    low_n = [inner(e, e, B.gram_or_none(p - 1, q)).inv() for e in low]
    high_n = [inner(e, e, B.gram_or_none(p + 1, q)).inv() for e in high]
    low_img = [Dl @ e for e in low]
    high_img = [Dsh @ e for e in high]
    cols = []
    for j in range(d):
        phi = tuple(Scalar(1) if i == j else ZERO for i in range(d))
        acc = [ZERO] * d
        x = Dsl @ phi
        for e, nrm, img in zip(low, low_n, low_img):
            c = inner(x, e, B.gram_or_none(p - 1, q)) * nrm
            if c:
                acc = [a + c * b for a, b in zip(acc, img)]
        y = Dh @ phi
        for e, nrm, img in zip(high, high_n, high_img):
            c = inner(y, e, B.gram_or_none(p + 1, q)) * nrm
            if c:
                acc = [a + c * b for a, b in zip(acc, img)]
        cols.append(acc)
    M = Matrix.from_columns(cols, d) if d else Matrix.zeros(0, 0)
    return M == H.lap1p[(p, q)]
