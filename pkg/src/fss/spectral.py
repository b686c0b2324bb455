"""Pages of the Frölicher spectral sequence of a finite double complex.

Page ``r`` at ``(p, q)`` is stored as a pair of subspaces of ``A^{p,q}``:
cycles ``Z_r`` (delbar-closed forms that start a zig-zag of length ``r - 1``)
and boundaries ``B_r``, with ``E_r = Z_r / B_r``.  Representatives are a
canonical complement of ``B_r`` in ``Z_r``; classes are compared through
membership in ``B_r``, never through representatives.

``d_r`` is evaluated by zig-zag lifting: starting from a representative
``a``, solve ``delbar b_1 = -del a``, ``delbar b_i = -del b_{i-1}`` and take
the class of ``del b_{r-1}``.  Each ``b_i`` is chosen inside the subspace of
forms that still admit the remaining steps, so the lift never gets stuck.

:func:`oracle_page_dims` recomputes dimensions from the filtration of the
total complex alone and shares no code path with the iteration.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .bicomplex import Bicomplex
from .linalg import (
    Matrix,
    Subspace,
    complement,
    coordinates,
    image,
    intersect,
    kernel,
    preimage,
    rank,
    solve,
    subspace_sum,
)
from .scalars import ZERO, Scalar

__all__ = [
    "ConsistencyError",
    "Page",
    "PageSet",
    "SpectralEngine",
    "page1",
    "next_page",
    "total_cohomology",
    "einf_and_degeneration",
    "oracle_page_dims",
    "table_order",
    "TotalComplex",
    "pageset_to_dict",
]

Bidegree = Tuple[int, int]
Vector = Tuple[Scalar, ...]


class ConsistencyError(RuntimeError):
    """An internal identity failed; indicates a bug, not bad input."""


def table_order(n: int) -> List[Bidegree]:
    """Bidegrees by total degree ascending, then ``p`` descending."""
    out = []
    for k in range(2 * n + 1):
        for p in range(min(k, n), -1, -1):
            q = k - p
            if 0 <= q <= n:
                out.append((p, q))
    return out


@dataclass
class Page:
    r: int
    cycles: Dict[Bidegree, Subspace]
    boundaries: Dict[Bidegree, Subspace]
    reps: Dict[Bidegree, List[Vector]]
    d: Dict[Bidegree, Matrix] = field(default_factory=dict)
    # zig-zag ends del(b_{r-1}) for each representative, in A^{p+r, q-r+1}
    ends: Dict[Bidegree, List[Vector]] = field(default_factory=dict)

    def dim(self, p: int, q: int) -> int:
        return len(self.reps.get((p, q), ()))

    @property
    def dims(self) -> Dict[Bidegree, int]:
        return {bd: len(v) for bd, v in self.reps.items()}

    def target(self, p: int, q: int) -> Bidegree:
        return p + self.r, q - self.r + 1


@dataclass
class PageSet:
    pages: List[Page]
    betti: List[int]
    einf_dims: Dict[Bidegree, int]
    degeneration_step: int
    n: int

    def page(self, r: int) -> Page:
        return self.pages[r - 1]

    @property
    def r_max(self) -> int:
        return len(self.pages)

    def dims(self, r: int) -> Dict[Bidegree, int]:
        return self.page(r).dims

    def profile(self, r: int) -> List[int]:
        d = self.dims(r)
        return [d.get(bd, 0) for bd in table_order(self.n)]


class SpectralEngine:
    """Caches the extendable-form subspaces used by zig-zag lifting."""

    def __init__(self, B: Bicomplex):
        self.B = B
        self.n = B.n
        self._ext: Dict[Tuple[int, Bidegree], Subspace] = {}
        self._ker_delbar: Dict[Bidegree, Subspace] = {}

    # subspaces ---------------------------------------------------------

    def ker_delbar(self, p: int, q: int) -> Subspace:
        key = (p, q)
        if key not in self._ker_delbar:
            self._ker_delbar[key] = kernel(self.B.delbar(p, q))
        return self._ker_delbar[key]

    def extendable(self, j: int, p: int, q: int) -> Subspace:
        """Forms ``y`` in ``A^{p,q}`` admitting ``y_1..y_j`` with ``del y_{i-1} + delbar y_i = 0``."""
        key = (j, (p, q))
        if key in self._ext:
            return self._ext[key]
        dim = self.B.dim(p, q)
        if j == 0:
            S = Subspace.full(dim)
        else:
            nxt = self.extendable(j - 1, p + 1, q - 1)
            Db = self.B.delbar(p + 1, q - 1)
            target = Subspace(Db.rows, [Db @ v for v in nxt.vectors])
            S = preimage(self.B.del_(p, q), target)
        self._ext[key] = S
        return S

    # zig-zag -------------------------------------------------------------

    def zigzag(
        self,
        alpha: Sequence[Scalar],
        p: int,
        q: int,
        r: int,
        rng: Optional[random.Random] = None,
    ) -> Tuple[List[Vector], Vector]:
        """Lift ``alpha`` (a page-``r`` cycle at (p,q)) and return ``(chain, del b_{r-1})``.

        With ``rng`` each lift is perturbed by a random delbar-closed
        extendable form; the resulting class must not change.
        """
        B = self.B
        chain = [tuple(alpha)]
        for i in range(1, r):
            pi, qi = p + i, q - i
            rhs = tuple(-x for x in B.del_(pi - 1, qi + 1) @ chain[-1])
            S = self.extendable(r - 1 - i, pi, qi)
            if not S.dim:
                if any(rhs):
                    raise ConsistencyError(f"zig-zag from {(p, q)} stuck at step {i}")
                chain.append(tuple([ZERO] * B.dim(pi, qi)))
                continue
            E = S.basis
            c = solve(B.delbar(pi, qi) @ E, rhs)
            if c is None:
                raise ConsistencyError(f"zig-zag from {(p, q)} stuck at step {i}")
            beta = E @ c
            if rng is not None:
                K = intersect(S, self.ker_delbar(pi, qi))
                for v in K.vectors:
                    a = Scalar(rng.randint(-3, 3), rng.randint(-2, 2))
                    beta = tuple(x + a * y for x, y in zip(beta, v))
            chain.append(tuple(beta))
        end = B.del_(p + r - 1, q - r + 1) @ chain[-1]
        return chain, end

    def class_coords(self, page: Page, w: Sequence[Scalar], p: int, q: int) -> Vector:
        """Coordinates of ``[w]`` in page ``page`` at (p,q) w.r.t. its representatives."""
        reps = page.reps.get((p, q), [])
        bnd = page.boundaries[(p, q)].vectors if (p, q) in page.boundaries else ()
        if not reps and not bnd:
            if any(w):
                raise ConsistencyError(f"nonzero element in a zero space at {(p, q)}")
            return ()
        c = coordinates(w, list(reps) + list(bnd))
        if c is None:
            raise ConsistencyError(f"zig-zag end at {(p, q)} is not a page-{page.r} cycle")
        return tuple(c[: len(reps)])

    # pages ---------------------------------------------------------------

    def _attach_differentials(self, page: Page):
        r = page.r
        B = self.B
        for (p, q), reps in page.reps.items():
            tp, tq = p + r, q - r + 1
            if not B.in_range(tp, tq):
                page.d[(p, q)] = Matrix.zeros(0, len(reps))
                page.ends[(p, q)] = []
                continue
            ends = []
            cols = []
            for a in reps:
                _, end = self.zigzag(a, p, q, r)
                ends.append(end)
                cols.append(self.class_coords(page, end, tp, tq))
            page.ends[(p, q)] = ends
            rows = len(page.reps.get((tp, tq), []))
            page.d[(p, q)] = Matrix.from_columns(cols, rows) if cols else Matrix.zeros(rows, 0)

    def page1(self) -> Page:
        B = self.B
        cycles, bounds, reps = {}, {}, {}
        for (p, q) in B.bidegrees():
            Z = self.ker_delbar(p, q)
            Bd = image(B.delbar(p, q - 1)) if q > 0 else Subspace.zero(B.dim(p, q))
            if not Bd <= Z:
                raise ConsistencyError(f"im delbar not inside ker delbar at {(p, q)}")
            cycles[(p, q)] = Z
            bounds[(p, q)] = Bd
            reps[(p, q)] = complement(Bd, Z)
        page = Page(1, cycles, bounds, reps)
        # del(im delbar) must lie in im delbar for d_1 to be well defined
        for (p, q) in B.bidegrees():
            if B.in_range(p + 1, q):
                for v in bounds[(p, q)].vectors:
                    if not bounds[(p + 1, q)].contains(B.del_(p, q) @ v):
                        raise ConsistencyError(f"del does not preserve im delbar at {(p, q)}")
        self._attach_differentials(page)
        return page

    def next_page(self, P: Page) -> Page:
        B = self.B
        r = P.r
        cycles, bounds, reps = {}, {}, {}
        for (p, q) in B.bidegrees():
            R = P.reps[(p, q)]
            D = P.d[(p, q)]
            # classes killed by d_r
            K = kernel(D)
            lifted = [_combine(R, k, B.dim(p, q)) for k in K.vectors]
            Z = subspace_sum(P.boundaries[(p, q)], Subspace(B.dim(p, q), lifted))
            # images of d_r landing here
            sp, sq = p - r, q + r - 1
            incoming = P.ends.get((sp, sq), []) if B.in_range(sp, sq) else []
            Bd = subspace_sum(P.boundaries[(p, q)], Subspace(B.dim(p, q), incoming))
            expected = intersect(self.ker_delbar(p, q), self.extendable(r, p, q))
            if Z != expected:
                raise ConsistencyError(f"page {r + 1} cycles at {(p, q)} disagree with the zig-zag description")
            if not Bd <= Z:
                raise ConsistencyError(f"page {r + 1} boundaries not inside cycles at {(p, q)}")
            cycles[(p, q)] = Z
            bounds[(p, q)] = Bd
            reps[(p, q)] = complement(Bd, Z)
        page = Page(r + 1, cycles, bounds, reps)
        self._attach_differentials(page)
        return page

    def pages(self, r_max: Optional[int] = None) -> List[Page]:
        r_max = self.n + 1 if r_max is None else r_max
        out = [self.page1()]
        while len(out) < r_max:
            out.append(self.next_page(out[-1]))
        return out


def _combine(vectors: Sequence[Vector], coeffs: Sequence[Scalar], dim: int) -> Vector:
    acc = [ZERO] * dim
    for c, v in zip(coeffs, vectors):
        if c:
            for i, x in enumerate(v):
                if x:
                    acc[i] = acc[i] + c * x
    return tuple(acc)


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------


def page1(B: Bicomplex) -> Page:
    return SpectralEngine(B).page1()


def next_page(P: Page, B: Bicomplex, engine: Optional[SpectralEngine] = None) -> Page:
    return (engine or SpectralEngine(B)).next_page(P)


class TotalComplex:
    """``T^k = sum_{p+q=k} A^{p,q}`` with ``d = del + delbar`` and the ``p``-filtration."""

    def __init__(self, B: Bicomplex):
        self.B = B
        self.n = B.n
        self.offsets: Dict[int, Dict[int, int]] = {}
        self.dims: Dict[int, int] = {}
        for k in range(2 * B.n + 1):
            off = 0
            self.offsets[k] = {}
            for p in range(0, k + 1):
                q = k - p
                if B.in_range(p, q):
                    self.offsets[k][p] = off
                    off += B.dim(p, q)
            self.dims[k] = off
        self._d: Dict[int, Matrix] = {}

    def dim(self, k: int) -> int:
        return self.dims.get(k, 0)

    def d(self, k: int) -> Matrix:
        """``d: T^k -> T^{k+1}``."""
        if k in self._d:
            return self._d[k]
        rows, cols = self.dim(k + 1), self.dim(k)
        data = [[ZERO] * cols for _ in range(rows)]
        B = self.B
        for p, off in self.offsets.get(k, {}).items():
            q = k - p
            for M, tp in ((B.del_(p, q), p + 1), (B.delbar(p, q), p)):
                toff = self.offsets.get(k + 1, {}).get(tp)
                if toff is None:
                    continue
                for i, j, x in M.nonzero_entries():
                    data[toff + i][off + j] = x
        M = Matrix(data, rows, cols)
        self._d[k] = M
        return M

    def filtration(self, p: int, k: int) -> Subspace:
        """``F^p T^k``: forms whose components all have first degree >= p."""
        n = self.dim(k)
        vecs = []
        for pp, off in self.offsets.get(k, {}).items():
            if pp >= p:
                for j in range(self.B.dim(pp, k - pp)):
                    v = [ZERO] * n
                    v[off + j] = Scalar(1)
                    vecs.append(v)
        return Subspace(n, vecs)


def total_cohomology(B: Bicomplex) -> List[int]:
    """Betti numbers ``b_0..b_{2n}`` of the total complex."""
    T = TotalComplex(B)
    ranks = {k: rank(T.d(k)) for k in range(-1, 2 * B.n + 1)}
    out = []
    for k in range(2 * B.n + 1):
        out.append(T.dim(k) - ranks[k] - ranks[k - 1])
    return out


def oracle_page_dims(B: Bicomplex, r: int, T: Optional[TotalComplex] = None) -> Dict[Bidegree, int]:
    """``dim E_r^{p,q}`` from the filtered total complex only.

    ``Z_r^{p} = F^p T^k  cap  d^{-1}(F^{p+r} T^{k+1})`` and
    ``E_r^{p,q} = Z_r^{p} / (Z_{r-1}^{p+1} + d Z_{r-1}^{p-r+1})``.
    """
    if r < 1:
        raise ValueError("page index must be >= 1")
    T = T or TotalComplex(B)

    def Z(rr: int, p: int, k: int) -> Subspace:
        if k < 0 or k > 2 * B.n:
            return Subspace.zero(0)
        F = T.filtration(p, k)
        if k + 1 > 2 * B.n:
            return F
        pre = preimage(T.d(k), T.filtration(p + rr, k + 1))
        return intersect(F, pre)

    out = {}
    for (p, q) in B.bidegrees():
        k = p + q
        Zr = Z(r, p, k)
        A = Z(r - 1, p + 1, k)
        if k - 1 >= 0:
            src = Z(r - 1, p - r + 1, k - 1)
            D = T.d(k - 1)
            dZ = Subspace(T.dim(k), [D @ v for v in src.vectors])
        else:
            dZ = Subspace.zero(T.dim(k))
        den = subspace_sum(A, dZ)
        if not den <= Zr:
            raise ConsistencyError(f"oracle denominator not inside numerator at {(p, q)}")
        out[(p, q)] = Zr.dim - den.dim
    return out


def einf_and_degeneration(B: Bicomplex, engine: Optional[SpectralEngine] = None) -> PageSet:
    """All pages up to ``n + 1`` (beyond which every ``d_r`` leaves the grid)."""
    engine = engine or SpectralEngine(B)
    pages = engine.pages()
    betti = total_cohomology(B)
    last = pages[-1]
    if any(not M.is_zero() for M in last.d.values()):
        raise ConsistencyError("differential on the last page is nonzero")
    einf = last.dims
    for k, b in enumerate(betti):
        s = sum(einf.get((p, k - p), 0) for p in range(0, k + 1))
        if s != b:
            raise ConsistencyError(f"sum of E_inf dims in degree {k} is {s}, Betti number is {b}")
    step = next(pg.r for pg in pages if pg.dims == einf)
    return PageSet(pages, betti, einf, step, B.n)


def _key(bd: Bidegree) -> str:
    return f"{bd[0]},{bd[1]}"


def pageset_to_dict(ps: PageSet, B: Optional[Bicomplex] = None, max_page: Optional[int] = None) -> dict:
    """JSON-ready view: dims, representatives and ``d_r`` matrices as strings."""
    order = table_order(ps.n)
    pages = []
    for pg in ps.pages[: max_page or len(ps.pages)]:
        entry = {"r": pg.r, "dims": {_key(bd): pg.dim(*bd) for bd in order}, "reps": {}, "d": {}}
        for bd in order:
            entry["reps"][_key(bd)] = [[str(x) for x in v] for v in pg.reps.get(bd, [])]
            M = pg.d.get(bd)
            if M is not None and M.rows and M.cols:
                entry["d"][_key(bd)] = M.to_strings()
        pages.append(entry)
    out = {
        "schema": 1,
        "n": ps.n,
        "order": [_key(bd) for bd in order],
        "betti": list(ps.betti),
        "einf": {_key(bd): ps.einf_dims.get(bd, 0) for bd in order},
        "degeneration_step": ps.degeneration_step,
        "pages": pages,
    }
    if B is not None:
        out["basis"] = {_key(bd): B.labels(*bd) for bd in order}
    return out
