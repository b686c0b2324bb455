"""Shared fixtures: random double complexes and cached model computations."""

from __future__ import annotations

import random
from functools import lru_cache
from typing import Dict, List, Tuple

from fss.bicomplex import Bicomplex, expand, validate
from fss.hodge import build_hodge
from fss.linalg import Matrix, inverse, rank
from fss.models import get_family
from fss.scalars import ONE, ZERO, Scalar
from fss.spectral import einf_and_degeneration, table_order

N = 3
MAX_DIM = 4

# profiles in the reference table's row order
H0 = [1, 3, 3, 3, 9, 3, 1, 9, 9, 1, 3, 9, 3, 3, 3, 1]
E2_0 = [1, 1, 1, 1, 3, 1, 1, 3, 3, 1, 1, 3, 1, 1, 1, 1]
HT = [1, 2, 3, 2, 6, 3, 1, 6, 6, 1, 3, 6, 2, 3, 2, 1]
E2_T = [1, 1, 1, 1, 2, 3, 1, 3, 3, 1, 3, 2, 1, 1, 1, 1]
BETTI = [1, 2, 5, 8, 5, 2, 1]
NONZERO_SAMPLES = ("1/2", "1", "i/3", "1/2+1/2i")


def rand_scalar(rng: random.Random, nonzero: bool = False, complex_: bool = True) -> Scalar:
    while True:
        re = Scalar(rng.randint(-4, 4)) * Scalar(1) / rng.randint(1, 3)
        im = Scalar(rng.randint(-3, 3)) / rng.randint(1, 2) if complex_ and rng.random() < 0.5 else ZERO
        x = re + im * Scalar(0, 1)
        if x or not nonzero:
            return x


def rand_invertible(rng: random.Random, n: int) -> Matrix:
    while True:
        M = Matrix([[rand_scalar(rng) for _ in range(n)] for _ in range(n)], n, n)
        if rank(M) == n:
            return M


# indecomposable pieces: each is (vertices, edges) with edges (src, dst, kind)
def _zigzag(rng: random.Random, p: int, q: int, length: int, start_low: bool):
    """Alternating chain v_0 -> w_0 <- v_1 -> w_1 ... with v_i at (p+i, q-i)."""
    verts: List[Tuple[int, int]] = []
    edges = []
    # positions along the chain: index 2i -> v_i, 2i+1 -> w_i, -1 -> w_{-1}
    start = 0 if start_low else -1
    seq = list(range(start, start + length))
    for s in seq:
        if s % 2 == 0:
            i = s // 2
            verts.append((p + i, q - i))
        else:
            j = (s - 1) // 2
            verts.append((p + j + 1, q - j))
    for a in range(len(seq) - 1):
        s, t = seq[a], seq[a + 1]
        if s % 2 == 0:  # v_i -> w_i by del
            edges.append((a, a + 1, "del"))
        else:  # v_{i+1} -> w_i by delbar
            edges.append((a + 1, a, "delbar"))
    return verts, edges


def _square(p: int, q: int):
    verts = [(p, q), (p + 1, q), (p, q + 1), (p + 1, q + 1)]
    edges = [(0, 1, "del"), (0, 2, "delbar"), (1, 3, "delbar"), (2, 3, "del-neg")]
    return verts, edges


def random_bicomplex(seed: int, n: int = N, max_dim: int = MAX_DIM, grams: bool = False) -> Bicomplex:
    """Direct sum of dots, squares and zigzags, then a random basis change per bidegree."""
    rng = random.Random(seed)
    dims: Dict[Tuple[int, int], int] = {(p, q): 0 for p in range(n + 1) for q in range(n + 1)}
    pieces = []
    for _ in range(rng.randint(3, 14)):
        kind = rng.choice(["dot", "square", "zigzag", "zigzag", "zigzag"])
        p, q = rng.randint(0, n), rng.randint(0, n)
        if kind == "dot":
            verts, edges = [(p, q)], []
        elif kind == "square":
            verts, edges = _square(p, q)
        else:
            verts, edges = _zigzag(rng, p, q, rng.randint(2, 6), rng.random() < 0.5)
        if any(v not in dims for v in verts):
            continue
        need: Dict[Tuple[int, int], int] = {}
        for v in verts:
            need[v] = need.get(v, 0) + 1
        if any(dims[v] + k > max_dim for v, k in need.items()):
            continue
        idx = []
        for v in verts:
            idx.append(dims[v])
            dims[v] += 1
        pieces.append((kind, verts, edges, idx))
    D = {bd: [[ZERO] * dims[bd] for _ in range(dims[(bd[0] + 1, bd[1])] if (bd[0] + 1, bd[1]) in dims else 0)] for bd in dims}
    Db = {bd: [[ZERO] * dims[bd] for _ in range(dims[(bd[0], bd[1] + 1)] if (bd[0], bd[1] + 1) in dims else 0)] for bd in dims}
    for kind_, verts, edges, idx in pieces:
        for a, b, kind in edges:
            src, dst = verts[a], verts[b]
            if kind == "del-neg":
                # square: del(delbar x) = -delbar(del x)
                D[src][idx[b]][idx[a]] = -ONE
            elif kind == "del":
                D[src][idx[b]][idx[a]] = ONE if kind_ == "square" else rand_scalar(rng, nonzero=True)
            else:
                Db[src][idx[b]][idx[a]] = ONE if kind_ == "square" else rand_scalar(rng, nonzero=True)
    basis = {bd: [f"e{bd[0]}{bd[1]}_{i}" for i in range(d)] for bd, d in dims.items()}
    P = {bd: rand_invertible(rng, d) if d else Matrix.zeros(0, 0) for bd, d in dims.items()}
    Pinv = {bd: inverse(M) if M.rows else M for bd, M in P.items()}
    dels, delbars = {}, {}
    for (p, q), d in dims.items():
        up, right = (p + 1, q), (p, q + 1)
        if up in dims:
            dels[(p, q)] = P[up] @ Matrix(D[(p, q)], dims[up], d) @ Pinv[(p, q)]
        if right in dims:
            delbars[(p, q)] = P[right] @ Matrix(Db[(p, q)], dims[right], d) @ Pinv[(p, q)]
    gr = None
    if grams:
        gr = {}
        for bd, d in dims.items():
            if d:
                L = rand_invertible(rng, d)
                gr[bd] = L.H @ L
    B = Bicomplex(n, basis, dels, delbars, gr, name=f"random-{seed}")
    assert not validate(B)
    return B


@lru_cache(maxsize=None)
def model(name: str, t: str = "0", window=None, weights: str = "full") -> Bicomplex:
    fam = get_family(name)
    return expand(fam.presentation, fam.values(Scalar.parse(t)), weight_cutoff=window, weights=weights, name=name)


@lru_cache(maxsize=None)
def pageset(name: str, t: str = "0", window=None, weights: str = "full"):
    return einf_and_degeneration(model(name, t, window, weights))


@lru_cache(maxsize=None)
def hodge(name: str, t: str = "0"):
    return build_hodge(model(name, t))


def profile(d: Dict[Tuple[int, int], int], n: int = N) -> List[int]:
    return [d.get(bd, 0) for bd in table_order(n)]


SHIPPED = [("nakamura", "0"), ("nakamura", "1/2"), ("nakamura", "i/3"), ("torus", "0"), ("iwasawa", "0")]


def pageset_problems(ps) -> List[str]:
    """Structural invariants of a computed PageSet; empty list when all hold."""
    from fss.linalg import rank as _rank

    out = []
    order = table_order(ps.n)
    chi_b = sum((-1) ** k * b for k, b in enumerate(ps.betti))
    for pg in ps.pages:
        r = pg.r
        for (p, q), M in pg.d.items():
            tp, tq = p + r, q - r + 1
            M2 = pg.d.get((tp, tq))
            if M2 is not None and M.rows and M2.cols:
                if not (M2 @ M).is_zero():
                    out.append(f"d_{r} o d_{r} != 0 at {(p, q)}")
        chi = sum((-1) ** (p + q) * pg.dim(p, q) for p, q in order)
        if chi != chi_b:
            out.append(f"Euler characteristic of page {r} is {chi}, expected {chi_b}")
        if r < ps.r_max:
            nxt = ps.page(r + 1)
            for (p, q) in order:
                if nxt.dim(p, q) > pg.dim(p, q):
                    out.append(f"dim E_{r + 1}{(p, q)} > dim E_{r}{(p, q)}")
                out_rank = _rank(pg.d[(p, q)]) if pg.d[(p, q)].rows else 0
                src = (p - r, q + r - 1)
                in_rank = _rank(pg.d[src]) if src in pg.d and pg.d[src].rows and pg.d[src].cols else 0
                if nxt.dim(p, q) != pg.dim(p, q) - out_rank - in_rank:
                    out.append(f"dim E_{r + 1}{(p, q)} is not the cohomology of d_{r}")
    for k, b in enumerate(ps.betti):
        s = sum(ps.einf_dims.get((p, k - p), 0) for p in range(k + 1))
        if s != b:
            out.append(f"sum of E_inf in degree {k} is {s}, b_{k} = {b}")
    return out
