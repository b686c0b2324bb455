"""Finite double complexes and their expansion from structure equations.

A :class:`StructurePresentation` lists degree-one generators with their
bidegrees and the differential of each generator.  :func:`expand` builds the
exterior algebra on those generators, optionally tensored with the powers
``u**k`` (``|k| <= W``) of a degree-zero character symbol, extends ``d`` by the
graded Leibniz rule and splits it into ``del`` and ``delbar`` by bidegree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .linalg import Matrix
from .scalars import ONE, ZERO, ParamExpr, Scalar

__all__ = [
    "BicomplexError",
    "GeneratorDecl",
    "DTerm",
    "StructurePresentation",
    "BasisElement",
    "Bicomplex",
    "Violation",
    "FormAlgebra",
    "expand",
    "validate",
    "conjugate",
    "to_json",
    "from_json",
    "DEFAULT_WEIGHT_CUTOFF",
]

DEFAULT_WEIGHT_CUTOFF = 2

Bidegree = Tuple[int, int]


class BicomplexError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorDecl:
    name: str
    bidegree: Bidegree
    weight: int = 0
    conj_partner: Optional[str] = None

    @property
    def degree(self) -> int:
        return self.bidegree[0] + self.bidegree[1]


@dataclass(frozen=True)
class DTerm:
    """``coeff * u**weight * (wedge of monomial)``; monomial is in declaration order."""

    coeff: ParamExpr
    weight: int
    monomial: Tuple[str, ...]


@dataclass
class StructurePresentation:
    generators: Tuple[GeneratorDecl, ...] = ()
    d_rules: Dict[str, Tuple[DTerm, ...]] = field(default_factory=dict)
    params: Tuple[str, ...] = ()
    weight_symbol: Optional[str] = None
    weight_cutoff: int = DEFAULT_WEIGHT_CUTOFF

    def generator(self, name: str) -> GeneratorDecl:
        for g in self.generators:
            if g.name == name:
                return g
        raise KeyError(name)

    @property
    def odd_generators(self) -> Tuple[GeneratorDecl, ...]:
        return tuple(g for g in self.generators if g.degree == 1)

    def rule(self, name: str) -> Tuple[DTerm, ...]:
        return self.d_rules.get(name, ())


@dataclass(frozen=True)
class BasisElement:
    monomial: Tuple[int, ...]  # indices into the odd generators, increasing
    weight: int
    label: str


@dataclass(frozen=True)
class Violation:
    kind: str
    bidegree: Bidegree
    detail: str

    def __str__(self):
        return f"{self.kind} at {self.bidegree}: {self.detail}"


class Bicomplex:
    """Bigraded spaces ``A^{p,q}`` (0 <= p, q <= n) with ``del`` and ``delbar``.

    ``dels[(p, q)]`` maps ``A^{p,q} -> A^{p+1,q}`` and ``delbars[(p, q)]`` maps
    ``A^{p,q} -> A^{p,q+1}``; missing entries are zero maps.  ``grams`` holds
    Hermitian positive-definite inner products, identity when absent.
    """

    def __init__(
        self,
        n: int,
        basis: Mapping[Bidegree, Sequence[BasisElement | str]],
        dels: Mapping[Bidegree, Matrix] | None = None,
        delbars: Mapping[Bidegree, Matrix] | None = None,
        grams: Mapping[Bidegree, Matrix] | None = None,
        name: str = "",
    ):
        self.n = n
        self.name = name
        self.basis: Dict[Bidegree, Tuple[BasisElement, ...]] = {}
        for p in range(n + 1):
            for q in range(n + 1):
                elems = basis.get((p, q), ())
                self.basis[(p, q)] = tuple(
                    e if isinstance(e, BasisElement) else BasisElement((), 0, str(e)) for e in elems
                )
        for key in basis:
            if key not in self.basis:
                raise BicomplexError(f"bidegree {key} outside 0..{n}")
        self.dels: Dict[Bidegree, Matrix] = {}
        self.delbars: Dict[Bidegree, Matrix] = {}
        for (p, q) in self.basis:
            self.dels[(p, q)] = self._fit((dels or {}).get((p, q)), (p + 1, q), (p, q), "del")
            self.delbars[(p, q)] = self._fit((delbars or {}).get((p, q)), (p, q + 1), (p, q), "delbar")
        self.grams: Dict[Bidegree, Optional[Matrix]] = {}
        for (p, q) in self.basis:
            G = (grams or {}).get((p, q))
            if G is not None:
                d = self.dim(p, q)
                if G.shape != (d, d):
                    raise BicomplexError(f"Gram matrix at {(p, q)} has shape {G.shape}, expected {(d, d)}")
                if G.is_identity():
                    G = None
            self.grams[(p, q)] = G
        self.truncated_rule_terms: Tuple[str, ...] = ()

    def _fit(self, M: Optional[Matrix], dst: Bidegree, src: Bidegree, what: str) -> Matrix:
        shape = (self.dim(*dst), self.dim(*src))
        if M is None:
            return Matrix.zeros(*shape)
        if M.shape != shape:
            raise BicomplexError(f"{what} at {src} has shape {M.shape}, expected {shape}")
        return M

    def dim(self, p: int, q: int) -> int:
        return len(self.basis.get((p, q), ()))

    def bidegrees(self) -> List[Bidegree]:
        return sorted(self.basis)

    def in_range(self, p: int, q: int) -> bool:
        return 0 <= p <= self.n and 0 <= q <= self.n

    def del_(self, p: int, q: int) -> Matrix:
        if (p, q) in self.dels:
            return self.dels[(p, q)]
        return Matrix.zeros(self.dim(p + 1, q), self.dim(p, q))

    def delbar(self, p: int, q: int) -> Matrix:
        if (p, q) in self.delbars:
            return self.delbars[(p, q)]
        return Matrix.zeros(self.dim(p, q + 1), self.dim(p, q))

    def gram(self, p: int, q: int) -> Matrix:
        G = self.grams.get((p, q))
        return Matrix.identity(self.dim(p, q)) if G is None else G

    def gram_or_none(self, p: int, q: int) -> Optional[Matrix]:
        return self.grams.get((p, q))

    def labels(self, p: int, q: int) -> List[str]:
        return [e.label for e in self.basis.get((p, q), ())]

    def total_dim(self, k: int) -> int:
        return sum(self.dim(p, k - p) for p in range(0, k + 1))

    def with_grams(self, grams: Mapping[Bidegree, Matrix]) -> "Bicomplex":
        out = Bicomplex(self.n, self.basis, self.dels, self.delbars, grams, self.name)
        out.truncated_rule_terms = self.truncated_rule_terms
        return out

    def __eq__(self, other):
        if not isinstance(other, Bicomplex):
            return NotImplemented
        return (
            self.n == other.n
            and self.basis == other.basis
            and self.dels == other.dels
            and self.delbars == other.delbars
            and self.grams == other.grams
        )

    def __repr__(self):
        total = sum(len(b) for b in self.basis.values())
        return f"Bicomplex(name={self.name!r}, n={self.n}, total_dim={total})"


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


def validate(B: Bicomplex) -> List[Violation]:
    """All violations of the double-complex identities, as a list (empty if clean)."""
    out: List[Violation] = []
    for (p, q) in B.bidegrees():
        src = B.dim(p, q)
        for what, M, dst in (("del", B.dels[(p, q)], (p + 1, q)), ("delbar", B.delbars[(p, q)], (p, q + 1))):
            if M.shape != (B.dim(*dst), src):
                out.append(Violation("shape", (p, q), f"{what} has shape {M.shape}"))
    if out:
        return out
    for (p, q) in B.bidegrees():
        d1 = B.del_(p + 1, q) @ B.del_(p, q)
        if not d1.is_zero():
            out.append(Violation("del^2", (p, q), _first_bad(B, p, q, d1)))
        d2 = B.delbar(p, q + 1) @ B.delbar(p, q)
        if not d2.is_zero():
            out.append(Violation("delbar^2", (p, q), _first_bad(B, p, q, d2)))
        d3 = B.del_(p, q + 1) @ B.delbar(p, q) + B.delbar(p + 1, q) @ B.del_(p, q)
        if not d3.is_zero():
            out.append(Violation("del*delbar+delbar*del", (p, q), _first_bad(B, p, q, d3)))
        G = B.gram_or_none(p, q)
        if G is not None and not G.is_hermitian():
            out.append(Violation("gram", (p, q), "Gram matrix is not Hermitian"))
    return out


def _first_bad(B: Bicomplex, p: int, q: int, M: Matrix) -> str:
    for i, j, _ in M.nonzero_entries():
        return f"fails on basis element {B.basis[(p, q)][j].label}"
    return ""


# --------------------------------------------------------------------------
# expansion
# --------------------------------------------------------------------------


def _sort_sign(idx: Sequence[int]) -> Tuple[int, Tuple[int, ...]]:
    """Sign of the permutation sorting ``idx``; 0 if an index repeats."""
    seq = list(idx)
    if len(set(seq)) != len(seq):
        return 0, ()
    sign = 1
    # insertion sort, counting transpositions
    for i in range(1, len(seq)):
        j = i
        while j > 0 and seq[j - 1] > seq[j]:
            seq[j - 1], seq[j] = seq[j], seq[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(seq)


Form = Dict[Tuple[Tuple[int, ...], int], Scalar]


class FormAlgebra:
    """Forms ``sum c * u**k * g_I`` with ``d`` evaluated at fixed parameter values.

    Forms are dicts ``(monomial, weight) -> Scalar``.  No weight window is
    applied here; :func:`expand` does the truncation.
    """

    def __init__(self, pres: StructurePresentation, values: Mapping[str, Scalar] | None = None):
        values = dict(values or {})
        missing = [p for p in pres.params if p not in values]
        if missing:
            raise BicomplexError(f"no value given for parameter(s) {', '.join(missing)}")
        if len(pres.params) > 1:
            raise BicomplexError("only one-parameter families are supported")
        self.pres = pres
        self.odd = pres.odd_generators
        self.index = {g.name: i for i, g in enumerate(self.odd)}
        tval = values[pres.params[0]] if pres.params else ZERO
        self.rules: List[Form] = []
        for g in self.odd:
            self.rules.append(self._eval_rule(pres.rule(g.name), tval))
        self.weight_rule: Form = {}
        if pres.weight_symbol is not None:
            # d u = u * theta; stored with weight 1, so theta carries weight 0
            for (mono, w), c in self._eval_rule(pres.rule(pres.weight_symbol), tval).items():
                self.weight_rule[(mono, w - 1)] = c

    def _eval_rule(self, terms: Iterable[DTerm], tval: Scalar) -> Form:
        out: Form = {}
        for term in terms:
            c = term.coeff.evaluate(tval)
            if not c:
                continue
            sign, mono = _sort_sign([self.index[n] for n in term.monomial])
            if not sign:
                continue
            key = (mono, term.weight)
            out[key] = out.get(key, ZERO) + (c if sign > 0 else -c)
        return {k: v for k, v in out.items() if v}

    def bidegree(self, mono: Tuple[int, ...]) -> Bidegree:
        p = sum(1 for i in mono if self.odd[i].bidegree == (1, 0))
        return p, len(mono) - p

    def wedge(self, f: Form, g: Form) -> Form:
        out: Form = {}
        for (m1, w1), c1 in f.items():
            for (m2, w2), c2 in g.items():
                sign, mono = _sort_sign(m1 + m2)
                if not sign:
                    continue
                key = (mono, w1 + w2)
                v = c1 * c2
                out[key] = out.get(key, ZERO) + (v if sign > 0 else -v)
        return {k: v for k, v in out.items() if v}

    def d_monomial(self, mono: Tuple[int, ...], weight: int) -> Form:
        out: Form = {}

        def add(key, v):
            out[key] = out.get(key, ZERO) + v

        if weight and self.weight_rule:
            # d(u^k) = k u^k theta
            for (tm, tw), c in self.weight_rule.items():
                sign, m = _sort_sign(tm + mono)
                if sign:
                    add((m, weight + tw), c * (weight * sign))
        for j, gi in enumerate(mono):
            koszul = -1 if j % 2 else 1
            for (rm, rw), c in self.rules[gi].items():
                sign, m = _sort_sign(mono[:j] + rm + mono[j + 1:])
                if sign:
                    add((m, weight + rw), c * (koszul * sign))
        return {k: v for k, v in out.items() if v}

    def d(self, f: Form) -> Form:
        out: Form = {}
        for (mono, w), c in f.items():
            for key, v in self.d_monomial(mono, w).items():
                out[key] = out.get(key, ZERO) + c * v
        return {k: v for k, v in out.items() if v}

    def label(self, mono: Tuple[int, ...], weight: int) -> str:
        body = "^".join(self.odd[i].name for i in mono) or "1"
        if weight and self.pres.weight_symbol:
            return f"{self.pres.weight_symbol}[{weight}]*{body}"
        return body


def expand(
    pres: StructurePresentation,
    values: Mapping[str, Scalar] | None = None,
    weight_cutoff: Optional[int] = None,
    weights: str = "full",
    name: str = "",
    check: bool = True,
) -> Bicomplex:
    """Expand a presentation into a validated :class:`Bicomplex`.

    ``weights="none"`` keeps only weight 0 (a quotient complex, same as a
    cutoff of 0).  Components of ``d`` leaving the window ``|k| <= W`` are
    discarded; ``d`` never lowers weight, so this is a quotient complex.
    """
    if weights not in ("full", "none"):
        raise BicomplexError(f"unknown weights mode {weights!r}")
    W = pres.weight_cutoff if weight_cutoff is None else weight_cutoff
    if W < 0:
        raise BicomplexError("weight cutoff must be non-negative")
    if weights == "none" or pres.weight_symbol is None:
        W = 0
    alg = FormAlgebra(pres, values)
    odd = alg.odd
    for g in odd:
        if g.bidegree not in ((1, 0), (0, 1)):
            raise BicomplexError(f"generator {g.name} has bidegree {g.bidegree}")
    for rule in alg.rules:
        if any(w < 0 for (_, w) in rule):
            raise BicomplexError("d-rule lowers weight")
    a = sum(1 for g in odd if g.bidegree == (1, 0))
    b = len(odd) - a
    n = max(a, b)
    weights_range = list(range(-W, W + 1))

    basis: Dict[Bidegree, List[BasisElement]] = {}
    for size in range(len(odd) + 1):
        for mono in combinations(range(len(odd)), size):
            bd = alg.bidegree(mono)
            for k in weights_range:
                basis.setdefault(bd, []).append(BasisElement(mono, k, alg.label(mono, k)))
    for bd in basis:
        basis[bd].sort(key=lambda e: (e.monomial, e.weight))
    position = {bd: {(e.monomial, e.weight): i for i, e in enumerate(elems)} for bd, elems in basis.items()}

    dels: Dict[Bidegree, List[List[Scalar]]] = {}
    delbars: Dict[Bidegree, List[List[Scalar]]] = {}
    for (p, q), elems in basis.items():
        up = position.get((p + 1, q), {})
        right = position.get((p, q + 1), {})
        D = [[ZERO] * len(elems) for _ in range(len(up))]
        Db = [[ZERO] * len(elems) for _ in range(len(right))]
        for j, e in enumerate(elems):
            for (mono, w), c in alg.d_monomial(e.monomial, e.weight).items():
                if w > W:
                    continue
                bd = alg.bidegree(mono)
                if bd == (p + 1, q):
                    D[up[(mono, w)]][j] = c
                elif bd == (p, q + 1):
                    Db[right[(mono, w)]][j] = c
                else:
                    raise BicomplexError(f"d({e.label}) has a component of bidegree {bd}")
        dels[(p, q)] = D
        delbars[(p, q)] = Db

    B = Bicomplex(
        n,
        basis,
        {k: Matrix(v, len(v), len(basis[k])) for k, v in dels.items()},
        {k: Matrix(v, len(v), len(basis[k])) for k, v in delbars.items()},
        name=name,
    )
    dropped = []
    for g, rule in zip(odd, alg.rules):
        for (mono, w), c in rule.items():
            if w > W:
                dropped.append(f"d{g.name}: {c} * {alg.label(mono, w)}")
    B.truncated_rule_terms = tuple(dropped)
    if check:
        bad = validate(B)
        if bad:
            raise BicomplexError("d^2 != 0 after expansion: " + "; ".join(str(v) for v in bad))
    return B


# --------------------------------------------------------------------------
# conjugation
# --------------------------------------------------------------------------


def _conj_label(label: str, partner: Mapping[str, str]) -> str:
    if "*" in label:
        wpart, body = label.split("*", 1)
        sym, k = wpart[:-1].split("[")
        wpart = f"{sym}[{-int(k)}]"
    else:
        wpart, body = "", label
    if body != "1":
        body = "^".join(partner.get(x, x) for x in body.split("^"))
    return f"{wpart}*{body}" if wpart else body


def conjugate(B: Bicomplex, partners: Mapping[str, str] | None = None) -> Bicomplex:
    """The complex-conjugate double complex.

    ``A'^{p,q} = conj(A^{q,p})`` with the same basis order, ``del' = conj(delbar)``
    and ``delbar' = conj(del)``.  Labels are renamed through ``partners`` and
    weights are negated.
    """
    if partners is not None:
        for elems in B.basis.values():
            for e in elems:
                body = e.label.split("*", 1)[-1]
                if body != "1":
                    for x in body.split("^"):
                        if x not in partners:
                            raise BicomplexError(f"generator {x} has no conjugate partner")
    partners = partners or {}
    basis = {}
    for (p, q), elems in B.basis.items():
        basis[(q, p)] = [
            BasisElement(e.monomial, -e.weight, _conj_label(e.label, partners)) for e in elems
        ]
    dels = {(q, p): M.conj() for (p, q), M in B.delbars.items()}
    delbars = {(q, p): M.conj() for (p, q), M in B.dels.items()}
    grams = {(q, p): G.conj() for (p, q), G in B.grams.items() if G is not None}
    return Bicomplex(B.n, basis, dels, delbars, grams, name=f"conj({B.name})" if B.name else "")


def presentation_partners(pres: StructurePresentation) -> Dict[str, str]:
    out = {}
    for g in pres.generators:
        if g.conj_partner is None:
            raise BicomplexError(f"generator {g.name} has no conjugate partner")
        out[g.name] = g.conj_partner
    return out


# --------------------------------------------------------------------------
# JSON
# --------------------------------------------------------------------------


def _mat_json(M: Matrix) -> List[List[str]]:
    return M.to_strings()


def to_json(B: Bicomplex) -> str:
    """Serialize to a JSON document; matrices are arrays of ``a/b+c/d i`` strings."""
    doc = {
        "schema": 1,
        "name": B.name,
        "n": B.n,
        "bidegrees": [],
    }
    for (p, q) in B.bidegrees():
        entry = {
            "p": p,
            "q": q,
            "basis": B.labels(p, q),
            "weights": [e.weight for e in B.basis[(p, q)]],
            "monomials": [list(e.monomial) for e in B.basis[(p, q)]],
            "del": _mat_json(B.del_(p, q)),
            "delbar": _mat_json(B.delbar(p, q)),
        }
        G = B.gram_or_none(p, q)
        if G is not None:
            entry["gram"] = _mat_json(G)
        doc["bidegrees"].append(entry)
    return json.dumps(doc, indent=1, sort_keys=True)


def from_json(text: str) -> Bicomplex:
    doc = json.loads(text)
    if doc.get("schema") != 1:
        raise BicomplexError("unsupported bicomplex JSON schema")
    n = doc["n"]
    basis, dels, delbars, grams = {}, {}, {}, {}

    def mat(rows, nrows, ncols):
        return Matrix([[Scalar.parse(x) for x in r] for r in rows], nrows, ncols)

    dims = {(e["p"], e["q"]): len(e["basis"]) for e in doc["bidegrees"]}
    for e in doc["bidegrees"]:
        key = (e["p"], e["q"])
        monos = e.get("monomials", [[]] * len(e["basis"]))
        basis[key] = [
            BasisElement(tuple(m), w, lab) for lab, w, m in zip(e["basis"], e["weights"], monos)
        ]
        d = dims[key]
        dels[key] = mat(e["del"], dims.get((key[0] + 1, key[1]), 0), d)
        delbars[key] = mat(e["delbar"], dims.get((key[0], key[1] + 1), 0), d)
        if "gram" in e:
            grams[key] = mat(e["gram"], d, d)
    return Bicomplex(n, basis, dels, delbars, grams, name=doc.get("name", ""))
