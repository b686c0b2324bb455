"""Built-in deformation families.

``nakamura`` is the one-parameter family of complex structures on the
completely solvable Nakamura manifold ``Gamma \\ (C x| C^2)`` given by the
Beltrami differential ``t e^{z1} dzbar1 (x) d/dz2``.  Its invariant coframe
``phi1..phi3`` (type (1,0)) and ``phibar1..phibar3`` (type (0,1)) satisfy the
structure equations below, where ``u`` stands for the character
``e^{zbar1 - z1}`` that multiplies ``phi1 ^ phibar1`` in ``d phibar2``.

``torus`` (zero differential) and ``iwasawa`` (``d phi3 = -phi1^phi2``) are
sanity models.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from .bicomplex import StructurePresentation
from .dsl import parse, roundtrip
from .scalars import Scalar

__all__ = [
    "DeformationFamily",
    "nakamura_family",
    "torus_family",
    "iwasawa",
    "catalog",
    "get_family",
    "NAKAMURA_SOURCE",
]

NAKAMURA_SOURCE = """\
fss 1
# Nakamura manifold X = Gamma \\ G, G = C x|_phi C^2, deformed by
# phi_t = t e^{z1} dzbar1 (x) d/dz2.  u = e^{zbar1 - z1}.
param t;
weight u;
gen phi1 : (1,0) conj phibar1;
gen phi2 : (1,0) conj phibar2;
gen phi3 : (1,0) conj phibar3;
gen phibar1 : (0,1) conj phi1;
gen phibar2 : (0,1) conj phi2;
gen phibar3 : (0,1) conj phi3;
d phi1 = 0;
d phi2 = - phi1^phi2 - t phi1^phibar1;
d phi3 = phi1^phi3;
d phibar1 = 0;
d phibar2 = - phi1^phibar2 + conj(t) u^phi1^phibar1;
d phibar3 = phi1^phibar3;
d u = u^phibar1 - u^phi1;
"""

IWASAWA_SOURCE = """\
fss 1
gen phi1 : (1,0) conj phibar1;
gen phi2 : (1,0) conj phibar2;
gen phi3 : (1,0) conj phibar3;
gen phibar1 : (0,1) conj phi1;
gen phibar2 : (0,1) conj phi2;
gen phibar3 : (0,1) conj phi3;
d phi3 = - phi1^phi2;
d phibar3 = - phibar1^phibar2;
"""


def _torus_source(n: int) -> str:
    lines = ["fss 1"]
    for i in range(1, n + 1):
        lines.append(f"gen phi{i} : (1,0) conj phibar{i};")
    for i in range(1, n + 1):
        lines.append(f"gen phibar{i} : (0,1) conj phi{i};")
    return "\n".join(lines) + "\n"


@dataclass
class DeformationFamily:
    name: str
    presentation: StructurePresentation
    samples: List[Scalar] = field(default_factory=list)
    doc: str = ""

    @property
    def param(self) -> str | None:
        return self.presentation.params[0] if self.presentation.params else None

    def values(self, t: Scalar | str | None = None) -> Dict[str, Scalar]:
        if self.param is None:
            return {}
        if t is None:
            return {self.param: Scalar(0)}
        return {self.param: Scalar.parse(t) if isinstance(t, str) else Scalar.coerce(t)}

    def source(self) -> str:
        """Canonical ``.fss`` text (what ships under ``models/``)."""
        return roundtrip(self.presentation)


def nakamura_family() -> DeformationFamily:
    return DeformationFamily(
        "nakamura",
        parse(NAKAMURA_SOURCE, "nakamura"),
        [Scalar.parse(s) for s in ("0", "1/2", "1", "i/3", "1/2+1/2i")],
        "Nakamura manifold deformed along t e^{z1} dzbar1 (x) d/dz2; "
        "u is the character e^{zbar1 - z1}.",
    )


def torus_family(n: int = 3) -> DeformationFamily:
    if not 1 <= n <= 3:
        raise ValueError("torus dimension must be 1, 2 or 3")
    name = "torus" if n == 3 else f"torus{n}"
    return DeformationFamily(
        name,
        parse(_torus_source(n), name),
        [Scalar(0)],
        f"Complex {n}-torus: all differentials vanish.",
    )


def iwasawa() -> DeformationFamily:
    return DeformationFamily(
        "iwasawa",
        parse(IWASAWA_SOURCE, "iwasawa"),
        [Scalar(0)],
        "Iwasawa manifold: d phi3 = -phi1^phi2 on the holomorphic coframe.",
    )


def catalog() -> Dict[str, DeformationFamily]:
    fams = [nakamura_family(), torus_family(3), torus_family(2), torus_family(1), iwasawa()]
    return {f.name: f for f in fams}


def get_family(name: str) -> DeformationFamily:
    cat = catalog()
    if name not in cat:
        raise KeyError(f"unknown builtin model {name!r}; known: {', '.join(sorted(cat))}")
    return cat[name]
