"""Exact Gaussian-rational scalars and the one-parameter coefficient ring.

Everything downstream (matrices, subspaces, spectral pages) is built on
:class:`Scalar`, an element of Q(i) stored as two :class:`fractions.Fraction`
values.  :class:`ParamExpr` is a polynomial in a deformation parameter ``t``
and its conjugate, evaluated to a :class:`Scalar` before any rank is taken.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, Tuple, Union

__all__ = ["Scalar", "ParamExpr", "ScalarParseError", "eval_param", "ZERO", "ONE", "I"]

Number = Union[int, Fraction, "Scalar"]


class ScalarParseError(ValueError):
    pass


_RAT = r"\d+(?:/\d+)?"
_TERM_RE = re.compile(
    rf"""\s*(?P<sign>[+-]?)\s*
        (?:
            (?P<imag_num>{_RAT})?\s*i(?:\s*/\s*(?P<imag_den>\d+))?
          | (?P<real>{_RAT})
        )\s*""",
    re.VERBOSE,
)


class Scalar:
    """An exact element ``re + im*i`` of Q(i).

    Instances are immutable and hashable; both parts are kept as
    ``Fraction`` in lowest terms, so equality is structural.
    """

    __slots__ = ("re", "im")

    def __init__(self, re: Union[int, Fraction, str] = 0, im: Union[int, Fraction, str] = 0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __reduce__(self):
        return (Scalar, (self.re, self.im))

    @classmethod
    def coerce(cls, x: Number) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to Scalar")

    @classmethod
    def parse(cls, text: str) -> "Scalar":
        """Parse ``a/b``, ``a/b+c/d i``, ``1/3i``, ``i/3``, ``-i`` and similar."""
        s = text.strip()
        if not s:
            raise ScalarParseError("empty scalar literal")
        if s.startswith("(") and s.endswith(")"):
            s = s[1:-1]
        try:
            return cls._parse_terms(text, s)
        except ZeroDivisionError:
            raise ScalarParseError(f"zero denominator in {text!r}") from None

    @classmethod
    def _parse_terms(cls, text: str, s: str) -> "Scalar":
        pos = 0
        re_part = Fraction(0)
        im_part = Fraction(0)
        seen = 0
        while pos < len(s):
            m = _TERM_RE.match(s, pos)
            if m is None or m.end() == pos:
                raise ScalarParseError(f"bad scalar literal {text!r}")
            if seen and not m.group("sign"):
                raise ScalarParseError(f"bad scalar literal {text!r}")
            sign = -1 if m.group("sign") == "-" else 1
            if m.group("real") is not None:
                re_part += sign * Fraction(m.group("real"))
            else:
                num = Fraction(m.group("imag_num")) if m.group("imag_num") else Fraction(1)
                if m.group("imag_den"):
                    if m.group("imag_num"):
                        raise ScalarParseError(f"bad scalar literal {text!r}")
                    den = int(m.group("imag_den"))
                    if den == 0:
                        raise ScalarParseError(f"zero denominator in {text!r}")
                    num = num / den
                im_part += sign * num
            pos = m.end()
            seen += 1
        return cls(re_part, im_part)

    # arithmetic -------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction)):
                return _mk(self.re + other, self.im)
            return NotImplemented
        return _mk(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction)):
                return _mk(self.re - other, self.im)
            return NotImplemented
        return _mk(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return Scalar.coerce(other) - self

    def __neg__(self):
        return _mk(-self.re, -self.im)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction)):
                return _mk(self.re * other, self.im * other)
            return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return _mk(a * c, b)
        return _mk(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def inv(self) -> "Scalar":
        a, b = self.re, self.im
        n = a * a + b * b
        if not n:
            raise ZeroDivisionError("Scalar division by zero")
        return _mk(a / n, -b / n)

    def __truediv__(self, other):
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction)):
                if not other:
                    raise ZeroDivisionError("Scalar division by zero")
                return _mk(self.re / other, self.im / other)
            return NotImplemented
        if not other.im:
            if not other.re:
                raise ZeroDivisionError("Scalar division by zero")
            return _mk(self.re / other.re, self.im / other.re)
        return self * other.inv()

    def __rtruediv__(self, other):
        return Scalar.coerce(other) * self.inv()

    def conj(self) -> "Scalar":
        return _mk(self.re, -self.im)

    def norm2(self) -> Fraction:
        """``x * conj(x)`` as a rational."""
        return self.re * self.re + self.im * self.im

    # comparison -------------------------------------------------------

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def is_real(self) -> bool:
        return not self.im

    # text -------------------------------------------------------------

    def __str__(self):
        if not self.im:
            return str(self.re)
        im = "" if abs(self.im) == 1 else str(abs(self.im))
        if not self.re:
            return ("-" if self.im < 0 else "") + im + "i"
        return f"{self.re}{'-' if self.im < 0 else '+'}{im}i"

    def __repr__(self):
        return f"Scalar({str(self)!r})"


def _mk(re: Fraction, im: Fraction) -> Scalar:
    # both parts must already be Fractions
    x = object.__new__(Scalar)
    x.re = re
    x.im = im
    return x


ZERO = Scalar(0)
ONE = Scalar(1)
I = Scalar(0, 1)


Monomial = Tuple[int, int]  # (power of t, power of tbar)


class ParamExpr:
    """A polynomial in ``t`` and ``tbar`` with :class:`Scalar` coefficients.

    Stored as a mapping ``(a, b) -> c`` meaning ``c * t**a * tbar**b``;
    zero coefficients are never stored.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Monomial, Number] | None = None):
        clean = {}
        for mono, c in (terms or {}).items():
            c = Scalar.coerce(c)
            if c:
                clean[mono] = c
        self.terms = dict(sorted(clean.items()))

    def __reduce__(self):
        return (ParamExpr, (self.terms,))

    @classmethod
    def const(cls, c: Number) -> "ParamExpr":
        return cls({(0, 0): c})

    @classmethod
    def t(cls) -> "ParamExpr":
        return cls({(1, 0): 1})

    @classmethod
    def tbar(cls) -> "ParamExpr":
        return cls({(0, 1): 1})

    def __add__(self, other):
        other = _as_param(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, ZERO) + c
        return ParamExpr(out)

    __radd__ = __add__

    def __neg__(self):
        return ParamExpr({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_param(other))

    def __rsub__(self, other):
        return _as_param(other) - self

    def __mul__(self, other):
        other = _as_param(other)
        out: Dict[Monomial, Scalar] = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                key = (a1 + a2, b1 + b2)
                out[key] = out.get(key, ZERO) + c1 * c2
        return ParamExpr(out)

    __rmul__ = __mul__

    def conj(self) -> "ParamExpr":
        return ParamExpr({(b, a): c.conj() for (a, b), c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == (0, 0) for m in self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, ParamExpr):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction, Scalar)):
            return self == ParamExpr.const(other)
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def evaluate(self, value: Number) -> Scalar:
        """Substitute ``t <- value`` and ``tbar <- conj(value)``."""
        v = Scalar.coerce(value)
        vb = v.conj()
        total = ZERO
        for (a, b), c in self.terms.items():
            term = c
            for _ in range(a):
                term = term * v
            for _ in range(b):
                term = term * vb
            total = total + term
        return total

    def __repr__(self):
        return f"ParamExpr({self.terms!r})"


def _as_param(x) -> ParamExpr:
    if isinstance(x, ParamExpr):
        return x
    return ParamExpr.const(x)


def eval_param(e: ParamExpr, v: Number) -> Scalar:
    return e.evaluate(v)
