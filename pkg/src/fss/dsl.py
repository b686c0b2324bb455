"""Reader and writer for ``.fss`` structure-equation files.

A file looks like::

    fss 1
    param t;
    weight u;
    gen phi1 : (1,0) conj phibar1;
    gen phibar1 : (0,1) conj phi1;
    d phi1 = 0;
    d u = u^phibar1 - u^phi1;

See ``docs/format.md`` for the full grammar.  Parsing returns a
:class:`~fss.bicomplex.StructurePresentation` in canonical form (like terms
combined, monomials sorted into declaration order), so
``parse(roundtrip(p)) == p``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

from .bicomplex import DEFAULT_WEIGHT_CUTOFF, DTerm, GeneratorDecl, StructurePresentation
from .scalars import ONE, ParamExpr, Scalar, ScalarParseError

__all__ = ["ParseDiagnostic", "ParseError", "SourceFile", "parse", "parse_file", "roundtrip", "FORMAT_VERSION"]

FORMAT_VERSION = 1
KEYWORDS = {"fss", "param", "weight", "gen", "d", "conj", "window", "i"}


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str
    message: str
    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostics: List[ParseDiagnostic], path: str = ""):
        self.diagnostics = diagnostics
        self.path = path
        prefix = f"{path}:" if path else ""
        super().__init__("\n".join(prefix + str(d) for d in diagnostics))


class SourceFile:
    """Source text with a line/column map."""

    def __init__(self, text: Union[str, bytes], path: str = "<string>"):
        self.path = path
        self.decode_error: Optional[ParseDiagnostic] = None
        if isinstance(text, bytes):
            try:
                text = text.decode("utf-8")
            except UnicodeDecodeError as exc:
                line = text.count(b"\n", 0, exc.start) + 1
                col = exc.start - (text.rfind(b"\n", 0, exc.start) + 1) + 1
                self.decode_error = ParseDiagnostic("error", "file is not valid UTF-8", line, col)
                text = text.decode("utf-8", errors="replace")
        self.text = text
        self._starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def location(self, offset: int) -> Tuple[int, int]:
        lo, hi = 0, len(self._starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, offset - self._starts[lo] + 1


# --------------------------------------------------------------------------
# lexer
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+(?:/\d+)?i?(?![A-Za-z0-9_]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[;:(),=+\-^*/])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # num | ident | punct | eof
    text: str
    offset: int


class _Fail(Exception):
    def __init__(self, message: str, offset: int):
        self.message = message
        self.offset = offset


def _tokenize(text: str) -> List[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise _Fail(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), pos))
        pos = m.end()
    out.append(Token("eof", "", len(text)))
    return out


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


class _Parser:
    def __init__(self, src: SourceFile):
        self.src = src
        self.diags: List[ParseDiagnostic] = []
        self.toks: List[Token] = []
        self.i = 0
        self.params: List[str] = []
        self.gens: List[GeneratorDecl] = []
        self.gen_offsets: Dict[str, int] = {}
        self.partner_refs: Dict[str, Tuple[str, int]] = {}
        self.weight_symbol: Optional[str] = None
        self.cutoff = DEFAULT_WEIGHT_CUTOFF
        self.raw_rules: Dict[str, Tuple[int, List[Tuple[ParamExpr, List[Tuple[str, int]], int]]]] = {}

    def error(self, message: str, offset: int):
        line, col = self.src.location(offset)
        self.diags.append(ParseDiagnostic("error", message, line, col))

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.tok
        if t.text != text or t.kind == "eof":
            raise _Fail(f"expected {text!r}, found {t.text or 'end of file'!r}", t.offset)
        return self.advance()

    def expect_ident(self, what: str) -> Token:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            raise _Fail(f"expected {what}, found {t.text or 'end of file'!r}", t.offset)
        return self.advance()

    def expect_int(self) -> int:
        t = self.tok
        sign = 1
        if t.text == "-":
            self.advance()
            sign = -1
            t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            raise _Fail(f"expected an integer, found {t.text or 'end of file'!r}", t.offset)
        self.advance()
        return sign * int(t.text)

    def skip_statement(self):
        while self.tok.kind != "eof" and self.tok.text != ";":
            self.advance()
        if self.tok.text == ";":
            self.advance()

    # top level

    def run(self) -> Optional[StructurePresentation]:
        if self.src.decode_error is not None:
            self.diags.append(self.src.decode_error)
            return None
        try:
            self.toks = _tokenize(self.src.text)
        except _Fail as f:
            self.error(f.message, f.offset)
            return None
        first = True
        while self.tok.kind != "eof":
            start = self.i
            try:
                self.statement(first)
            except _Fail as f:
                self.error(f.message, f.offset)
                if self.i == start:
                    self.advance()
                self.skip_statement()
            first = False
        self.check_partners()
        rules = self.finish_rules()
        if self.diags:
            return None
        # weight symbol always sits after the odd generators
        gens = [g for g in self.gens if g.degree == 1] + [g for g in self.gens if g.degree == 0]
        return StructurePresentation(
            generators=tuple(gens),
            d_rules=rules,
            params=tuple(self.params),
            weight_symbol=self.weight_symbol,
            weight_cutoff=self.cutoff,
        )

    def statement(self, first: bool):
        t = self.tok
        if t.kind != "ident":
            raise _Fail(f"expected a statement, found {t.text!r}", t.offset)
        kw = t.text
        if kw == "fss":
            self.advance()
            if not first:
                raise _Fail("version header must come first", t.offset)
            num = self.tok
            version = self.expect_int()
            if version != FORMAT_VERSION:
                raise _Fail(f"unsupported format version {version}", num.offset)
            if self.tok.text == ";":
                self.advance()
            return
        if kw == "param":
            self.advance()
            name = self.expect_ident("a parameter name")
            self.declare(name)
            if self.params:
                raise _Fail("only one parameter is supported", name.offset)
            self.params.append(name.text)
        elif kw == "weight":
            self.advance()
            name = self.expect_ident("a weight symbol name")
            self.declare(name)
            if self.weight_symbol is not None:
                raise _Fail("only one weight symbol is supported", name.offset)
            self.weight_symbol = name.text
            self.gens.append(GeneratorDecl(name.text, (0, 0), 1, name.text))
            self.gen_offsets[name.text] = name.offset
        elif kw == "window":
            self.advance()
            off = self.tok.offset
            w = self.expect_int()
            if w < 0:
                raise _Fail("weight window must be non-negative", off)
            self.cutoff = w
        elif kw == "gen":
            self.gen_statement()
        elif kw == "d":
            self.d_statement()
        else:
            raise _Fail(f"unknown keyword {kw!r}", t.offset)
        self.expect(";")

    def declare(self, name: Token):
        if name.text in self.params or name.text in self.gen_offsets:
            raise _Fail(f"duplicate declaration of {name.text!r}", name.offset)

    def gen_statement(self):
        self.advance()
        name = self.expect_ident("a generator name")
        self.declare(name)
        self.expect(":")
        bd_tok = self.expect("(")
        p = self.expect_int()
        self.expect(",")
        q = self.expect_int()
        self.expect(")")
        if (p, q) not in ((1, 0), (0, 1)):
            raise _Fail(f"generator bidegree must be (1,0) or (0,1), got ({p},{q})", bd_tok.offset)
        partner = None
        if self.tok.text == "conj" and self.tok.kind == "ident":
            self.advance()
            ptok = self.expect_ident("a conjugate partner name")
            partner = ptok.text
            self.partner_refs[name.text] = (partner, ptok.offset)
        self.gens.append(GeneratorDecl(name.text, (p, q), 0, partner))
        self.gen_offsets[name.text] = name.offset

    def check_partners(self):
        by_name = {g.name: g for g in self.gens}
        for name, (partner, off) in self.partner_refs.items():
            g = by_name[name]
            other = by_name.get(partner)
            if other is None:
                self.error(f"unknown identifier {partner!r}", off)
                continue
            if other.weight:
                self.error(f"{partner!r} is the weight symbol, not a generator", off)
                continue
            if other.bidegree != (g.bidegree[1], g.bidegree[0]):
                self.error(f"conjugate partner {partner!r} must have bidegree ({g.bidegree[1]},{g.bidegree[0]})", off)
                continue
            if other.conj_partner is not None and other.conj_partner != name:
                self.error(f"conjugation is not an involution: {partner!r} pairs with {other.conj_partner!r}", off)

    def d_statement(self):
        self.advance()
        name = self.tok
        if name.kind != "ident" or name.text in KEYWORDS:
            raise _Fail(f"expected a generator name, found {name.text or 'end of file'!r}", name.offset)
        self.advance()
        if name.text not in self.gen_offsets:
            raise _Fail(f"unknown identifier {name.text!r}", name.offset)
        if name.text in self.raw_rules:
            raise _Fail(f"duplicate declaration of d {name.text}", name.offset)
        self.expect("=")
        terms = self.expression()
        self.raw_rules[name.text] = (name.offset, terms)

    def expression(self):
        terms = []
        if self.tok.kind == "num" and self.tok.text == "0":
            nxt = self.toks[self.i + 1]
            if nxt.text == ";":
                self.advance()
                return terms
        sign = ONE
        if self.tok.text in "+-" and self.tok.kind == "punct":
            sign = -ONE if self.advance().text == "-" else ONE
        while True:
            terms.append(self.term(sign))
            if self.tok.kind == "punct" and self.tok.text in ("+", "-"):
                sign = -ONE if self.advance().text == "-" else ONE
                continue
            break
        return terms

    def term(self, sign: Scalar):
        coeff = ParamExpr.const(sign)
        start = self.tok.offset
        factors: List[Tuple[str, int]] = []
        while True:
            t = self.tok
            if t.kind == "num":
                self.advance()
                coeff = coeff * self.number(t)
            elif t.text == "(" and t.kind == "punct":
                self.advance()
                parts = []
                while self.tok.text != ")":
                    if self.tok.kind == "eof":
                        raise _Fail("unterminated complex literal", t.offset)
                    parts.append(self.advance().text)
                self.advance()
                try:
                    coeff = coeff * Scalar.parse("".join(parts))
                except ScalarParseError:
                    raise _Fail(f"bad complex literal ({''.join(parts)})", t.offset)
            elif t.kind == "ident" and t.text == "i":
                self.advance()
                coeff = coeff * Scalar(0, 1)
            elif t.kind == "ident" and t.text == "conj":
                self.advance()
                self.expect("(")
                p = self.expect_ident("a parameter name")
                if p.text not in self.params:
                    raise _Fail(f"unknown identifier {p.text!r}", p.offset)
                self.expect(")")
                coeff = coeff * ParamExpr.tbar()
            elif t.kind == "ident" and t.text in self.params:
                self.advance()
                coeff = coeff * ParamExpr.t()
            elif t.kind == "ident" and t.text not in KEYWORDS:
                factors = self.monomial()
                break
            elif t.text == "*" and t.kind == "punct":
                self.advance()
            else:
                break
            if self.tok.text == "*" and self.tok.kind == "punct":
                self.advance()
        if not factors and coeff == ParamExpr.const(sign) and self.tok.offset == start:
            raise _Fail(f"expected a term, found {self.tok.text or 'end of file'!r}", self.tok.offset)
        return coeff, factors, start

    def number(self, t: Token) -> Scalar:
        text = t.text
        try:
            return Scalar.parse(text)
        except (ScalarParseError, ZeroDivisionError):
            raise _Fail(f"bad number {text!r}", t.offset)

    def monomial(self) -> List[Tuple[str, int]]:
        out = []
        while True:
            t = self.tok
            if t.kind != "ident" or t.text in KEYWORDS:
                raise _Fail(f"expected a generator name, found {t.text or 'end of file'!r}", t.offset)
            if t.text not in self.gen_offsets:
                raise _Fail(f"unknown identifier {t.text!r}", t.offset)
            self.advance()
            out.append((t.text, t.offset))
            if self.tok.text == "^" and self.tok.kind == "punct":
                self.advance()
                continue
            return out

    def finish_rules(self) -> Dict[str, Tuple[DTerm, ...]]:
        by_name = {g.name: g for g in self.gens}
        order = {g.name: i for i, g in enumerate(g for g in self.gens if g.degree == 1)}
        rules: Dict[str, Tuple[DTerm, ...]] = {}
        for gname, (goff, terms) in self.raw_rules.items():
            g = by_name[gname]
            allowed = {(g.bidegree[0] + 1, g.bidegree[1]), (g.bidegree[0], g.bidegree[1] + 1)}
            combined: Dict[Tuple[int, Tuple[str, ...]], ParamExpr] = {}
            ok = True
            for coeff, factors, off in terms:
                weight = sum(1 for n, _ in factors if n == self.weight_symbol)
                odd = [(n, o) for n, o in factors if n != self.weight_symbol]
                seen = set()
                for n, o in odd:
                    if n in seen:
                        self.error("monomial vanishes: repeated generator " + repr(n), o)
                        ok = False
                    seen.add(n)
                if not ok:
                    continue
                p = sum(by_name[n].bidegree[0] for n, _ in odd)
                q = sum(by_name[n].bidegree[1] for n, _ in odd)
                if (p, q) not in allowed:
                    self.error(
                        f"bidegree mismatch: term has bidegree ({p},{q}) but d {gname} must land in "
                        + " or ".join(f"({a},{b})" for a, b in sorted(allowed)),
                        off,
                    )
                    ok = False
                    continue
                if weight < g.weight:
                    self.error(f"weight-lowering rule: term of weight {weight} in d {gname}", off)
                    ok = False
                    continue
                names = [n for n, _ in odd]
                idx = [order[n] for n in names]
                sign = _perm_sign(idx)
                key = (weight, tuple(sorted(names, key=order.__getitem__)))
                c = coeff if sign > 0 else -coeff
                combined[key] = combined.get(key, ParamExpr()) + c
            if not ok:
                continue
            dterms = tuple(
                DTerm(c, w, mono)
                for (w, mono), c in sorted(combined.items(), key=lambda kv: (tuple(order[n] for n in kv[0][1]), kv[0][0]))
                if not c.is_zero()
            )
            if dterms:
                rules[gname] = dterms
        return rules


def _perm_sign(idx: List[int]) -> int:
    sign = 1
    seq = list(idx)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def parse(src: Union[SourceFile, str, bytes], path: str = "<string>") -> StructurePresentation:
    """Parse ``.fss`` text; raises :class:`ParseError` with located diagnostics."""
    if not isinstance(src, SourceFile):
        src = SourceFile(src, path)
    parser = _Parser(src)
    try:
        pres = parser.run()
    except RecursionError:  # pragma: no cover - grammar is not recursive
        parser.error("input too deeply nested", 0)
        pres = None
    if pres is None:
        raise ParseError(parser.diags or [ParseDiagnostic("error", "parse failed", 1, 1)], src.path)
    return pres


def parse_file(path: str) -> StructurePresentation:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse(SourceFile(data, path))


# --------------------------------------------------------------------------
# printer
# --------------------------------------------------------------------------


def _scalar_text(c: Scalar) -> Tuple[str, str]:
    """Split a coefficient into a sign and a literal that re-lexes to ``|c|``."""
    if c.re and c.im:
        inner = str(c.re) + ("-" if c.im < 0 else "+") + f"{abs(c.im)}i"
        return "+", f"({inner})"
    if c.im:
        return ("-" if c.im < 0 else "+"), f"{abs(c.im)}i"
    return ("-" if c.re < 0 else "+"), str(abs(c.re))


def _term_text(c: Scalar, a: int, b: int, weight: int, mono: Tuple[str, ...], pres: StructurePresentation):
    sign, lit = _scalar_text(c)
    words = []
    if lit != "1":
        words.append(lit)
    t = pres.params[0] if pres.params else "t"
    words += [t] * a + [f"conj({t})"] * b
    factors = [pres.weight_symbol] * weight + list(mono)
    words.append("^".join(factors))
    return sign, " ".join(words)


def roundtrip(pres: StructurePresentation) -> str:
    """Canonical ``.fss`` text for a presentation."""
    lines = [f"fss {FORMAT_VERSION}"]
    for p in pres.params:
        lines.append(f"param {p};")
    if pres.weight_symbol is not None:
        lines.append(f"weight {pres.weight_symbol};")
    if pres.weight_cutoff != DEFAULT_WEIGHT_CUTOFF:
        lines.append(f"window {pres.weight_cutoff};")
    for g in pres.generators:
        if g.degree == 0:
            continue
        decl = f"gen {g.name} : ({g.bidegree[0]},{g.bidegree[1]})"
        if g.conj_partner is not None:
            decl += f" conj {g.conj_partner}"
        lines.append(decl + ";")
    for g in pres.generators:
        terms = pres.rule(g.name)
        if not terms:
            continue
        parts = []
        for term in terms:
            for (a, b), c in term.coeff.terms.items():
                parts.append(_term_text(c, a, b, term.weight, term.monomial, pres))
        text = ""
        for k, (sign, body) in enumerate(parts):
            if k == 0:
                text = ("- " if sign == "-" else "") + body
            else:
                text += f" {sign} {body}"
        lines.append(f"d {g.name} = {text};")
    return "\n".join(lines) + "\n"
