"""Formal rational combinations of spanning terms ``s_v u_g s_w*``.

Products follow the closed rule

    (s_v u_g s_w*)(s_y u_h s_z*) =
        s_{v(g.y')} u_{g|_{y'} h} s_z*              if y = w y'
        s_v u_{g h|_{h^-1.w'}} s_{z(h^-1.w')}*      if w = y w'
        0                                            otherwise

and group entries are replaced by fixed class representatives so that
equal terms collide in the coefficient dictionary.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from selfsim.action import (
    ActionBackend,
    GroupElement,
    SelfSimError,
    act_and_restrict,
    act_word,
    canonical,
    compose,
    invert,
    restrict_word,
)


class ParseError(SelfSimError, ValueError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class CuntzOnly(SelfSimError):
    """A Cuntz-quotient rewrite was fed to a Toeplitz-level evaluation."""


@dataclass(frozen=True)
class SpanningTerm:
    v: tuple
    g: GroupElement
    w: tuple

    @property
    def degree(self) -> int:
        return len(self.v) - len(self.w)

    def format(self) -> str:
        alphabet = self.g.backend.alphabet
        parts = []
        if self.v:
            parts.append(f"s[{alphabet.format_word(self.v)}]")
        if self.g.factors or not (self.v or self.w):
            parts.append(f"u[{self.g.name}]")
        if self.w:
            parts.append(f"s*[{alphabet.format_word(self.w)}]")
        return " ".join(parts)

    def __str__(self):
        return self.format()


def term(v, g: GroupElement, w=()) -> SpanningTerm:
    alphabet = g.backend.alphabet
    return SpanningTerm(alphabet.check_word(v), canonical(g), alphabet.check_word(w))


def unit_term(backend: ActionBackend) -> SpanningTerm:
    return SpanningTerm((), backend.identity, ())


def gauge_degree(t: SpanningTerm) -> int:
    return t.degree


def multiply_terms(a: SpanningTerm, b: SpanningTerm):
    """Product of two spanning terms: a term, or ``None`` for zero."""
    v, g, w = a.v, a.g, a.w
    y, h, z = b.v, b.g, b.w
    if g.backend is not h.backend:
        raise SelfSimError("terms belong to different actions")
    if y[: len(w)] == w:
        rest = y[len(w):]
        image, r = act_and_restrict(g, rest)
        return term(v + image, compose(r, h), z)
    if w[: len(y)] == y:
        rest = w[len(y):]
        moved = act_word(invert(h), rest)
        return term(v, compose(g, restrict_word(h, moved)), z + moved)
    return None


class FormalCombination:
    """Finitely supported map ``SpanningTerm -> Fraction``.

    ``cuntz`` marks combinations produced by rewrites valid only in the
    Cuntz-Pimsner quotient.
    """

    __slots__ = ("backend", "terms", "cuntz")

    def __init__(self, backend: ActionBackend, terms=None, cuntz: bool = False):
        self.backend = backend
        self.terms: dict = {}
        self.cuntz = cuntz
        if terms:
            for t, c in (terms.items() if isinstance(terms, dict) else terms):
                self._add(t, Fraction(c))

    def _add(self, t, c):
        if c == 0:
            return
        total = self.terms.get(t, 0) + c
        if total:
            self.terms[t] = total
        else:
            self.terms.pop(t, None)

    @classmethod
    def of(cls, t: SpanningTerm, coeff=1):
        return cls(t.g.backend, {t: coeff})

    @classmethod
    def unit(cls, backend):
        return cls(backend, {unit_term(backend): 1})

    @classmethod
    def zero(cls, backend):
        return cls(backend)

    def items(self):
        return self.terms.items()

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def _combine(self, other, sign):
        result = FormalCombination(self.backend, self.terms, self.cuntz or other.cuntz)
        for t, c in other.terms.items():
            result._add(t, sign * c)
        return result

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        return FormalCombination(self.backend, {t: c * x for t, x in self.terms.items()}, self.cuntz)

    def __mul__(self, other):
        if isinstance(other, FormalCombination):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, FormalCombination):
            return NotImplemented
        return self.backend is other.backend and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def format(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for t, c in sorted(self.terms.items(), key=lambda kv: _term_sort_key(kv[0])):
            body = t.format()
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            text = body if mag == 1 else f"{mag}*{body}"
            pieces.append((sign, text))
        out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, text in pieces[1:]:
            out += f" {sign} {text}"
        return out

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"FormalCombination({self.format()!r})"


def _term_sort_key(t: SpanningTerm):
    return (len(t.v), t.v, len(t.w), t.w, len(t.g.factors), t.g.name)


def multiply(a: FormalCombination, b: FormalCombination) -> FormalCombination:
    result = FormalCombination(a.backend, cuntz=a.cuntz or b.cuntz)
    for t1, c1 in a.terms.items():
        for t2, c2 in b.terms.items():
            t = multiply_terms(t1, t2)
            if t is not None:
                result._add(t, c1 * c2)
    return result


def adjoint(a: FormalCombination) -> FormalCombination:
    # rational coefficients are their own conjugates
    return FormalCombination(
        a.backend, {term(t.w, invert(t.g), t.v): c for t, c in a.terms.items()}, a.cuntz
    )


def apply_gauge(a: FormalCombination, r) -> FormalCombination:
    """``sigma_{i beta}`` with ``r = e^{-beta}``: scale each term by ``r^{|v|-|w|}``."""
    r = Fraction(r)
    return FormalCombination(a.backend, {t: c * r ** t.degree for t, c in a.terms.items()}, a.cuntz)


def expand_to_depth(a: FormalCombination, n: int) -> FormalCombination:
    """Insert ``sum_{y in X^n} s_y s_y* = 1`` after each group entry.

    Valid only in the Cuntz-Pimsner quotient; the result is marked so.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    alphabet = a.backend.alphabet
    result = FormalCombination(a.backend, cuntz=True)
    for t, c in a.terms.items():
        for y in alphabet.words(n):
            image, r = act_and_restrict(t.g, y)
            result._add(term(t.v + image, r, t.w + tuple(y)), c)
    return result


def s(backend, word) -> FormalCombination:
    return FormalCombination.of(term(word, backend.identity, ()))


def s_star(backend, word) -> FormalCombination:
    return FormalCombination.of(term((), backend.identity, word))


def u(g: GroupElement) -> FormalCombination:
    return FormalCombination.of(term((), g, ()))


# parsing ------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, backend: ActionBackend):
        self.text = text
        self.pos = 0
        self.backend = backend
        self.gens = dict(backend.generators())
        self.gens.setdefault("e", backend.identity)
        self.gen_names = sorted(self.gens, key=len, reverse=True)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, s):
        self.skip()
        return self.text.startswith(s, self.pos)

    def expect(self, s):
        if not self.peek(s):
            raise ParseError(f"expected {s!r}", self.pos)
        self.pos += len(s)

    def at_end(self):
        self.skip()
        return self.pos >= len(self.text)

    def bracket_body(self):
        start = self.pos
        end = self.text.find("]", start)
        if end < 0:
            raise ParseError("unclosed '['", start)
        self.pos = end + 1
        return self.text[start:end], start

    def word(self):
        body, start = self.bracket_body()
        try:
            return self.backend.alphabet.parse_word(body)
        except SelfSimError as exc:
            raise ParseError(str(exc), start) from None

    def gword(self, text, offset=0):
        factors = []
        pos = 0
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            if text[pos] == "(":
                end = text.find(")", pos)
                if end < 0:
                    raise ParseError("unclosed '('", offset + pos)
                try:
                    g = self.backend.parse_vector(text[pos:end + 1])
                except SelfSimError as exc:
                    raise ParseError(str(exc), offset + pos) from None
                pos = end + 1
            else:
                for name in self.gen_names:
                    if text.startswith(name, pos):
                        g = self.gens[name]
                        pos += len(name)
                        break
                else:
                    raise ParseError(f"unknown generator in {text!r}", offset + pos)
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if text.startswith("^-1", pos):
                g = invert(g)
                pos += 3
            factors.append(g)
        result = self.backend.identity
        for g in factors:
            result = compose(result, g)
        return result

    def rational(self):
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isdigit() or self.text[self.pos] in "/"):
            self.pos += 1
        token = self.text[start:self.pos]
        try:
            return Fraction(token)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad rational {token!r}", start) from None

    def factor(self):
        self.skip()
        if self.text.startswith("s*[", self.pos):
            self.pos += 3
            return s_star(self.backend, self.word())
        if self.text.startswith("s[", self.pos):
            self.pos += 2
            return s(self.backend, self.word())
        if self.text.startswith("u[", self.pos):
            self.pos += 2
            body, start = self.bracket_body()
            return u(self.gword(body, start))
        raise ParseError("expected s[...], s*[...] or u[...]", self.pos)

    def term(self):
        self.skip()
        coeff = Fraction(1)
        if self.pos < len(self.text) and self.text[self.pos].isdigit():
            coeff = self.rational()
            self.expect("*")
        result = self.factor()
        while not self.at_end() and self.text[self.pos] not in "+-":
            result = multiply(result, self.factor())
        return result.scale(coeff)

    def combination(self):
        sign = 1
        if self.peek("-"):
            self.pos += 1
            sign = -1
        elif self.peek("+"):
            self.pos += 1
        total = self.term().scale(sign)
        while not self.at_end():
            if self.peek("+"):
                self.pos += 1
                total = total + self.term()
            elif self.peek("-"):
                self.pos += 1
                total = total - self.term()
            else:
                raise ParseError("expected '+' or '-'", self.pos)
        return total


def parse_combination(text: str, backend: ActionBackend) -> FormalCombination:
    """Parse the term grammar, e.g. ``"2/3*s[x] u[a b^-1] s*[y] - u[e]"``."""
    parser = _Parser(text, backend)
    if parser.at_end():
        raise ParseError("empty expression", 0)
    return parser.combination()


parse_term = parse_combination


def parse_element(text: str, backend: ActionBackend) -> GroupElement:
    """Parse a group word such as ``"a b^-1 a"`` or ``"cadac"``."""
    parser = _Parser(text, backend)
    if not text.strip():
        raise ParseError("empty element expression", 0)
    return parser.gword(text)


def combination_from_terms(backend, pairs: Iterable) -> FormalCombination:
    return FormalCombination(backend, list(pairs))
