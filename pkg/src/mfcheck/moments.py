"""Exact moments of affine expressions in independent random atoms.

Atoms are ``U`` (uniform on (0,1)), ``X`` (gamma with shape 1 and rate 1)
and ``M`` (gamma with rate 1 whose shape is itself uniform on (0,1)).  An
expression is a sum of terms, each a rational coefficient times a product of
distinct atoms.  Terms must not share atoms; that keeps every mixed moment a
product of single-atom moments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from math import factorial
from typing import Iterator, Sequence

from .exact import Fraction, as_fraction
from .special import stirling1


class Kind(str, Enum):
    UNIFORM = "U"
    EXPGAMMA = "X"
    MIXTURE = "M"


@dataclass(frozen=True, order=True)
class Atom:
    kind: Kind
    id: int

    def __post_init__(self):
        if self.id < 1:
            raise ValueError(f"atom ids are positive integers, got {self.id}")

    def __str__(self):
        return f"{self.kind.value}{self.id}"


@dataclass(frozen=True)
class Term:
    coefficient: Fraction
    atoms: frozenset = field(default_factory=frozenset)

    def is_constant(self) -> bool:
        return not self.atoms

    def __str__(self):
        names = "*".join(str(a) for a in sorted(self.atoms))
        if not names:
            return str(self.coefficient)
        if self.coefficient == 1:
            return names
        if self.coefficient == -1:
            return f"-{names}"
        return f"{self.coefficient}*{names}"


class ExpressionError(ValueError):
    """Base class for rejected expressions."""


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}: {text!r}")


class ExactnessError(ExpressionError):
    """An atom occurs in more than one term (or twice in one term)."""

    def __init__(self, atom: Atom, message: str | None = None):
        self.atom = atom
        super().__init__(message or f"atom {atom} appears in more than one term")


@dataclass(frozen=True)
class RVExpression:
    terms: tuple

    def __post_init__(self):
        seen: set = set()
        for term in self.terms:
            for atom in term.atoms:
                if atom in seen:
                    raise ExactnessError(atom)
                seen.add(atom)

    @classmethod
    def of(cls, *terms: Term) -> "RVExpression":
        return cls(tuple(terms))

    @property
    def atoms(self) -> list:
        return sorted(a for t in self.terms for a in t.atoms)

    def __str__(self):
        if not self.terms:
            return "0"
        out = str(self.terms[0])
        for t in self.terms[1:]:
            s = str(t)
            out += f" - {s[1:]}" if s.startswith("-") else f" + {s}"
        return out


def uniform_sum(k: int, shift=0) -> RVExpression:
    """``U1 + ... + Uk (+ shift)``."""
    terms = [Term(Fraction(1), frozenset({Atom(Kind.UNIFORM, i)})) for i in range(1, k + 1)]
    if shift:
        terms.append(Term(as_fraction(shift)))
    return RVExpression(tuple(terms))


def linear_combination(kind: Kind, coefficients: Sequence, shift=0) -> RVExpression:
    """``c1*A1 + c2*A2 + ... (+ shift)`` for atoms of a single kind."""
    terms = [Term(as_fraction(c), frozenset({Atom(kind, i)})) for i, c in enumerate(coefficients, 1)]
    if shift:
        terms.append(Term(as_fraction(shift)))
    return RVExpression(tuple(terms))


# --- parsing ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<atom>[UXM])(?P<id>\d+)|(?P<op>[+\-*]))")


def _tokenize(text: str) -> list[tuple[str, object, int]]:
    tokens, pos = [], 0
    stripped_end = len(text.rstrip())
    while pos < stripped_end:
        m = _TOKEN.match(text, pos)
        if not m:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(f"unexpected character {text[bad]!r}", text, bad)
        start = m.end() - len(m.group(0).lstrip())
        if m.group("num"):
            num = m.group("num")
            if num.endswith("/0"):
                raise ExpressionSyntaxError("zero denominator", text, start)
            tokens.append(("num", Fraction(num), start))
        elif m.group("atom"):
            ident = int(m.group("id"))
            if ident < 1:
                raise ExpressionSyntaxError("atom ids start at 1", text, start)
            tokens.append(("atom", Atom(Kind(m.group("atom")), ident), start))
        else:
            tokens.append(("op", m.group("op"), start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


def parse_expression(text: str) -> RVExpression:
    """Parse e.g. ``"X1 + 2*X2 + 3*X3 - 3"`` or ``"1/2*U1*X1 + U2"``.

    Constants are collected into a single trailing constant term.
    """
    tokens = _tokenize(text)
    i = 0
    terms: list[Term] = []
    constant = Fraction(0)
    saw_constant = False

    def peek():
        return tokens[i]

    sign = 1
    if peek()[:2] in (("op", "-"), ("op", "+")):
        sign = -1 if peek()[1] == "-" else 1
        i += 1
    while True:
        kind, value, pos = peek()
        coeff = Fraction(1)
        atoms: list[Atom] = []
        if kind == "num":
            coeff = value
            i += 1
            if peek()[:2] == ("op", "*"):
                i += 1
                kind, value, pos = peek()
                if kind != "atom":
                    raise ExpressionSyntaxError("expected an atom after '*'", text, pos)
            else:
                constant += sign * coeff
                saw_constant = True
                kind = None
        elif kind != "atom":
            raise ExpressionSyntaxError("expected a number or an atom", text, pos)
        if kind == "atom":
            while True:
                kind, value, pos = peek()
                if kind != "atom":
                    raise ExpressionSyntaxError("expected an atom", text, pos)
                if value in atoms:
                    raise ExactnessError(value, f"atom {value} appears twice in one term (position {pos})")
                atoms.append(value)
                i += 1
                if peek()[:2] == ("op", "*"):
                    i += 1
                    continue
                break
            terms.append(Term(sign * coeff, frozenset(atoms)))
        kind, value, pos = peek()
        if kind == "end":
            break
        if kind == "op" and value in "+-":
            sign = 1 if value == "+" else -1
            i += 1
            continue
        raise ExpressionSyntaxError(f"unexpected {value!r}", text, pos)
    if saw_constant:
        terms.append(Term(constant))
    return RVExpression(tuple(terms))


# --- moments ------------------------------------------------------------------

def atom_moment(kind: Kind, m: int) -> Fraction:
    """``E[A**m]`` for a single atom of the given kind."""
    if m < 0:
        raise ValueError("moment order must be >= 0")
    kind = Kind(kind)
    if kind is Kind.UNIFORM:
        return Fraction(1, m + 1)
    if kind is Kind.EXPGAMMA:
        return Fraction(factorial(m))
    # integral over u in (0,1) of the rising factorial u(u+1)...(u+m-1)
    return sum((abs(stirling1(m, l)) / (l + 1) for l in range(m + 1)), Fraction(0))


def weak_compositions(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ``(l_1, ..., l_parts)`` with ``l_i >= 0`` summing to n, lexicographic."""
    if parts == 0:
        if n == 0:
            yield ()
        return
    if parts == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in weak_compositions(n - first, parts - 1):
            yield (first,) + rest


def _term_moments(term: Term, n: int) -> list[Fraction]:
    """``E[(c * A1 * A2 ...)**l]`` for l = 0..n."""
    out = []
    for l in range(n + 1):
        value = term.coefficient**l
        for atom in term.atoms:
            if value == 0:
                break
            value *= atom_moment(atom.kind, l)
        out.append(value)
    return out


def moment(expr: RVExpression, n: int) -> Fraction:
    """Exact ``E[expr**n]`` by multinomial expansion over the terms."""
    if n < 0:
        raise ValueError("moment order must be >= 0")
    if n == 0:
        return Fraction(1)
    if not expr.terms:
        return Fraction(0)
    table = [_term_moments(t, n) for t in expr.terms]
    facts = [factorial(i) for i in range(n + 1)]
    total = Fraction(0)
    for comp in weak_compositions(n, len(table)):
        mult = facts[n]
        for l in comp:
            mult //= facts[l]
        prod = Fraction(mult)
        for row, l in zip(table, comp):
            prod *= row[l]
            if not prod:
                break
        total += prod
    return total
