"""Sparse multivariate polynomials over Q and their reductions mod l.

Variables are drawn from the fixed universe x1..x9, s, t, T, y; term order is
graded lexicographic with y least significant, so fibers read off naturally as
y-polynomials.  Parsing and canonical printing round-trip exactly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce as _reduce
from typing import Iterable, Optional

from .errors import BadPrime, PolySyntaxError
from .gf import Field

UNIVERSE = ("x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9", "s", "t", "T", "y")
_UNIVERSE_INDEX = {name: i for i, name in enumerate(UNIVERSE)}
TORUS_VARS = frozenset(UNIVERSE[:9])


def _normalize(variables: Iterable[str], terms: dict[tuple[int, ...], Fraction]) -> "MPolyQ":
    """Drop zero coefficients and unused variables; order vars canonically."""
    variables = tuple(variables)
    terms = {e: c for e, c in terms.items() if c != 0}
    used = [i for i in range(len(variables)) if any(e[i] for e in terms)]
    new_vars = tuple(variables[i] for i in used)
    order = sorted(range(len(new_vars)), key=lambda i: _UNIVERSE_INDEX[new_vars[i]])
    new_vars = tuple(new_vars[i] for i in order)
    remap = {}
    for e, c in terms.items():
        key = tuple(e[used[i]] for i in order)
        remap[key] = remap.get(key, Fraction(0)) + c
    remap = {e: c for e, c in remap.items() if c != 0}
    p = object.__new__(MPolyQ)
    object.__setattr__(p, "variables", new_vars)
    object.__setattr__(p, "terms", remap)
    return p


@dataclass(frozen=True)
class MPolyQ:
    """variables: ordered subset of the universe; terms: exponent tuple -> Fraction."""

    variables: tuple[str, ...]
    terms: dict[tuple[int, ...], Fraction]

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def const(c) -> "MPolyQ":
        c = Fraction(c)
        return _normalize((), {(): c} if c else {})

    @staticmethod
    def var(name: str) -> "MPolyQ":
        if name not in _UNIVERSE_INDEX:
            raise ValueError(f"unknown variable {name!r}")
        return _normalize((name,), {(1,): Fraction(1)})

    # -- ring structure -------------------------------------------------------

    def _aligned(self, other: "MPolyQ"):
        both = sorted(set(self.variables) | set(other.variables), key=_UNIVERSE_INDEX.get)
        def lift(p):
            idx = [p.variables.index(v) if v in p.variables else None for v in both]
            out = {}
            for e, c in p.terms.items():
                out[tuple(e[i] if i is not None else 0 for i in idx)] = c
            return out
        return tuple(both), lift(self), lift(other)

    def __add__(self, other) -> "MPolyQ":
        other = other if isinstance(other, MPolyQ) else MPolyQ.const(other)
        both, a, b = self._aligned(other)
        for e, c in b.items():
            a[e] = a.get(e, Fraction(0)) + c
        return _normalize(both, a)

    __radd__ = __add__

    def __neg__(self) -> "MPolyQ":
        return _normalize(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "MPolyQ":
        other = other if isinstance(other, MPolyQ) else MPolyQ.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "MPolyQ":
        return (-self) + other

    def __mul__(self, other) -> "MPolyQ":
        other = other if isinstance(other, MPolyQ) else MPolyQ.const(other)
        both, a, b = self._aligned(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                key = tuple(x + y for x, y in zip(e1, e2))
                out[key] = out.get(key, Fraction(0)) + c1 * c2
        return _normalize(both, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MPolyQ":
        if n < 0:
            raise ValueError("negative power")
        result = MPolyQ.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- queries --------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.variables

    def constant_value(self) -> Fraction:
        if self.variables:
            raise ValueError("not a constant")
        return self.terms.get((), Fraction(0))

    def degree(self, var: str) -> int:
        """Degree in var; -1 for the zero polynomial, 0 if var unused."""
        if not self.terms:
            return -1
        if var not in self.variables:
            return 0
        i = self.variables.index(var)
        return max(e[i] for e in self.terms)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def coeff_in(self, var: str, k: int) -> "MPolyQ":
        """Coefficient of var^k, a polynomial in the remaining variables."""
        if var not in self.variables:
            return self if k == 0 else MPolyQ.const(0)
        i = self.variables.index(var)
        rest = self.variables[:i] + self.variables[i + 1 :]
        terms = {}
        for e, c in self.terms.items():
            if e[i] == k:
                terms[e[:i] + e[i + 1 :]] = c
        return _normalize(rest, terms)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Terms in descending graded-lex order.

        Total degree first; ties broken with y most significant (so fiber
        polynomials lead with their y-power), then x1 > x2 > ... > s > t > T.
        """
        y_idx = self.variables.index("y") if "y" in self.variables else None

        def key(ec):
            e = ec[0]
            ey = e[y_idx] if y_idx is not None else 0
            rest = tuple(x for i, x in enumerate(e) if i != y_idx)
            return (sum(e), ey, rest)

        return sorted(self.terms.items(), key=key, reverse=True)

    def leading_coefficient(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        return self.sorted_terms()[0][1]

    # -- substitution / evaluation ---------------------------------------------

    def substitute(self, mapping: dict[str, "MPolyQ"]) -> "MPolyQ":
        """Simultaneous substitution var -> polynomial (or constant)."""
        out = MPolyQ.const(0)
        for e, c in self.terms.items():
            term = MPolyQ.const(c)
            for v, exp in zip(self.variables, e):
                if exp == 0:
                    continue
                image = mapping.get(v)
                image = MPolyQ.var(v) if image is None else (
                    image if isinstance(image, MPolyQ) else MPolyQ.const(image)
                )
                term = term * image**exp
            out = out + term
        return out

    def evaluate(self, values: dict[str, Fraction]) -> Fraction:
        acc = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for v, exp in zip(self.variables, e):
                if exp:
                    term *= Fraction(values[v]) ** exp
            acc += term
        return acc

    def fiber_coeffs_q(self, values: dict[str, Fraction], fiber_var: str = "y") -> list[Fraction]:
        """Exact univariate fiber over Q: coefficients of fiber_var, low degree first."""
        d = self.degree(fiber_var)
        out = [Fraction(0)] * (max(d, 0) + 1)
        for k in range(len(out)):
            out[k] = self.coeff_in(fiber_var, k).evaluate(values)
        while len(out) > 1 and out[-1] == 0:
            out.pop()
        return out

    # -- integral normal form ---------------------------------------------------

    def primitive_integral(self) -> "MPolyQ":
        """Integer coefficients, content 1, positive leading coefficient."""
        if not self.terms:
            return self
        den = math.lcm(*(c.denominator for c in self.terms.values()))
        nums = [c.numerator * (den // c.denominator) for c in self.terms.values()]
        g = math.gcd(*nums)
        scale = Fraction(den, g)
        p = _normalize(self.variables, {e: c * scale for e, c in self.terms.items()})
        if p.leading_coefficient() < 0:
            p = -p
        return p


# ------------------------------------------------------------------------------
# parsing / printing


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|(x[1-9]|[styT])|([()+\-*^/]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == m.start():
            if text[pos:].strip() == "":
                break
            raise PolySyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.group(1):
            tokens.append(("int", int(m.group(1)), m.start(1)))
        elif m.group(2):
            tokens.append(("var", m.group(2), m.start(2)))
        else:
            tokens.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise PolySyntaxError(f"expected {op!r}", pos)

    def parse(self) -> MPolyQ:
        p = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise PolySyntaxError(f"trailing input {val!r}", pos)
        return p

    def expr(self) -> MPolyQ:
        acc = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                acc = acc + rhs if val == "+" else acc - rhs
            else:
                return acc

    def term(self) -> MPolyQ:
        acc = self.unary()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val == "*":
                self.take()
                acc = acc * self.unary()
            elif kind in ("int", "var") or (kind == "op" and val == "("):
                raise PolySyntaxError("implicit multiplication is not allowed", pos)
            else:
                return acc

    def unary(self) -> MPolyQ:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return -self.unary()
        return self.power()

    def power(self) -> MPolyQ:
        base = self.primary()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, n, pos = self.take()
            if kind != "int":
                raise PolySyntaxError("exponent must be a nonnegative integer", pos)
            return base**n
        return base

    def primary(self) -> MPolyQ:
        kind, val, pos = self.take()
        if kind == "int":
            k2, v2, _ = self.peek()
            if k2 == "op" and v2 == "/":
                self.take()
                k3, den, pos3 = self.take()
                if k3 != "int" or den == 0:
                    raise PolySyntaxError("malformed rational literal", pos3)
                return MPolyQ.const(Fraction(val, den))
            return MPolyQ.const(val)
        if kind == "var":
            return MPolyQ.var(val)
        if kind == "op" and val == "(":
            p = self.expr()
            self.expect_op(")")
            return p
        raise PolySyntaxError("expected a number, variable or parenthesis", pos)


def parse_poly(text: str) -> MPolyQ:
    """Parse polynomial text; raises PolySyntaxError with a position."""
    return _Parser(text).parse()


def _monomial_str(variables, exps) -> str:
    parts = []
    for v, e in zip(variables, exps):
        if e == 1:
            parts.append(v)
        elif e > 1:
            parts.append(f"{v}^{e}")
    return "*".join(parts)


def poly_str(p: MPolyQ) -> str:
    """Canonical printing; parse(poly_str(p)) == p."""
    if not p.terms:
        return "0"
    chunks = []
    for e, c in p.sorted_terms():
        mono = _monomial_str(p.variables, e)
        mag = abs(c)
        if mono and mag == 1:
            body = mono
        elif mono:
            body = f"{mag}*{mono}"
        else:
            body = f"{mag}"
        if not chunks:
            chunks.append(body if c > 0 else f"-{body}")
        else:
            chunks.append(f" + {body}" if c > 0 else f" - {body}")
    return "".join(chunks)


# ------------------------------------------------------------------------------
# torus pull-back and reductions


def pullback(f: MPolyQ, m: int) -> MPolyQ:
    """Substitute xi -> xi^m on torus variables only (s, t, T, y untouched)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        return f
    scale = [m if v in TORUS_VARS else 1 for v in f.variables]
    terms = {tuple(x * k for x, k in zip(e, scale)): c for e, c in f.terms.items()}
    return _normalize(f.variables, terms)


@dataclass
class ReducedPoly:
    """A primitive-integral polynomial reduced mod l, organized by fiber power."""

    l: int
    fiber_var: str
    fiber_degree: int
    point_vars: tuple[str, ...]
    # coefficient groups: index k holds [(coeff mod l, exponent tuple over point_vars)]
    groups: list[list[tuple[int, tuple[int, ...]]]]

    def specialize(self, values: dict[str, object], F: Field) -> tuple[list, bool]:
        """Univariate fiber in fiber_var over F (an extension of F_l is fine).

        Returns (dense coefficient list, degree_preserved).
        """
        coeffs = []
        for group in self.groups:
            acc = F.zero
            for c, exps in group:
                term = F.from_int(c)
                for v, e in zip(self.point_vars, exps):
                    if e:
                        term = F.mul(term, F.pow_el(values[v], e))
                acc = F.add(acc, term)
            coeffs.append(acc)
        full = coeffs[-1] != F.zero
        while coeffs and coeffs[-1] == F.zero:
            coeffs.pop()
        return coeffs, full


def reduce_mod(f: MPolyQ, l: int, fiber_var: str = "y") -> ReducedPoly:
    """Coefficient-wise reduction of the primitive-integral form.

    BadPrime when l divides a denominator of f as given, or when the leading
    fiber-variable coefficient vanishes mod l (degree drop).
    """
    for c in f.terms.values():
        if c.denominator % l == 0:
            raise BadPrime(f"l={l} divides a coefficient denominator")
    g = f.primitive_integral()
    d = g.degree(fiber_var)
    if d < 0:
        raise BadPrime("zero polynomial cannot be reduced")
    point_vars = tuple(v for v in g.variables if v != fiber_var)
    groups: list[list[tuple[int, tuple[int, ...]]]] = [[] for _ in range(d + 1)]
    fiber_idx = g.variables.index(fiber_var) if fiber_var in g.variables else None
    for e, c in g.terms.items():
        cc = int(c) % l
        if cc == 0:
            continue
        k = e[fiber_idx] if fiber_idx is not None else 0
        rest = tuple(x for i, x in enumerate(e) if i != fiber_idx)
        groups[k].append((cc, rest))
    if not groups[d]:
        raise BadPrime(f"leading {fiber_var}-coefficient vanishes mod {l}")
    return ReducedPoly(l, fiber_var, d, point_vars, groups)


def variable_degrees_preserved_mod(f: MPolyQ, l: int) -> bool:
    """True when no variable's degree drops under reduction mod l."""
    g = f.primitive_integral()
    for i, v in enumerate(g.variables):
        full = max(e[i] for e in g.terms)
        reduced = max((e[i] for e, c in g.terms.items() if int(c) % l != 0), default=-1)
        if reduced != full:
            return False
    return True


# ------------------------------------------------------------------------------
# squarefree machinery over Q (sympy-backed) and over F_l


def _sympy():
    import sympy

    return sympy


def to_sympy(p: MPolyQ):
    sympy = _sympy()
    expr = sympy.Integer(0)
    syms = {v: sympy.Symbol(v) for v in p.variables}
    for e, c in p.terms.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for v, k in zip(p.variables, e):
            if k:
                term *= syms[v] ** k
        expr += term
    return expr


def from_sympy(expr) -> MPolyQ:
    sympy = _sympy()
    expr = sympy.expand(expr)
    if expr.is_number:
        return MPolyQ.const(Fraction(int(sympy.numer(expr)), int(sympy.denom(expr))))
    gens = sorted((str(s) for s in expr.free_symbols), key=_UNIVERSE_INDEX.get)
    poly = sympy.Poly(expr, *[sympy.Symbol(g) for g in gens])
    terms = {}
    for exps, coeff in poly.terms():
        q = sympy.Rational(coeff)
        terms[tuple(exps)] = Fraction(int(q.p), int(q.q))
    return _normalize(tuple(gens), terms)


def squarefree_part(p: MPolyQ) -> MPolyQ:
    """Product of the distinct irreducible factors, primitive-integral form."""
    if p.is_zero():
        raise ValueError("zero polynomial")
    if p.is_constant():
        return MPolyQ.const(1)
    sympy = _sympy()
    part = sympy.sqf_part(to_sympy(p))
    return from_sympy(part).primitive_integral()


def square_decomposition(p: MPolyQ) -> tuple[Fraction, MPolyQ, bool]:
    """(constant c, root m, ok) with p == c * m^2 exactly when ok is True.

    ok means p is a perfect square in QQbar[x...]: every squarefree factor has
    even multiplicity (the constant is always a square over QQbar).
    """
    if p.is_zero():
        return Fraction(0), MPolyQ.const(0), True
    sympy = _sympy()
    coeff, factors = sympy.sqf_list(to_sympy(p))
    if any(e % 2 for _, e in factors):
        return Fraction(0), MPolyQ.const(0), False
    root = MPolyQ.const(1)
    for fac, e in factors:
        root = root * from_sympy(fac) ** (e // 2)
    q = sympy.Rational(coeff)
    return Fraction(int(q.p), int(q.q)), root, True


def is_squarefree(p: MPolyQ) -> bool:
    if p.is_zero():
        return False
    if p.is_constant():
        return True
    sympy = _sympy()
    _, factors = sympy.sqf_list(to_sympy(p))
    return all(e == 1 for _, e in factors)


def fiber_content_constant_mod(f: MPolyQ, l: int, fiber_var: str = "y") -> bool:
    """True when the content of f mod l, viewed in F_l[point vars][fiber_var],
    is constant (no common nonconstant factor of the fiber coefficients)."""
    sympy = _sympy()
    g = f.primitive_integral()
    d = g.degree(fiber_var)
    point_vars = [v for v in g.variables if v != fiber_var]
    if not point_vars:
        return True
    gens = [sympy.Symbol(v) for v in point_vars]
    dom = sympy.GF(l)
    acc = None
    for k in range(d + 1):
        ck = g.coeff_in(fiber_var, k)
        if ck.is_zero():
            continue
        poly = sympy.Poly(to_sympy(ck), *gens, domain=dom)
        acc = poly if acc is None else acc.gcd(poly)
        if acc.total_degree() == 0:
            return True
    if acc is None:
        return False
    return acc.total_degree() == 0


def fiber_content_q(f: MPolyQ, fiber_var: str = "y") -> MPolyQ:
    """Gcd over Q[point vars] of the fiber-variable coefficients of f."""
    sympy = _sympy()
    d = f.degree(fiber_var)
    acc = None
    for k in range(d + 1):
        ck = f.coeff_in(fiber_var, k)
        if ck.is_zero():
            continue
        acc = to_sympy(ck) if acc is None else sympy.gcd(acc, to_sympy(ck))
    if acc is None:
        return MPolyQ.const(0)
    return from_sympy(acc).primitive_integral() if not _sympy().sympify(acc).is_number else MPolyQ.const(1)


def rational_square_root(c: Fraction) -> Optional[Fraction]:
    """Exact square root of a nonnegative rational, or None."""
    if c < 0:
        return None
    n, d = c.numerator, c.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def discriminant_quadratic(f: MPolyQ, fiber_var: str = "y") -> MPolyQ:
    """b^2 - 4ac for a polynomial of degree exactly 2 in fiber_var."""
    if f.degree(fiber_var) != 2:
        raise ValueError("not quadratic in the fiber variable")
    a = f.coeff_in(fiber_var, 2)
    b = f.coeff_in(fiber_var, 1)
    c = f.coeff_in(fiber_var, 0)
    return b * b - MPolyQ.const(4) * a * c
