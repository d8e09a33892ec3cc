"""Finite fields F_l and F_{l^e} with dense univariate polynomial arithmetic.

Polynomials are lists of field elements indexed by degree (coefficient of
x^i at index i), trimmed so the last entry is nonzero.  Prime-field elements
are ints in [0, l); extension elements are tuples of ints of length e over a
deterministically chosen irreducible modulus, so a verifier rebuilding the
field from (l, e) gets the identical representation.

Factorization is squarefree split + distinct-degree + Cantor-Zassenhaus
equal-degree with seeded randomness; irreducibility testing is Rabin's
deterministic criterion.
"""

from __future__ import annotations

import random
from typing import Iterable, Optional

from .arith import factorize, is_prime
from .errors import BoundExceeded

_EXT_ORDER_CAP = 1 << 40


class PrimeField:
    """F_l; elements are ints in [0, l)."""

    __slots__ = ("l", "e", "modulus")

    def __init__(self, l: int):
        if not is_prime(l):
            raise ValueError(f"{l} is not prime")
        self.l = l
        self.e = 1
        self.modulus = None

    @property
    def order(self) -> int:
        return self.l

    zero = 0
    one = 1

    def add(self, a, b):
        return (a + b) % self.l

    def sub(self, a, b):
        return (a - b) % self.l

    def neg(self, a):
        return -a % self.l

    def mul(self, a, b):
        return a * b % self.l

    def inv(self, a):
        return pow(a, -1, self.l)

    def pow_el(self, a, n: int):
        return pow(a, n, self.l)

    def from_int(self, c: int):
        return c % self.l

    def element_code(self, a) -> int:
        return a

    def element_from_code(self, code: int):
        if not 0 <= code < self.l:
            raise ValueError("element code out of range")
        return code

    def elements(self) -> Iterable:
        return range(self.l)

    def describe(self) -> dict:
        return {"l": self.l, "e": 1}

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.l == self.l

    def __repr__(self):
        return f"PrimeField({self.l})"


class ExtField:
    """F_{l^e}, e > 1; elements are tuples of length e over F_l (low degree first)."""

    __slots__ = ("l", "e", "modulus", "zero", "one")

    def __init__(self, l: int, e: int, modulus: tuple[int, ...]):
        if len(modulus) != e + 1 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree e")
        self.l = l
        self.e = e
        self.modulus = modulus
        self.zero = (0,) * e
        self.one = (1,) + (0,) * (e - 1)

    @property
    def order(self) -> int:
        return self.l**self.e

    def add(self, a, b):
        l = self.l
        return tuple((x + y) % l for x, y in zip(a, b))

    def sub(self, a, b):
        l = self.l
        return tuple((x - y) % l for x, y in zip(a, b))

    def neg(self, a):
        l = self.l
        return tuple(-x % l for x in a)

    def mul(self, a, b):
        l, e = self.l, self.e
        prod = [0] * (2 * e - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] = (prod[i + j] + ai * bj) % l
        # reduce by the monic modulus
        mod = self.modulus
        for i in range(2 * e - 2, e - 1, -1):
            c = prod[i]
            if c:
                prod[i] = 0
                for j in range(e):
                    prod[i - e + j] = (prod[i - e + j] - c * mod[j]) % l
        return tuple(prod[:e])

    def inv(self, a):
        if a == self.zero:
            raise ZeroDivisionError("inverse of zero")
        # extended Euclid in F_l[z] between a (as a poly) and the modulus
        l = self.l
        r0, r1 = list(self.modulus), list(a)
        while r1 and r1[-1] == 0:
            r1.pop()
        s0, s1 = [0], [1]
        while r1:
            inv_lead = pow(r1[-1], -1, l)
            q = [0] * (len(r0) - len(r1) + 1)
            rem = r0[:]
            for i in range(len(rem) - 1, len(r1) - 2, -1):
                c = rem[i] * inv_lead % l
                if c:
                    q[i - len(r1) + 1] = c
                    for j in range(len(r1)):
                        rem[i - len(r1) + 1 + j] = (rem[i - len(r1) + 1 + j] - c * r1[j]) % l
            while rem and rem[-1] == 0:
                rem.pop()
            new_s = s0[:]
            new_s.extend([0] * (len(q) + len(s1) - 1 - len(new_s)))
            for i, qi in enumerate(q):
                if qi:
                    for j, sj in enumerate(s1):
                        new_s[i + j] = (new_s[i + j] - qi * sj) % l
            r0, r1 = r1, rem
            s0, s1 = s1, new_s
        c = pow(r0[0], -1, l)  # r0 is a nonzero constant: gcd with irreducible modulus
        out = [x * c % l for x in s0]
        out.extend([0] * (self.e - len(out)))
        return tuple(out[: self.e])

    def pow_el(self, a, n: int):
        result = self.one
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def from_int(self, c: int):
        return (c % self.l,) + (0,) * (self.e - 1)

    def element_code(self, a) -> int:
        code = 0
        for x in reversed(a):
            code = code * self.l + x
        return code

    def element_from_code(self, code: int):
        if not 0 <= code < self.order:
            raise ValueError("element code out of range")
        out = []
        for _ in range(self.e):
            code, r = divmod(code, self.l)
            out.append(r)
        return tuple(out)

    def elements(self) -> Iterable:
        for code in range(self.order):
            yield self.element_from_code(code)

    def describe(self) -> dict:
        return {"l": self.l, "e": self.e, "modulus": list(self.modulus)}

    def __eq__(self, other):
        return (
            isinstance(other, ExtField)
            and other.l == self.l
            and other.e == self.e
            and other.modulus == self.modulus
        )

    def __repr__(self):
        return f"ExtField({self.l}, {self.e}, modulus={list(self.modulus)})"


Field = PrimeField | ExtField


def _modulus_candidates(l: int, e: int):
    """Monic degree-e polynomials over F_l in ascending code order."""
    for code in range(l**e):
        coeffs = []
        c = code
        for _ in range(e):
            c, r = divmod(c, l)
            coeffs.append(r)
        yield tuple(coeffs) + (1,)


def ext_field(l: int, e: int) -> Field:
    """Field descriptor for F_{l^e}; modulus is the first irreducible monic
    degree-e polynomial in the fixed base-l code enumeration."""
    if e < 1:
        raise ValueError("e must be >= 1")
    if l**e > _EXT_ORDER_CAP:
        raise BoundExceeded(f"{l}^{e} exceeds the field-order cap 2^40")
    if e == 1:
        return PrimeField(l)
    base = PrimeField(l)
    for cand in _modulus_candidates(l, e):
        if up_is_irreducible(list(cand), base):
            return ExtField(l, e, cand)
    raise RuntimeError("unreachable: irreducible polynomials of every degree exist")


# ----------------------------------------------------------------------------
# dense univariate arithmetic (coefficient of x^i at index i)


def up_trim(f: list) -> list:
    while f and not _nonzero(f[-1]):
        f.pop()
    return f


def _nonzero(el) -> bool:
    return el != 0 and el != () and (not isinstance(el, tuple) or any(el))


def up_deg(f: list) -> int:
    """Degree, with the zero polynomial mapped to -1."""
    return len(f) - 1


def up_add(f: list, g: list, F: Field) -> list:
    n = max(len(f), len(g))
    out = []
    for i in range(n):
        a = f[i] if i < len(f) else F.zero
        b = g[i] if i < len(g) else F.zero
        out.append(F.add(a, b))
    return up_trim(out)


def up_sub(f: list, g: list, F: Field) -> list:
    n = max(len(f), len(g))
    out = []
    for i in range(n):
        a = f[i] if i < len(f) else F.zero
        b = g[i] if i < len(g) else F.zero
        out.append(F.sub(a, b))
    return up_trim(out)


def up_scal(f: list, c, F: Field) -> list:
    if not _nonzero(c):
        return []
    return up_trim([F.mul(a, c) for a in f])


def up_mul(f: list, g: list, F: Field) -> list:
    if not f or not g:
        return []
    out = [F.zero] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if _nonzero(a):
            for j, b in enumerate(g):
                out[i + j] = F.add(out[i + j], F.mul(a, b))
    return up_trim(out)


def up_divmod(f: list, g: list, F: Field) -> tuple[list, list]:
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    f = f[:]
    dg = len(g) - 1
    inv_lead = F.inv(g[-1])
    if len(f) < len(g):
        return [], up_trim(f)
    q = [F.zero] * (len(f) - dg)
    for i in range(len(f) - 1, dg - 1, -1):
        c = F.mul(f[i], inv_lead)
        if _nonzero(c):
            q[i - dg] = c
            for j in range(dg + 1):
                f[i - dg + j] = F.sub(f[i - dg + j], F.mul(c, g[j]))
    return up_trim(q), up_trim(f)


def up_mod(f: list, g: list, F: Field) -> list:
    return up_divmod(f, g, F)[1]


def up_monic(f: list, F: Field) -> list:
    if not f:
        return []
    return up_scal(f, F.inv(f[-1]), F)


def up_gcd(f: list, g: list, F: Field) -> list:
    a, b = f[:], g[:]
    while b:
        a, b = b, up_mod(a, b, F)
    return up_monic(a, F)


def up_pow_mod(base: list, n: int, mod: list, F: Field) -> list:
    result = [F.one]
    base = up_mod(base, mod, F)
    while n:
        if n & 1:
            result = up_mod(up_mul(result, base, F), mod, F)
        base = up_mod(up_mul(base, base, F), mod, F)
        n >>= 1
    return result


def up_derivative(f: list, F: Field) -> list:
    out = []
    for i in range(1, len(f)):
        out.append(F.mul(f[i], F.from_int(i)))
    return up_trim(out)


def up_eval(f: list, x, F: Field):
    acc = F.zero
    for c in reversed(f):
        acc = F.add(F.mul(acc, x), c)
    return acc


def up_from_ints(coeffs: list[int], F: Field) -> list:
    return up_trim([F.from_int(c) for c in coeffs])


def up_to_codes(f: list, F: Field) -> list[int]:
    return [F.element_code(c) for c in f]


def up_from_codes(codes: list[int], F: Field) -> list:
    return up_trim([F.element_from_code(c) for c in codes])


# ----------------------------------------------------------------------------
# factorization


def _pth_root(f: list, F: Field) -> list:
    """Inverse Frobenius on a polynomial of the form g(x^l): coefficients get
    their l-th root (c -> c^(l^(e-1))) and exponents divide by l."""
    l = F.l
    root_exp = l ** (F.e - 1)
    out = []
    for i in range(0, len(f), l):
        out.append(F.pow_el(f[i], root_exp))
    return up_trim(out)


def squarefree_decomposition(f: list, F: Field) -> list[tuple[list, int]]:
    """Monic squarefree factors with multiplicities; product recomposes f/lc."""
    f = up_monic(f, F)
    result: list[tuple[list, int]] = []

    def rec(g: list, mult: int) -> None:
        if up_deg(g) < 1:
            return
        d = up_derivative(g, F)
        if not d:
            # g is an l-th power
            rec(_pth_root(g, F), mult * F.l)
            return
        w = up_gcd(g, d, F)
        squarefree = up_divmod(g, w, F)[0]
        m = 1
        while up_deg(squarefree) >= 1:
            y = up_gcd(squarefree, w, F)
            part = up_divmod(squarefree, y, F)[0]
            if up_deg(part) >= 1:
                result.append((part, mult * m))
            squarefree = y
            w = up_divmod(w, y, F)[0]
            m += 1
        if up_deg(w) >= 1:
            # w is now the part whose multiplicities are divisible by char l,
            # hence a perfect l-th power: recurse on its l-th root.
            rec(_pth_root(w, F), mult * F.l)

    rec(f, 1)
    return result


def distinct_degree_factorization(f: list, F: Field) -> list[tuple[list, int]]:
    """(product of irreducible factors of degree d, d) for monic squarefree f."""
    q = F.order
    out = []
    x = [F.zero, F.one]
    h = x[:]
    g = f[:]
    d = 0
    while up_deg(g) >= 1:
        d += 1
        if up_deg(g) < 2 * d:
            out.append((up_monic(g, F), up_deg(g)))
            break
        h = up_pow_mod(h, q, g, F)
        factor = up_gcd(up_sub(h, x, F), g, F)
        if up_deg(factor) >= 1:
            out.append((factor, d))
            g = up_divmod(g, factor, F)[0]
            h = up_mod(h, g, F)
    return out


def _edf_split(f: list, d: int, F: Field, rng: random.Random) -> list:
    """One random splitting attempt; returns a proper factor or []."""
    n = up_deg(f)
    h = [F.element_from_code(rng.randrange(F.order)) for _ in range(n)]
    h = up_trim(h)
    if up_deg(h) < 1:
        return []
    q = F.order
    if F.l == 2:
        # trace map over F_2: T = h + h^2 + h^4 + ... (e*d terms)
        k = F.e * d
        t = h[:]
        acc = h[:]
        for _ in range(k - 1):
            acc = up_pow_mod(acc, 2, f, F)
            t = up_add(t, acc, F)
        g = up_gcd(t, f, F)
    else:
        e = (q**d - 1) // 2
        t = up_pow_mod(h, e, f, F)
        g = up_gcd(up_sub(t, [F.one], F), f, F)
    if 1 <= up_deg(g) < up_deg(f):
        return g
    return []


def equal_degree_factorization(f: list, d: int, F: Field, rng: random.Random) -> list[list]:
    """Split monic squarefree f, all of whose irreducible factors have degree d."""
    n = up_deg(f)
    if n == d:
        return [up_monic(f, F)]
    while True:
        g = _edf_split(f, d, F, rng)
        if g:
            rest = up_divmod(f, g, F)[0]
            return equal_degree_factorization(g, d, F, rng) + equal_degree_factorization(
                rest, d, F, rng
            )


def up_factor(f: list, F: Field, seed: int = 0) -> tuple[object, list[tuple[list, int]]]:
    """Full factorization: (leading unit, [(monic irreducible, multiplicity)]).

    Deterministic for a given seed; the factor list is sorted by (degree,
    coefficient codes) so the output order never depends on the rng.
    """
    if not f:
        raise ValueError("cannot factor the zero polynomial")
    lead = f[-1]
    if up_deg(f) == 0:
        return lead, []
    rng = random.Random(seed)
    factors: list[tuple[list, int]] = []
    for sf, mult in squarefree_decomposition(f, F):
        for prod, d in distinct_degree_factorization(sf, F):
            for irr in equal_degree_factorization(prod, d, F, rng):
                factors.append((irr, mult))
    factors.sort(key=lambda fm: (up_deg(fm[0]), [F.element_code(c) for c in fm[0]], fm[1]))
    # recomposition check: the factorization must multiply back exactly
    check = [lead]
    for g, m in factors:
        for _ in range(m):
            check = up_mul(check, g, F)
    assert check == up_trim(f[:]), "internal error: factorization does not recompose"
    return lead, factors


def up_is_irreducible(f: list, F: Field) -> bool:
    """Rabin's deterministic irreducibility test for deg f >= 1."""
    n = up_deg(f)
    if n < 1:
        return False
    if n == 1:
        return True
    if not _nonzero(f[0]) :
        return False  # divisible by x
    q = F.order
    x = [F.zero, F.one]
    # x^(q^n) == x mod f
    h = x[:]
    for _ in range(n):
        h = up_pow_mod(h, q, f, F)
    if up_trim(up_sub(h, x, F)):
        return False
    for p in factorize(n).factors:
        h = x[:]
        for _ in range(n // p):
            h = up_pow_mod(h, q, f, F)
        if up_deg(up_gcd(up_sub(h, x, F), f, F)) != 0:
            return False
    return True


def up_has_root(f: list, F: Field) -> bool:
    """True iff f has a root in the base field F (via gcd with x^q - x)."""
    if not f:
        return True
    if up_deg(f) == 0:
        return False
    if not _nonzero(f[0]):
        return True  # root at 0
    q = F.order
    xq = up_pow_mod([F.zero, F.one], q, f, F)
    g = up_gcd(up_sub(xq, [F.zero, F.one], F), f, F)
    return up_deg(g) >= 1


def up_factor_degrees(f: list, F: Field, seed: int = 0) -> list[int]:
    """Sorted degrees of the irreducible factors, with multiplicity."""
    _, factors = up_factor(f, F, seed)
    degs: list[int] = []
    for g, m in factors:
        degs.extend([up_deg(g)] * m)
    return sorted(degs)


def field_from_descriptor(desc: dict) -> Field:
    """Rebuild a field from its JSON description, revalidating the modulus."""
    l, e = desc["l"], desc["e"]
    F = ext_field(l, e)
    if e > 1 and list(F.modulus) != list(desc.get("modulus", [])):
        raise ValueError("field modulus does not match the deterministic enumeration")
    return F
