"""Exact integer/rational arithmetic kernels: primality, factoring, CRT,
multiplicative orders, discrete logarithms and multiplicative independence.

Everything here is a pure function of its inputs; Pollard rho and the
baby-step tables use fixed deterministic parameters so repeated runs agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import BoundExceeded

# Deterministic Miller-Rabin base set, correct for all n < 3.3 * 10^24
# (covers the full 64-bit range demanded by the contract).
_MR_BASES_64 = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_TRIAL_LIMIT = 10**6
_RHO_BUDGET = 10**7
_FACTOR_BOUND = 1 << 128
_BSGS_TABLE_CAP = 10**6

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def _mr_witness(a: int, n: int, d: int, s: int) -> bool:
    """True if a proves n composite."""
    a %= n
    if a in (0, 1, n - 1):
        return False
    x = pow(a, d, n)
    if x in (1, n - 1):
        return False
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return False
    return True


def _strong_lucas_prp(n: int) -> bool:
    """Strong Lucas probable-prime test with Selfridge's parameter choice."""
    # Find D = 5, -7, 9, -11, ... with Jacobi(D, n) == -1.
    d = 5
    while True:
        j = jacobi(d, n)
        if j == -1:
            break
        if j == 0 and abs(d) != n:
            return False
        d = -(d + 2) if d > 0 else -(d - 2)
    p, q = 1, (1 - d) // 4
    # n + 1 = 2^s * t with t odd.
    t, s = n + 1, 0
    while t % 2 == 0:
        t //= 2
        s += 1
    # Lucas sequences U_t, V_t by binary ladder.
    u, v, qk = 1, p, q
    for bit in bin(t)[3:]:
        u, v = u * v % n, (v * v - 2 * qk) % n
        qk = qk * qk % n
        if bit == "1":
            u, v = (p * u + v) * ((n + 1) // 2) % n, (d * u + p * v) * ((n + 1) // 2) % n
            qk = qk * q % n
    if u == 0 or v == 0:
        return True
    for _ in range(s - 1):
        u, v = u * v % n, (v * v - 2 * qk) % n
        qk = qk * qk % n
        if v == 0:
            return True
    return False


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n > 0."""
    if n <= 0 or n % 2 == 0:
        raise ValueError("n must be positive and odd")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def is_prime(n: int) -> bool:
    """Primality test: deterministic below 2^64, Baillie-PSW style beyond.

    Below 2^64 the fixed Miller-Rabin base set is provably correct; beyond,
    a base-2 strong probable prime test plus a strong Lucas test is used.
    """
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < 1 << 64:
        return not any(_mr_witness(a, n, d, s) for a in _MR_BASES_64)
    if _mr_witness(2, n, d, s):
        return False
    return _strong_lucas_prp(n)


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    k = n + 1
    if k <= 2:
        return 2
    if k % 2 == 0:
        k += 1
    while not is_prime(k):
        k += 2
    return k


def primes_up_to(n: int) -> list[int]:
    """Sieve of Eratosthenes, inclusive."""
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i, flag in enumerate(sieve) if flag]


def _brent_rho(n: int, budget: int) -> int:
    """Brent's cycle variant of Pollard rho with fixed parameters.

    Returns a nontrivial factor of composite odd n, or raises BoundExceeded.
    """
    for c in range(1, 64):
        y, m, g, r, q = 2, 128, 1, 1, 1
        spent = 0
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
            spent += r
            if spent > budget:
                raise BoundExceeded(f"pollard rho budget exhausted on {n}")
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise BoundExceeded(f"pollard rho failed on {n}")


@dataclass(frozen=True)
class FactoredInt:
    """Sign and prime->exponent map; recomposes to the original integer."""

    sign: int
    factors: dict[int, int]

    def recompose(self) -> int:
        value = self.sign
        for p, e in self.factors.items():
            value *= p**e
        return value


def factorize(n: int, bound: int = _FACTOR_BOUND) -> FactoredInt:
    """Complete factorization: trial division below 10^6, then Pollard rho."""
    if abs(n) >= bound:
        raise BoundExceeded(f"|n| >= {bound}")
    if n == 0:
        return FactoredInt(0, {})
    sign = 1 if n > 0 else -1
    n = abs(n)
    factors: dict[int, int] = {}

    def record(p: int) -> None:
        factors[p] = factors.get(p, 0) + 1

    for p in (2, 3, 5):
        while n % p == 0:
            record(p)
            n //= p
    # 2/3/5 wheel.
    increments = (4, 2, 4, 2, 4, 6, 2, 6)
    p, i = 7, 0
    while p * p <= n and p < _TRIAL_LIMIT:
        while n % p == 0:
            record(p)
            n //= p
        p += increments[i]
        i = (i + 1) % 8
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            record(m)
            continue
        d = _brent_rho(m, _RHO_BUDGET)
        stack.append(d)
        stack.append(m // d)
    return FactoredInt(sign, dict(sorted(factors.items())))


def divisors(n: int) -> list[int]:
    """Sorted positive divisors of n != 0."""
    fac = factorize(abs(n))
    divs = [1]
    for p, e in fac.factors.items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


@dataclass(frozen=True)
class CongruenceClass:
    """Residue class a mod M with 0 <= a < M, M >= 1."""

    residue: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be >= 1")
        if not 0 <= self.residue < self.modulus:
            object.__setattr__(self, "residue", self.residue % self.modulus)

    def __str__(self) -> str:
        return f"{self.residue} mod {self.modulus}"


def crt(classes: list[CongruenceClass]) -> Optional[CongruenceClass]:
    """Intersect congruence classes; None when they are inconsistent.

    The result, when it exists, is the unique class modulo the lcm of the
    input moduli meeting every input class.
    """
    a, m = 0, 1
    for cls in classes:
        b, n = cls.residue, cls.modulus
        g = math.gcd(m, n)
        if (b - a) % g != 0:
            return None
        lcm = m // g * n
        # a + m*t == b (mod n)  =>  t == (b-a)/g * inv(m/g) (mod n/g)
        t = (b - a) // g * pow(m // g, -1, n // g) % (n // g) if n // g > 1 else 0
        a = (a + m * t) % lcm
        m = lcm
    return CongruenceClass(a, m)


def mult_order(g: int, l: int) -> int:
    """Least t >= 1 with g^t == 1 mod l (prime l, l does not divide g)."""
    g %= l
    if g == 0:
        raise ValueError("g is divisible by l")
    t = l - 1
    for p in factorize(t).factors:
        while t % p == 0 and pow(g, t // p, l) == 1:
            t //= p
    return t


def _bsgs(g: int, h: int, p: int, order: int) -> Optional[int]:
    """Baby-step/giant-step in the subgroup of F_p* generated by g of size `order`."""
    m = math.isqrt(order - 1) + 1
    if m > _BSGS_TABLE_CAP:
        raise BoundExceeded(f"baby-step table of size {m} over cap")
    table = {}
    e = 1
    for j in range(m):
        table.setdefault(e, j)
        e = e * g % p
    # giant steps: h * (g^-m)^i
    gm_inv = pow(pow(g, m, p), -1, p)
    e = h
    for i in range(m):
        j = table.get(e)
        if j is not None:
            return i * m + j
        e = e * gm_inv % p
    return None


def discrete_log(g: int, h: int, l: int) -> Optional[int]:
    """Least n >= 0 with g^n == h mod l, or None when h is outside <g>.

    Pohlig-Hellman over the factored order of g, with baby-step/giant-step
    in each prime-power subgroup.
    """
    g %= l
    h %= l
    if g == 0 or h == 0:
        raise ValueError("g, h must be units mod l")
    if h == 1:
        return 0
    order = mult_order(g, l)
    parts: list[CongruenceClass] = []
    for p, e in factorize(order).factors.items():
        pe = p**e
        gp = pow(g, order // pe, l)
        hp = pow(h, order // pe, l)
        # digits of the exponent base p
        x = 0
        gamma = pow(gp, pe // p, l)  # order p
        for k in range(e):
            target = pow(hp * pow(gp, -x % pe, l) % l, pe // p ** (k + 1), l)
            d = _bsgs(gamma, target, l, p)
            if d is None:
                return None
            x += d * p**k
        parts.append(CongruenceClass(x, pe))
    combined = crt(parts)
    if combined is None:
        return None
    n = combined.residue
    if pow(g, n, l) != h:
        return None
    return n


def dth_power_residue(a: int, d: int, l: int) -> bool:
    """True iff a is a d-th power in F_l* (prime l, l does not divide a)."""
    if d < 2:
        raise ValueError("d must be >= 2")
    a %= l
    if a == 0:
        raise ValueError("a is divisible by l")
    g = math.gcd(d, l - 1)
    return pow(a, (l - 1) // g, l) == 1


def legendre(a: int, l: int) -> int:
    """Quadratic character of a mod the odd prime l, with legendre(0) = 0."""
    a %= l
    if a == 0:
        return 0
    return 1 if pow(a, (l - 1) // 2, l) == 1 else -1


def _rational_nullspace(rows: list[list[int]]) -> list[list[int]]:
    """Basis of {e : sum_i e_i * rows[i] = 0}, as primitive integer vectors."""
    r = len(rows)
    if r == 0:
        return []
    cols = len(rows[0])
    # Work on the transpose: kernel of (cols x r) matrix acting on e.
    mat = [[Fraction(rows[i][j]) for i in range(r)] for j in range(cols)]
    pivots: list[int] = []
    row = 0
    for col in range(r):
        pivot = next((i for i in range(row, len(mat)) if mat[i][col] != 0), None)
        if pivot is None:
            continue
        mat[row], mat[pivot] = mat[pivot], mat[row]
        inv = 1 / mat[row][col]
        mat[row] = [v * inv for v in mat[row]]
        for i in range(len(mat)):
            if i != row and mat[i][col] != 0:
                factor = mat[i][col]
                mat[i] = [a - factor * b for a, b in zip(mat[i], mat[row])]
        pivots.append(col)
        row += 1
        if row == len(mat):
            break
    free = [c for c in range(r) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * r
        vec[fc] = Fraction(1)
        for prow, pcol in enumerate(pivots):
            vec[pcol] = -mat[prow][fc]
        denom = math.lcm(*(v.denominator for v in vec))
        ints = [int(v * denom) for v in vec]
        g = math.gcd(*ints)
        basis.append([v // g for v in ints])
    return basis


def mult_independent(xs: list[Fraction]) -> Optional[tuple[int, ...]]:
    """None when the rationals are multiplicatively independent, otherwise a
    nonzero integer vector e with prod(x_i ** e_i) == 1 exactly.

    Works through p-adic valuation vectors (one column per prime dividing any
    numerator or denominator) plus a sign row handled separately: the only
    torsion in Q* is {+-1}, so a kernel vector of the valuation matrix gives a
    product of +-1, and doubling fixes a stray sign.
    """
    xs = [Fraction(x) for x in xs]
    if any(x == 0 for x in xs):
        raise ValueError("entries must be nonzero")
    factored = []
    primes: set[int] = set()
    for x in xs:
        fn = factorize(x.numerator)
        fd = factorize(x.denominator)
        vals = dict(fn.factors)
        for p, e in fd.factors.items():
            vals[p] = vals.get(p, 0) - e
        factored.append((fn.sign, vals))
        primes.update(vals)
    cols = sorted(primes)
    rows = [[vals.get(p, 0) for p in cols] for _, vals in factored]
    basis = _rational_nullspace(rows)
    if not basis:
        return None
    e = basis[0]
    sign = 1
    for (s, _), ei in zip(factored, e):
        if s < 0 and ei % 2 != 0:
            sign = -sign
    if sign < 0:
        e = [2 * v for v in e]
    return tuple(e)


def int_nth_root(v: int, d: int) -> int:
    """Floor of the d-th root of v >= 0."""
    if v < 0:
        raise ValueError("v must be >= 0")
    if v < 2:
        return v
    x = 1 << ((v.bit_length() + d - 1) // d)
    while True:
        y = ((d - 1) * x + v // x ** (d - 1)) // d
        if y >= x:
            break
        x = y
    while x**d > v:
        x -= 1
    return x


def is_perfect_dth_power(v: int, d: int) -> bool:
    """Exact d-th power test over the integers, sign-aware."""
    if v < 0:
        if d % 2 == 0:
            return False
        return is_perfect_dth_power(-v, d)
    r = int_nth_root(v, d)
    return r**d == v
