"""Finite fields and univariate factorization against brute-force oracles."""

import random

import pytest

from certforge.arith import legendre
from certforge.errors import BoundExceeded
from certforge.gf import (
    ExtField,
    PrimeField,
    ext_field,
    up_deg,
    up_factor,
    up_factor_degrees,
    up_from_ints,
    up_has_root,
    up_is_irreducible,
    up_mul,
    up_trim,
)

F5 = ext_field(5, 1)
F7 = ext_field(7, 1)
F8 = ext_field(2, 3)
F9 = ext_field(3, 2)
F25 = ext_field(5, 2)


# ---------------------------------------------------------------- oracles


def all_monic(F, deg):
    for code in range(F.order**deg):
        coeffs = []
        c = code
        for _ in range(deg):
            c, r = divmod(c, F.order)
            coeffs.append(F.element_from_code(r))
        yield coeffs + [F.one]


def brute_first_irreducible(l, e):
    """First monic irreducible of degree e over F_l in code order, by trial
    products of all lower-degree monic polynomials."""
    F = PrimeField(l)
    lower = []
    for d in range(1, e):
        lower.extend(list(all_monic(F, d)))
    for cand in all_monic(F, e):
        divisible = False
        for g in lower:
            if 2 * up_deg(g) > 2 * e:
                continue
            rem = _poly_mod(cand, g, F)
            if not rem:
                divisible = True
                break
        if not divisible:
            return tuple(cand)
    raise AssertionError("no irreducible found")


def _poly_mod(f, g, F):
    from certforge.gf import up_mod

    return up_mod(f, g, F)


def roots_by_enumeration(f, F):
    from certforge.gf import up_eval

    return [x for x in F.elements() if up_eval(f, x, F) == F.zero]


# ---------------------------------------------------------------- fields


def test_ext_field_examples():
    assert isinstance(F5, PrimeField) and F5.order == 5
    assert brute_first_irreducible(2, 3) == (1, 1, 0, 1)
    assert F8.modulus == (1, 1, 0, 1)
    assert brute_first_irreducible(3, 2) == (1, 0, 1)
    assert F9.modulus == (1, 0, 1)


def test_ext_field_bound():
    with pytest.raises(BoundExceeded):
        ext_field(3, 60)


def test_field_axioms_small():
    for F in (F9, F8, F25):
        els = list(F.elements())
        one, zero = F.one, F.zero
        for a in els[:12]:
            assert F.add(a, zero) == a and F.mul(a, one) == a
            if a != zero:
                assert F.mul(a, F.inv(a)) == one
        rng = random.Random(1)
        for _ in range(60):
            a, b, c = (F.element_from_code(rng.randrange(F.order)) for _ in range(3))
            assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
            assert F.mul(a, b) == F.mul(b, a)


def test_element_codes_roundtrip():
    for F in (F5, F9, F8):
        for code in range(F.order):
            assert F.element_code(F.element_from_code(code)) == code


# ---------------------------------------------------------------- factorization


def test_factor_examples():
    # y^2 + 1 over F7: squares mod 7 are {1,2,4}, -1 = 6 is not among them
    assert legendre(-1, 7) == -1
    g = up_from_ints([1, 0, 1], F7)
    assert up_is_irreducible(g, F7)
    _, fac = up_factor(g, F7)
    assert len(fac) == 1 and fac[0][1] == 1 and up_deg(fac[0][0]) == 2

    _, fac = up_factor(up_from_ints([-1, 0, 1], F7), F7)
    assert sorted(up_deg(f) for f, _ in fac) == [1, 1]

    _, fac = up_factor(up_from_ints([0, 0, 1], F5), F5)
    assert len(fac) == 1 and fac[0][1] == 2 and up_deg(fac[0][0]) == 1


def test_is_irreducible_examples():
    assert up_is_irreducible(up_from_ints([1, 0, 1], F7), F7)
    assert not up_is_irreducible(up_from_ints([1, 0, 1], F5), F5)  # (y-2)(y-3)
    assert up_is_irreducible(up_from_ints([-3, 1], F5), F5)


def test_factor_product_and_pattern_random():
    """is_irreducible(g) iff the factorization is one factor of full degree.

    The recomposition identity is asserted inside up_factor on every call.
    """
    rng = random.Random(42)
    fields = [F5, F7, F9, F8, F25]
    for t in range(10**4):
        F = fields[t % len(fields)]
        deg = rng.randrange(1, 5)
        poly = [F.element_from_code(rng.randrange(F.order)) for _ in range(deg)]
        poly.append(F.element_from_code(rng.randrange(1, F.order)))
        poly = up_trim(poly)
        if up_deg(poly) < 1:
            continue
        _, fac = up_factor(poly, F, seed=t)
        is_irr = len(fac) == 1 and fac[0][1] == 1 and up_deg(fac[0][0]) == up_deg(poly)
        assert up_is_irreducible(poly, F) == is_irr


def test_low_degree_matches_root_search():
    """Degree <= 3 over l < 100: roots from the factorization match enumeration
    and irreducibility equals rootlessness."""
    rng = random.Random(9)
    primes = [3, 5, 7, 11, 13, 41, 97]
    for _ in range(400):
        l = rng.choice(primes)
        F = ext_field(l, 1)
        deg = rng.randrange(1, 4)
        poly = [rng.randrange(l) for _ in range(deg)] + [rng.randrange(1, l)]
        poly = up_trim(poly)
        if up_deg(poly) < 1:
            continue
        roots = roots_by_enumeration(poly, F)
        _, fac = up_factor(poly, F, seed=7)
        linear_roots = []
        for g, mult in fac:
            if up_deg(g) == 1:
                linear_roots.extend([(-g[0]) % l] * 1)
        assert sorted(set(linear_roots)) == sorted(set(roots))
        assert up_has_root(poly, F) == bool(roots)
        if up_deg(poly) in (2, 3):
            assert up_is_irreducible(poly, F) == (not roots)


def test_factor_char2_extension_powers():
    # x^4 (x+1)^2 over F8 keeps its multiplicities through the char-2 path
    x = [F8.zero, F8.one]
    xp1 = [F8.one, F8.one]
    f = up_mul(up_mul(x, x, F8), xp1, F8)
    f = up_mul(f, f, F8)
    _, fac = up_factor(f, F8)
    assert sorted((up_deg(g), m) for g, m in fac) == [(1, 2), (1, 4)]


def test_factor_degrees_sorted_and_seed_stable():
    g = up_from_ints([2, 0, 3, 1], F7)
    assert up_factor_degrees(g, F7, seed=0) == up_factor_degrees(g, F7, seed=99)


def test_extension_splitting():
    # an F_l-irreducible quadratic always splits over F_{l^2}
    g5 = up_from_ints([2, 0, 1], F5)  # y^2 + 2 = y^2 - 3, irreducible over F5
    assert up_is_irreducible(g5, F5)
    g25 = up_from_ints([2, 0, 1], F25)
    assert not up_is_irreducible(g25, F25)
    _, fac = up_factor(g25, F25)
    assert sorted(up_deg(g) for g, _ in fac) == [1, 1]
