"""Kernel arithmetic: frozen examples come from the in-file oracles."""

import math
import random
from fractions import Fraction

import pytest

from certforge.arith import (
    CongruenceClass,
    crt,
    discrete_log,
    divisors,
    dth_power_residue,
    factorize,
    int_nth_root,
    is_perfect_dth_power,
    is_prime,
    jacobi,
    legendre,
    mult_independent,
    mult_order,
    primes_up_to,
)
from certforge.errors import BoundExceeded


# ---------------------------------------------------------------- oracles


def trial_division_is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def trial_division_factor(n: int) -> dict[int, int]:
    out = {}
    n = abs(n)
    f = 2
    while f * f <= n:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def exhaustive_crt(classes):
    mod = math.lcm(*(c.modulus for c in classes))
    hits = [x for x in range(mod) if all(x % c.modulus == c.residue for c in classes)]
    if not hits:
        return None
    return CongruenceClass(hits[0], mod)


def powering_order(g: int, l: int) -> int:
    e, t = g % l, 1
    while e != 1:
        e = e * g % l
        t += 1
    return t


def powering_dlog(g: int, h: int, l: int):
    e = 1
    for n in range(l):
        if e == h % l:
            return n
        e = e * g % l
    return None


def enumerated_power_set(d: int, l: int) -> set[int]:
    return {pow(x, d, l) for x in range(1, l)}


# ---------------------------------------------------------------- primality


def test_is_prime_examples():
    assert is_prime(2)
    assert not is_prime(1)
    # 3215031751 is a strong pseudoprime to bases 2,3,5,7; the oracle says composite
    assert trial_division_is_prime(3215031751) is False
    assert not is_prime(3215031751)


def test_is_prime_against_trial_division():
    for n in range(2000):
        assert is_prime(n) == trial_division_is_prime(n), n


def test_is_prime_large():
    assert is_prime((1 << 89) - 1)  # Mersenne prime, above the 64-bit split
    assert not is_prime((1 << 67) - 1)
    assert not is_prime((1 << 89) - 3)


def test_primes_up_to():
    assert primes_up_to(20) == [2, 3, 5, 7, 11, 13, 17, 19]


# ---------------------------------------------------------------- factorize


def test_factorize_examples():
    f = factorize(12)
    assert f.sign == 1 and f.factors == {2: 2, 3: 1}
    f = factorize(-5)
    assert f.sign == -1 and f.factors == {5: 1}
    assert trial_division_factor(276) == {2: 2, 3: 1, 23: 1}
    assert factorize(276).factors == {2: 2, 3: 1, 23: 1}
    assert factorize(0).sign == 0 and factorize(0).factors == {}
    assert factorize(1).sign == 1 and factorize(1).factors == {}


def test_factorize_recompose_and_primality_of_keys():
    rng = random.Random(11)
    for _ in range(200):
        n = rng.randint(-10**9, 10**9)
        f = factorize(n)
        assert f.recompose() == n
        assert all(is_prime(p) for p in f.factors)


def test_factorize_semiprime_via_rho():
    n = 1000003 * 1000033  # both above the trial-division cutoff
    assert factorize(n).factors == {1000003: 1, 1000033: 1}


def test_factorize_bound():
    with pytest.raises(BoundExceeded):
        factorize(1 << 130)


def test_divisors():
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert divisors(-5) == [1, 5]


# ---------------------------------------------------------------- crt


def test_crt_examples():
    assert crt([CongruenceClass(1, 2), CongruenceClass(2, 3)]) == CongruenceClass(5, 6)
    assert crt([CongruenceClass(0, 2), CongruenceClass(1, 2)]) is None
    want = exhaustive_crt([CongruenceClass(1, 4), CongruenceClass(3, 6)])
    assert want == CongruenceClass(9, 12)
    assert crt([CongruenceClass(1, 4), CongruenceClass(3, 6)]) == want


def test_crt_random_against_exhaustive_search():
    rng = random.Random(5)
    for _ in range(10**4):
        classes = [
            CongruenceClass(rng.randrange(m), m)
            for m in (rng.randint(1, 20) for _ in range(rng.randint(1, 3)))
        ]
        got = crt(classes)
        want = exhaustive_crt(classes)
        assert got == want, classes
        if got is not None:
            assert all(got.residue % c.modulus == c.residue for c in classes)


# ---------------------------------------------------------------- orders, dlogs


def test_mult_order_examples():
    assert powering_order(2, 7) == 3
    assert mult_order(2, 7) == 3
    assert powering_order(2, 5) == 4
    assert mult_order(2, 5) == 4
    assert mult_order(1, 13) == 1


def test_mult_order_properties():
    rng = random.Random(7)
    for _ in range(300):
        l = rng.choice([p for p in primes_up_to(500) if p > 2])
        g = rng.randrange(1, l)
        t = mult_order(g, l)
        assert (l - 1) % t == 0
        assert pow(g, t, l) == 1
        for p in factorize(t).factors:
            assert pow(g, t // p, l) != 1


def test_discrete_log_examples():
    assert powering_dlog(2, 3, 5) == 3
    assert discrete_log(2, 3, 5) == 3
    assert discrete_log(2, 1, 7) == 0
    # the exhaustive-powering oracle: 4^2 = 16 = 2 mod 7, so the answer is 2
    assert powering_dlog(4, 2, 7) == 2
    assert discrete_log(4, 2, 7) == 2
    assert powering_dlog(2, 3, 7) is None
    assert discrete_log(2, 3, 7) is None


def test_discrete_log_matches_exhaustive_powering():
    rng = random.Random(13)
    odd_primes = [p for p in primes_up_to(5000) if p > 2]
    for _ in range(200):
        l = rng.choice(odd_primes)
        g = rng.randrange(2, l)
        h = rng.randrange(1, l)
        assert discrete_log(g, h, l) == powering_dlog(g, h, l), (g, h, l)


def test_dth_power_residue_examples():
    assert 2 in enumerated_power_set(2, 7)
    assert dth_power_residue(2, 2, 7)
    assert 2 not in enumerated_power_set(2, 5)
    assert not dth_power_residue(2, 2, 5)
    assert dth_power_residue(1, 9, 13)


def test_dth_power_residue_matches_enumeration():
    for l in primes_up_to(499):
        if l == 2:
            continue
        for d in range(2, 7):
            powers = enumerated_power_set(d, l)
            for a in range(1, l):
                assert dth_power_residue(a, d, l) == (a in powers), (a, d, l)


# ---------------------------------------------------------------- independence


def recompose(xs, e):
    acc = Fraction(1)
    for x, k in zip(xs, e):
        acc *= Fraction(x) ** k
    return acc


def no_small_relation(xs, bound=5):
    """Exhaustive small-exponent search oracle for independence."""
    import itertools

    r = len(xs)
    for e in itertools.product(range(-bound, bound + 1), repeat=r):
        if any(e) and recompose(xs, e) == 1:
            return False
    return True


def test_mult_independent_examples():
    assert mult_independent([Fraction(2), Fraction(3)]) is None
    e = mult_independent([Fraction(4), Fraction(8)])
    assert e is not None and recompose([4, 8], e) == 1
    # the canonical relation 4^3 = 8^2 is proportional to the returned vector
    assert e[0] * 2 == -e[1] * 3 or e == (3, -2)
    assert mult_independent([Fraction(6), Fraction(10), Fraction(15)]) is None


def test_mult_independent_signs():
    e = mult_independent([Fraction(-1)])
    assert e == (2,) and recompose([-1], e) == 1
    e = mult_independent([Fraction(2), Fraction(-8)])
    assert e is not None and recompose([2, -8], e) == 1
    e = mult_independent([Fraction(-2), Fraction(-8)])
    assert e is not None and recompose([-2, -8], e) == 1


def test_mult_independent_random():
    rng = random.Random(23)
    pool = [Fraction(n, d) for n in range(-9, 10) for d in range(1, 10) if n]
    for _ in range(150):
        xs = [rng.choice(pool) for _ in range(rng.randint(1, 3))]
        e = mult_independent(xs)
        if e is None:
            assert no_small_relation(xs), xs
        else:
            assert any(e) and recompose(xs, e) == 1, (xs, e)


def test_mult_independent_rejects_zero():
    with pytest.raises(ValueError):
        mult_independent([Fraction(0), Fraction(2)])


# ---------------------------------------------------------------- roots


def test_int_nth_root_and_powers():
    assert int_nth_root(2316, 2) == 48
    assert int_nth_root(2401, 2) == 49
    for v, d, want in [(64, 3, True), (-8, 3, True), (-4, 2, False), (1, 5, True), (0, 2, True)]:
        assert is_perfect_dth_power(v, d) == want
    rng = random.Random(3)
    for _ in range(300):
        v = rng.randint(0, 10**12)
        d = rng.randint(2, 5)
        r = int_nth_root(v, d)
        assert r**d <= v < (r + 1) ** d


def test_jacobi_matches_legendre():
    for l in (3, 5, 7, 11, 13):
        for a in range(1, l):
            assert jacobi(a, l) == legendre(a, l)
