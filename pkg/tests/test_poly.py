"""Multivariate polynomials: parsing, printing, pullback, reductions."""

import random
from fractions import Fraction

import pytest

from certforge.errors import BadPrime, PolySyntaxError
from certforge.gf import ext_field
from certforge.poly import (
    MPolyQ,
    discriminant_quadratic,
    fiber_content_constant_mod,
    fiber_content_q,
    is_squarefree,
    parse_poly,
    poly_str,
    pullback,
    reduce_mod,
    square_decomposition,
    squarefree_part,
    variable_degrees_preserved_mod,
)

F5 = ext_field(5, 1)
F7 = ext_field(7, 1)


def rand_poly(rng, vars=("x1", "x2", "y"), nterms=4, cmax=3, emax=2):
    p = MPolyQ.const(0)
    for _ in range(nterms):
        t = MPolyQ.const(rng.randint(-cmax, cmax))
        for v in vars:
            t = t * MPolyQ.var(v) ** rng.randint(0, emax)
        p = p + t
    return p


# ---------------------------------------------------------------- parsing


def test_parse_examples():
    p = parse_poly("y^2 - x1 - x2 - 1")
    assert len(p.terms) == 4
    assert p.degree("y") == 2
    assert parse_poly("y") == MPolyQ.var("y")
    q = parse_poly("(1/2)*y^2 - t")
    assert q.coeff_in("y", 2) == MPolyQ.const(Fraction(1, 2))
    assert q.coeff_in("y", 0) == -MPolyQ.var("t")


def test_parse_print_roundtrip():
    rng = random.Random(2)
    for _ in range(200):
        p = rand_poly(rng)
        assert parse_poly(poly_str(p)) == p
    # canonical printing is idempotent through a parse
    text = "y^2 - x1 - x2 - 1"
    assert poly_str(parse_poly(text)) == text


def test_parse_errors_carry_positions():
    cases = {
        "2x1": 1,  # implicit multiplication
        "y^": 2,
        "y^x1": 2,
        "(y": 2,
        "x1 @ 2": 3,
    }
    for text, pos in cases.items():
        with pytest.raises(PolySyntaxError) as err:
            parse_poly(text)
        assert err.value.position >= 0
    with pytest.raises(PolySyntaxError):
        parse_poly("1/0")
    with pytest.raises(PolySyntaxError):
        parse_poly("x10")  # not in the variable universe
    with pytest.raises(PolySyntaxError):
        parse_poly("3 4")


def test_unary_minus_and_rationals():
    assert parse_poly("-y + 1") == MPolyQ.const(1) - MPolyQ.var("y")
    assert parse_poly("3/4") == MPolyQ.const(Fraction(3, 4))
    assert parse_poly("-3/4*y") == MPolyQ.const(Fraction(-3, 4)) * MPolyQ.var("y")


# ---------------------------------------------------------------- pullback


def test_pullback_examples():
    assert pullback(parse_poly("y^2 - x1"), 2) == parse_poly("y^2 - x1^2")
    f = parse_poly("y^2 - x1 - x2 - 1")
    assert pullback(f, 1) == f
    assert pullback(parse_poly("y^3 - x1*x2"), 3) == parse_poly("y^3 - x1^3*x2^3")


def test_pullback_leaves_non_torus_variables():
    f = parse_poly("y^2 - s - t - x1")
    g = pullback(f, 4)
    assert g == parse_poly("y^2 - s - t - x1^4")


def test_pullback_composes():
    rng = random.Random(4)
    for _ in range(80):
        f = rand_poly(rng)
        a, b = rng.randint(1, 4), rng.randint(1, 4)
        assert pullback(pullback(f, a), b) == pullback(f, a * b)


# ---------------------------------------------------------------- reduction


def test_reduce_mod_examples():
    rp = reduce_mod(parse_poly("y^2 - 6"), 7)
    coeffs, full = rp.specialize({}, F7)
    assert coeffs == [1, 0, 1] and full

    with pytest.raises(BadPrime):
        reduce_mod(parse_poly("(1/3)*y^2 - 1"), 3)

    rp = reduce_mod(parse_poly("y^2 - x1"), 5)
    coeffs, full = rp.specialize({"x1": 0}, F5)
    assert coeffs == [0, 0, 1] and full


def test_reduce_mod_leading_drop():
    with pytest.raises(BadPrime):
        reduce_mod(parse_poly("3*y^2 + x1"), 3)


def test_specialize_examples():
    rp = reduce_mod(parse_poly("y^2 - x1 - x2 - 1"), 7)
    coeffs, full = rp.specialize({"x1": 2, "x2": 3}, F7)
    assert coeffs == [1, 0, 1] and full  # y^2 - 6 = y^2 + 1

    rp = reduce_mod(parse_poly("x1*y - 1"), 5)
    coeffs, full = rp.specialize({"x1": 0}, F5)
    assert full is False and coeffs == [4]


def test_reduce_specialize_commutes_with_exact_evaluation():
    """Reducing then specializing equals evaluating over Q then reducing, for
    integral inputs and l-unit points."""
    rng = random.Random(8)
    for _ in range(120):
        f = rand_poly(rng).primitive_integral()
        if f.degree("y") < 1:
            continue
        l = rng.choice([5, 7, 11])
        point = {"x1": Fraction(rng.randint(-4, 4)), "x2": Fraction(rng.randint(-4, 4))}
        try:
            rp = reduce_mod(f, l)
        except BadPrime:
            continue
        vals = {k: int(v) % l for k, v in point.items()}
        coeffs_mod, _ = rp.specialize(vals, ext_field(l, 1))
        coeffs_q = f.fiber_coeffs_q(point)
        reduced_q = [int(c) % l for c in coeffs_q]
        while reduced_q and reduced_q[-1] == 0:
            reduced_q.pop()
        assert coeffs_mod == reduced_q, (poly_str(f), l, point)


# ---------------------------------------------------------------- squarefree


def test_squarefree_part_examples():
    assert squarefree_part(parse_poly("4*x1^2")) == parse_poly("x1")
    g = parse_poly("x1^2 + x2^2 + 1")
    assert squarefree_part(g) == g
    h = (parse_poly("x1 + 1") ** 2) * parse_poly("x1 - 1")
    assert squarefree_part(h) == parse_poly("x1^2 - 1")


def test_squarefree_part_square_collapse():
    rng = random.Random(10)
    for _ in range(40):
        g = rand_poly(rng, vars=("x1", "x2"), nterms=3, emax=1)
        h = rand_poly(rng, vars=("x1", "x2"), nterms=3, emax=1)
        if g.is_zero() or h.is_zero():
            continue
        lhs = squarefree_part(g * g * h)
        rhs = squarefree_part(g * h)
        assert lhs == rhs, (poly_str(g), poly_str(h))


def test_square_decomposition():
    c, root, ok = square_decomposition(parse_poly("4*x1^2"))
    assert ok and c == 4 and root == parse_poly("x1")
    _, _, ok = square_decomposition(parse_poly("4*x1^2 + 4"))
    assert not ok
    c, _, ok = square_decomposition(parse_poly("2*x1^2"))
    assert ok and c == 2  # a square over QQbar, not over Q
    _, _, ok = square_decomposition(parse_poly("7"))
    assert ok  # constants are squares over QQbar


def test_is_squarefree():
    assert is_squarefree(parse_poly("y^2 - x1"))
    assert not is_squarefree(parse_poly("y^2 - 2*x1*y + x1^2"))


def test_fiber_content():
    assert fiber_content_q(parse_poly("y^2 - x1 - 1")).is_constant()
    c = fiber_content_q(parse_poly("x1*y^2 - x1"))
    assert c == parse_poly("x1")
    assert fiber_content_constant_mod(parse_poly("y^2 - x1 - 1"), 5)
    assert not fiber_content_constant_mod(parse_poly("x1*y^2 - x1"), 5)


def test_variable_degree_preservation():
    assert variable_degrees_preserved_mod(parse_poly("y^2 - x1"), 5)
    assert not variable_degrees_preserved_mod(parse_poly("5*x1*y + y + 1"), 5)


def test_discriminant_quadratic():
    assert discriminant_quadratic(parse_poly("y^2 - x1 - 1")) == parse_poly("4*x1 + 4")
    with pytest.raises(ValueError):
        discriminant_quadratic(parse_poly("y^3 - x1"))


def test_primitive_integral():
    p = parse_poly("(1/3)*y^2 - 1").primitive_integral()
    assert p == parse_poly("y^2 - 3")
    q = parse_poly("-2*y^2 + 4*x1").primitive_integral()
    assert q == parse_poly("y^2 - 2*x1")


def test_exact_fiber_coeffs():
    f = parse_poly("y^2 - x1 - x2 - 1")
    coeffs = f.fiber_coeffs_q({"x1": Fraction(2) ** 7, "x2": Fraction(3) ** 7})
    assert coeffs == [Fraction(-2316), Fraction(0), Fraction(1)]
