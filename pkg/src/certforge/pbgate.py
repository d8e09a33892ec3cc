"""Pull-back stability gate for covers of the torus.

A cover is given by a squarefree polynomial f with a distinguished fiber
variable; the gate decides whether pulling the cover back along the
multiplication-by-d map keeps it irreducible over QQbar (it suffices to test
m = d).  Certified verdicts carry machine-checkable witnesses:

* absolute irreducibility is certified by a specialization point over
  F_{l^L}, L = lcm(1..d), at which the fiber polynomial keeps full degree and
  is irreducible over F_{l^L}.  Any QQbar-factorization with positive fiber
  degrees would be defined over a number field of degree at most d, whose
  residue field at a place above l embeds into F_{l^L}, so the specialized
  fiber would split there.  Degree preservation in every variable and a
  constant fiber-content mod l rule out factors collapsing under reduction.
* for quadratics the discriminant route is exact and complete: the pullback
  splits over QQbar[x] iff its fiber discriminant is a perfect square there,
  i.e. iff every squarefree factor occurs with even multiplicity.
* reducibility is certified by an explicit factor, re-verified by exact
  multiplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import poly
from .arith import divisors, primes_up_to
from .errors import BadPrime, NotApplicable, PreconditionFailed
from .gf import ext_field, up_is_irreducible
from .poly import MPolyQ, parse_poly, poly_str

_EXT_ORDER_CAP = 1 << 40


@dataclass(frozen=True)
class CoverSpec:
    """A cover of G_m^r (x G_a when has_additive): fiber polynomial + shape."""

    f: MPolyQ
    r: int
    has_additive: bool
    d: int
    fiber_var: str = "y"

    @staticmethod
    def ingest(f: MPolyQ, r: Optional[int] = None, fiber_var: str = "y") -> "CoverSpec":
        """Normalize to primitive-integral form and validate the invariants."""
        d = f.degree(fiber_var)
        if d < 1:
            raise ValueError(f"cover polynomial must involve {fiber_var}")
        torus_used = [v for v in f.variables if v in poly.TORUS_VARS]
        max_index = max((int(v[1:]) for v in torus_used), default=0)
        if r is None:
            r = max(max_index, 1)
        if max_index > r:
            raise ValueError(f"cover uses {torus_used} but rank is {r}")
        bad = [v for v in f.variables if v not in poly.TORUS_VARS and v not in (fiber_var, "s")]
        if bad:
            raise ValueError(f"unexpected variables {bad} in a cover polynomial")
        g = f.primitive_integral()
        if not poly.is_squarefree(g):
            raise ValueError("cover polynomial has repeated factors; covers are reduced")
        return CoverSpec(g, r, "s" in f.variables, d, fiber_var)

    def canonical(self) -> str:
        extra = ";additive" if self.has_additive else ""
        return f"cover:r={self.r};fiber={self.fiber_var}{extra};f={poly_str(self.f)}"


@dataclass(frozen=True)
class AbsIrredWitness:
    """Re-checkable evidence that a polynomial is irreducible over QQbar.

    kind 'point': specialization witness (l, L, point over F_{l^L}).
    kind 'discriminant': quadratic route; disc has a nonconstant odd part.
    kind 'linear': degree 1 with constant fiber content.
    """

    kind: str
    fiber_var: str = "y"
    l: int = 0
    ext_degree: int = 0
    point_vars: tuple[str, ...] = ()
    point_codes: tuple[int, ...] = ()
    disc: str = ""


@dataclass
class AbsIrredResult:
    witness: Optional[AbsIrredWitness]
    certified_reducible: bool = False
    reason: str = ""
    primes_tried: int = 0
    points_tried: int = 0

    @property
    def ok(self) -> bool:
        return self.witness is not None


@dataclass
class AbsBudget:
    max_prime: int = 400
    max_points: int = 400


def _lcm_upto(d: int) -> int:
    return math.lcm(*range(1, d + 1))


def _deterministic_points(F, nvars: int, count: int, salt: int):
    """Fixed pseudorandom point sequence over F^nvars (witnesses are
    independently re-checkable, so only determinism matters here)."""
    import random

    rng = random.Random((salt << 20) ^ F.order)
    for _ in range(count):
        yield tuple(F.element_from_code(rng.randrange(F.order)) for _ in range(nvars))


def abs_irreducible(f: MPolyQ, fiber_var: str = "y", budget: Optional[AbsBudget] = None) -> AbsIrredResult:
    """Certify irreducibility of f over QQbar, or report reducible/Unknown.

    Degrees 1 and 2 are decided exactly (content / discriminant); degree >= 3
    searches specialization witnesses over F_{l^L} within the budget.
    """
    budget = budget or AbsBudget()
    d = f.degree(fiber_var)
    if d < 1:
        raise ValueError("fiber degree must be >= 1")
    content = poly.fiber_content_q(f, fiber_var)
    if not content.is_constant():
        return AbsIrredResult(None, certified_reducible=True, reason="nonconstant fiber content")
    if d == 1:
        return AbsIrredResult(AbsIrredWitness("linear", fiber_var))
    if d == 2:
        disc = poly.discriminant_quadratic(f, fiber_var)
        if disc.is_zero():
            return AbsIrredResult(None, certified_reducible=True, reason="zero discriminant")
        _, _, is_square = poly.square_decomposition(disc)
        if is_square:
            return AbsIrredResult(None, certified_reducible=True, reason="square discriminant")
        return AbsIrredResult(AbsIrredWitness("discriminant", fiber_var, disc=poly_str(disc)))
    L = _lcm_upto(d)
    primes_tried = points_tried = 0
    for l in primes_up_to(budget.max_prime):
        if l == 2 or l**L > _EXT_ORDER_CAP:
            continue
        try:
            rp = poly.reduce_mod(f, l, fiber_var)
        except BadPrime:
            continue
        if not poly.variable_degrees_preserved_mod(f, l):
            continue
        if not poly.fiber_content_constant_mod(f, l, fiber_var):
            continue
        primes_tried += 1
        F = ext_field(l, L)
        for point in _deterministic_points(F, len(rp.point_vars), budget.max_points, l):
            points_tried += 1
            coeffs, full = rp.specialize(dict(zip(rp.point_vars, point)), F)
            if not full:
                continue
            if up_is_irreducible(coeffs, F):
                codes = tuple(F.element_code(v) for v in point)
                w = AbsIrredWitness("point", fiber_var, l, L, rp.point_vars, codes)
                return AbsIrredResult(w, primes_tried=primes_tried, points_tried=points_tried)
    return AbsIrredResult(
        None,
        reason=f"budget exhausted ({primes_tried} primes, {points_tried} points)",
        primes_tried=primes_tried,
        points_tried=points_tried,
    )


def verify_abs_witness(f: MPolyQ, w: AbsIrredWitness) -> bool:
    """Independent recheck of an irreducibility witness."""
    fiber_var = w.fiber_var
    d = f.degree(fiber_var)
    if d < 1:
        return False
    if not poly.fiber_content_q(f, fiber_var).is_constant():
        return False
    if w.kind == "linear":
        return d == 1
    if w.kind == "discriminant":
        if d != 2:
            return False
        disc = poly.discriminant_quadratic(f, fiber_var)
        if poly_str(disc) != w.disc or disc.is_zero():
            return False
        _, _, is_square = poly.square_decomposition(disc)
        return not is_square
    if w.kind == "point":
        if w.ext_degree != _lcm_upto(d):
            return False
        try:
            rp = poly.reduce_mod(f, w.l, fiber_var)
        except BadPrime:
            return False
        if not poly.variable_degrees_preserved_mod(f, w.l):
            return False
        if not poly.fiber_content_constant_mod(f, w.l, fiber_var):
            return False
        if tuple(rp.point_vars) != tuple(w.point_vars):
            return False
        F = ext_field(w.l, w.ext_degree)
        point = [F.element_from_code(c) for c in w.point_codes]
        coeffs, full = rp.specialize(dict(zip(w.point_vars, point)), F)
        return full and up_is_irreducible(coeffs, F)
    return False


# ------------------------------------------------------------------------------
# explicit factor detection for pullbacks


def _monomial_divisor_candidates(p: MPolyQ) -> list[MPolyQ]:
    """Monomials dividing every term of p (exponent-wise minimum)."""
    if p.is_zero():
        return []
    mins = [min(e[i] for e in p.terms) for i in range(len(p.variables))]
    out = []

    def rec(i: int, acc: MPolyQ):
        if i == len(p.variables):
            out.append(acc)
            return
        for k in range(mins[i] + 1):
            rec(i + 1, acc * MPolyQ.var(p.variables[i]) ** k)

    rec(0, MPolyQ.const(1))
    return out


def _sqf_divisor_candidates(p: MPolyQ, cap: int = 200) -> list[MPolyQ]:
    """Divisor candidates built from the squarefree decomposition of p."""
    import sympy

    if p.is_zero() or p.is_constant():
        return []
    _, factors = sympy.sqf_list(poly.to_sympy(p))
    out: list[MPolyQ] = [MPolyQ.const(1)]
    for fac, mult in factors:
        base = poly.from_sympy(fac)
        new = []
        for cand in out:
            for k in range(mult + 1):
                new.append(cand * base**k)
                if len(new) >= cap:
                    break
            if len(new) >= cap:
                break
        out = new
    return [c for c in out if not c.is_constant()]


def _int_content(p: MPolyQ) -> int:
    """Gcd of the integer numerators (caller supplies integral polynomials)."""
    if p.is_zero():
        return 1
    return math.gcd(*(abs(c.numerator) for c in p.terms.values())) or 1


def _constant_candidates(trail: MPolyQ, lead: MPolyQ) -> list[Fraction]:
    """Rational-root-theorem candidates u/w: u | content(trail), w | content(lead)."""
    vals = set()
    for u in divisors(_int_content(trail)):
        for w in divisors(_int_content(lead)):
            vals.add(Fraction(u, w))
            vals.add(Fraction(-u, w))
    return sorted(vals, key=lambda v: (abs(v), v < 0))


def _synthetic_divide(h: MPolyQ, root: MPolyQ, zvar_powers: list[MPolyQ]) -> Optional[list[MPolyQ]]:
    """Divide sum_k H_k z^k by (z - root); returns quotient coefficients or
    None when the remainder is nonzero.  zvar_powers[k] = H_k."""
    deg = len(zvar_powers) - 1
    quot = [MPolyQ.const(0)] * deg
    carry = zvar_powers[deg]
    for k in range(deg - 1, -1, -1):
        quot[k] = carry
        carry = zvar_powers[k] + root * carry
    if not carry.is_zero():
        return None
    return quot


def _find_power_factor(g: MPolyQ, fiber_var: str) -> Optional[tuple[MPolyQ, MPolyQ]]:
    """Search a proper factor of the form fiber^e - u(x) (e >= 1) of g.

    Covers degree-1-in-fiber factors (e = 1) and collapsed-power factors found
    by viewing g as a polynomial in fiber^e.  Every hit is verified by exact
    division, so false positives are impossible; misses just mean Unknown.
    """
    d = g.degree(fiber_var)
    if fiber_var not in g.variables:
        return None
    fiber_idx = g.variables.index(fiber_var)
    exps = sorted({e[fiber_idx] for e in g.terms} - {0})
    if not exps:
        return None
    gcd_exp = math.gcd(*exps)
    for e in sorted(divisors(gcd_exp)):
        if e >= d:
            break
        # view g as a polynomial in z = fiber^e
        zdeg = d // e
        coeffs = [g.coeff_in(fiber_var, k * e) for k in range(zdeg + 1)]
        lead, trail = coeffs[-1], coeffs[0]
        if trail.is_zero():
            continue  # zero constant term means nonconstant content, handled upstream
        consts = _constant_candidates(trail, lead)
        monos = _monomial_divisor_candidates(trail)
        sqfs = _sqf_divisor_candidates(trail)
        bases = [MPolyQ.const(1)] + monos + sqfs + [m * s for m in monos for s in sqfs][:100]
        seen = set()
        for base in bases:
            for c in consts:
                root = MPolyQ.const(c) * base
                key = poly_str(root)
                if key in seen:
                    continue
                seen.add(key)
                quot = _synthetic_divide(g, root, coeffs)
                if quot is None:
                    continue
                factor = MPolyQ.var(fiber_var) ** e - root
                cofactor = MPolyQ.const(0)
                for k, qk in enumerate(quot):
                    cofactor = cofactor + qk * MPolyQ.var(fiber_var) ** (k * e)
                if factor * cofactor == g:
                    return factor, cofactor
    return None


@dataclass
class NotPBEvidence:
    """Machine-checkable reducibility evidence for a pullback."""

    kind: str  # "explicit_factor" | "square_discriminant" | "content_factor"
    m: int
    factor: str = ""
    cofactor: str = ""
    disc: str = ""
    sqrt_constant: str = ""
    sqrt_poly: str = ""


@dataclass
class PBVerdict:
    status: str  # "certified_pb" | "certified_not_pb" | "unknown"
    witness: Optional[AbsIrredWitness] = None
    evidence: Optional[NotPBEvidence] = None
    reason: str = ""
    budget_report: str = ""


def pb_check(cover: CoverSpec, budget: Optional[AbsBudget] = None) -> PBVerdict:
    """Decide pull-back stability through the single test at m = deg(cover)."""
    base = abs_irreducible(cover.f, cover.fiber_var, budget)
    if not base.ok:
        detail = "reducible" if base.certified_reducible else f"unknown ({base.reason})"
        raise PreconditionFailed(f"cover polynomial is not certified irreducible: {detail}")
    d = cover.d
    g = poly.pullback(cover.f, d)
    content = poly.fiber_content_q(g, cover.fiber_var)
    if not content.is_constant():
        ev = NotPBEvidence("content_factor", d, factor=poly_str(content))
        return PBVerdict("certified_not_pb", evidence=ev)
    hit = _find_power_factor(g, cover.fiber_var)
    if hit:
        factor, cofactor = hit
        ev = NotPBEvidence(
            "explicit_factor", d, factor=poly_str(factor), cofactor=poly_str(cofactor)
        )
        return PBVerdict("certified_not_pb", evidence=ev)
    if d == 2:
        disc = poly.discriminant_quadratic(g, cover.fiber_var)
        c, root, is_square = poly.square_decomposition(disc)
        if is_square:
            ev = NotPBEvidence(
                "square_discriminant",
                d,
                disc=poly_str(disc),
                sqrt_constant=str(c),
                sqrt_poly=poly_str(root),
            )
            return PBVerdict("certified_not_pb", evidence=ev)
        return PBVerdict(
            "certified_pb",
            witness=AbsIrredWitness("discriminant", cover.fiber_var, disc=poly_str(disc)),
        )
    res = abs_irreducible(g, cover.fiber_var, budget)
    if res.ok:
        return PBVerdict("certified_pb", witness=res.witness)
    if res.certified_reducible:
        return PBVerdict("certified_not_pb", reason=res.reason)
    return PBVerdict(
        "unknown",
        reason=res.reason,
        budget_report=f"primes={res.primes_tried} points={res.points_tried}",
    )


def verify_not_pb_evidence(cover: CoverSpec, ev: NotPBEvidence) -> bool:
    """Recheck reducibility evidence by exact reconstruction."""
    g = poly.pullback(cover.f, ev.m)
    if ev.kind == "explicit_factor":
        factor = parse_poly(ev.factor)
        cofactor = parse_poly(ev.cofactor)
        deg = factor.degree(cover.fiber_var)
        return 1 <= deg < cover.d and factor * cofactor == g
    if ev.kind == "content_factor":
        content = poly.fiber_content_q(g, cover.fiber_var)
        return not content.is_constant() and poly_str(content) == ev.factor
    if ev.kind == "square_discriminant":
        if cover.d != 2:
            return False
        disc = poly.discriminant_quadratic(g, cover.fiber_var)
        if poly_str(disc) != ev.disc:
            return False
        c = Fraction(ev.sqrt_constant)
        root = parse_poly(ev.sqrt_poly)
        return MPolyQ.const(c) * root * root == disc
    return False


@dataclass
class IsogenyFactor:
    m: int
    factor: MPolyQ
    residual_degree: int  # fiber degree of the factor; 1 means the cover is
    # birationally a coordinate of an isogeny pullback


def isogeny_factor_report(cover: CoverSpec, verdict: PBVerdict) -> IsogenyFactor:
    """Repackage a reducibility witness as an isogeny-factor report.

    Scans m over the divisors of d (smallest first) for a proper factor of the
    m-pullback; raises NotApplicable when the verdict carries no usable factor.
    """
    if verdict.status != "certified_not_pb":
        raise NotApplicable("verdict is not a certified reducibility")
    for m in sorted(divisors(cover.d)):
        if m < 2:
            continue
        g = poly.pullback(cover.f, m)
        hit = _find_power_factor(g, cover.fiber_var)
        if hit:
            factor, _ = hit
            return IsogenyFactor(m, factor, factor.degree(cover.fiber_var))
        if cover.d == 2:
            disc = poly.discriminant_quadratic(g, cover.fiber_var)
            c, root, is_square = poly.square_decomposition(disc)
            sqrt_c = poly.rational_square_root(c) if is_square else None
            if is_square and sqrt_c is not None:
                # monic-normalized explicit root of the quadratic
                a = g.coeff_in(cover.fiber_var, 2)
                b = g.coeff_in(cover.fiber_var, 1)
                if a.is_constant():
                    aval = a.constant_value()
                    u = (MPolyQ.const(sqrt_c) * root - b) * MPolyQ.const(Fraction(1, 2) / aval)
                    factor = MPolyQ.var(cover.fiber_var) - u
                    if factor * (MPolyQ.const(aval) * (MPolyQ.var(cover.fiber_var)) + (b + MPolyQ.const(aval) * u)) == g:
                        return IsogenyFactor(m, factor, 1)
    if verdict.evidence and verdict.evidence.kind == "explicit_factor":
        factor = parse_poly(verdict.evidence.factor)
        return IsogenyFactor(cover.d, factor, factor.degree(cover.fiber_var))
    raise NotApplicable("no explicit factor available")
