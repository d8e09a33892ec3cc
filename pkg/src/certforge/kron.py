"""Exponent-substitution irreducibility reports.

kron_scan certifies, for each m in a range, that collapsing the torus
variables through (x1, ..., xn) -> (t, t^m, ..., t^(m^(n-1))) keeps the
polynomial irreducible over QQbar; the quadratic case is decided exactly by
the discriminant-square criterion and higher degrees by the generic
specialization certificate.  subgroup_scan probes exponent vectors against
root-of-unity twists realized inside a chosen F_l and flags candidates for
the exceptional set (vectors where some twist certifiably splits the
polynomial, or that stay undecided).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from . import poly
from .arith import mult_order
from .errors import PreconditionFailed
from .gf import (
    PrimeField,
    ext_field,
    squarefree_decomposition,
    up_deg,
    up_is_irreducible,
    up_trim,
)
from .pbgate import AbsBudget, AbsIrredResult, CoverSpec, abs_irreducible, pb_check
from .poly import MPolyQ, poly_str
from .torus import Verdict

_EXT_ORDER_CAP = 1 << 40


def kron_substitute(f: MPolyQ, exponents: list[int]) -> tuple[MPolyQ, bool]:
    """Substitute xi -> t^(exponents[i]); negative exponents are cleared by a
    global t-power (Laurent normalization).  Returns (result, collapsed) where
    collapsed reports merged or cancelled terms (dependent exponent data)."""
    if any(a == 0 for a in exponents):
        raise ValueError("exponents must be nonzero")
    xvars = [v for v in f.variables if v in poly.TORUS_VARS]
    if any(v not in poly.TORUS_VARS and v != "y" for v in f.variables):
        raise ValueError("input must use torus variables and y only")
    max_index = max((int(v[1:]) for v in xvars), default=0)
    if max_index > len(exponents):
        raise ValueError(f"need {max_index} exponents, got {len(exponents)}")
    exp_of = {v: exponents[int(v[1:]) - 1] for v in xvars}
    raw: dict[tuple[int, int], object] = {}
    monomial_images: dict[tuple[int, ...], int] = {}
    for e, c in f.terms.items():
        t_exp = 0
        y_exp = 0
        x_part = []
        for v, k in zip(f.variables, e):
            if v == "y":
                y_exp = k
            else:
                t_exp += exp_of[v] * k
                x_part.append(k)
        monomial_images[tuple(x_part)] = t_exp
        key = (t_exp, y_exp)
        raw[key] = raw.get(key, 0) + c
    raw = {k: c for k, c in raw.items() if c != 0}
    # collapse: distinct x-monomials mapped to one t-power (dependent exponents)
    collapsed = len(set(monomial_images.values())) < len(monomial_images)
    if not raw:
        return MPolyQ.const(0), True
    low = min(t for t, _ in raw)
    shift = -low if low < 0 else 0
    tvar = MPolyQ.var("t")
    out = MPolyQ.const(0)
    for (t_exp, y_exp), c in raw.items():
        out = out + MPolyQ.const(c) * tvar ** (t_exp + shift) * MPolyQ.var("y") ** y_exp
    return out, collapsed


def bivariate_abs_irreducible(g: MPolyQ, budget: Optional[AbsBudget] = None) -> AbsIrredResult:
    """Specialization certificate for polynomials in (t, y); see the gate
    module for the soundness chain."""
    return abs_irreducible(g, "y", budget)


@dataclass(frozen=True)
class KronVerdict:
    m: int
    status: str  # "certified_irreducible" | "unknown"
    method: str = ""  # "discriminant" | "point"
    disc: str = ""
    note: str = ""


@dataclass(frozen=True)
class ExceptionalFlag:
    vector: tuple[int, ...]
    reason: str  # "zero_component" | "certified_split" | "undecided"
    torsion_order: int = 0
    theta_codes: tuple[int, ...] = ()


@dataclass(frozen=True)
class KronReport:
    poly_digest: str
    m_range: tuple[int, int]
    verdicts: tuple[KronVerdict, ...]
    vectors: tuple[tuple[int, ...], ...]
    exceptional: tuple[ExceptionalFlag, ...]
    torsion_orders: tuple[int, ...]
    subgroup_prime: int
    seed: int


def _verdict_for_substitution(g: MPolyQ, m: int, budget: Optional[AbsBudget]) -> KronVerdict:
    d = g.degree("y")
    if d < 1:
        return KronVerdict(m, "unknown", note="fiber degree collapsed")
    if not poly.fiber_content_q(g, "y").is_constant():
        return KronVerdict(m, "unknown", note="nonconstant fiber content")
    if d == 2:
        disc = poly.discriminant_quadratic(g, "y")
        if disc.is_zero():
            return KronVerdict(m, "unknown", note="zero discriminant")
        _, _, is_square = poly.square_decomposition(disc)
        if is_square:
            return KronVerdict(m, "unknown", method="discriminant", disc=poly_str(disc),
                               note="discriminant is a perfect square (certified split)")
        return KronVerdict(m, "certified_irreducible", method="discriminant", disc=poly_str(disc))
    res = bivariate_abs_irreducible(g, budget)
    if res.ok:
        return KronVerdict(m, "certified_irreducible", method="point")
    note = "certified split" if res.certified_reducible else res.reason
    return KronVerdict(m, "unknown", note=note)


def kron_scan(
    f: MPolyQ,
    m_range: tuple[int, int],
    budget: Optional[AbsBudget] = None,
    torsion_orders: tuple[int, ...] = (),
    vectors: tuple[tuple[int, ...], ...] = (),
    subgroup_prime: int = 0,
    seed: int = 0,
) -> KronReport:
    """Per-m verdicts for the geometric-series substitution (1, m, m^2, ...).

    Requires the pull-back gate on f itself (the substitution theorem's
    hypothesis); raises PreconditionFailed otherwise.
    """
    cover = CoverSpec.ingest(f)
    verdict = pb_check(cover, budget)
    if verdict.status != "certified_pb":
        raise PreconditionFailed(f"pull-back gate: {verdict.status}")
    n = cover.r
    lo, hi = m_range
    if lo > hi or lo < 2:
        raise ValueError("m range must satisfy 2 <= lo <= hi")
    verdicts = []
    for m in range(lo, hi + 1):
        exps = [m**i for i in range(n)]
        g, _ = kron_substitute(cover.f, exps)
        verdicts.append(_verdict_for_substitution(g, m, budget))
    vectors = tuple(tuple(v) for v in vectors)
    exceptional: tuple[ExceptionalFlag, ...] = ()
    if vectors:
        if not subgroup_prime:
            subgroup_prime = _default_subgroup_prime(torsion_orders)
        exceptional = tuple(
            subgroup_scan(cover.f, list(vectors), torsion_orders, subgroup_prime)
        )
    from .certificate import sha256_hex

    return KronReport(
        poly_digest=sha256_hex(cover.canonical()),
        m_range=(lo, hi),
        verdicts=tuple(verdicts),
        vectors=vectors,
        exceptional=exceptional,
        torsion_orders=tuple(torsion_orders),
        subgroup_prime=subgroup_prime,
        seed=seed,
    )


def _default_subgroup_prime(torsion_orders: tuple[int, ...]) -> int:
    """Smallest prime l with every requested torsion order dividing l - 1."""
    from .arith import next_prime

    target = math.lcm(*torsion_orders) if torsion_orders else 2
    l = 2
    while True:
        l = next_prime(l)
        if (l - 1) % target == 0:
            return l


def _roots_of_unity(l: int, h: int) -> list[int]:
    """All elements of F_l* of order dividing h (requires h | l-1)."""
    from .torus import _least_primitive_root

    g = _least_primitive_root(l)
    w = pow(g, (l - 1) // h, l)
    out = []
    seen = set()
    cur = 1
    for _ in range(h):
        if cur not in seen:
            out.append(cur)
            seen.add(cur)
        cur = cur * w % l
    return sorted(out)


def _substitute_mod(
    f: MPolyQ, vector: tuple[int, ...], theta: tuple[int, ...], l: int
) -> dict[tuple[int, int], int]:
    """xi -> theta_i * t^(a_i) over F_l; returns {(t_exp normalized, y_exp): coeff}."""
    g = f.primitive_integral()
    raw: dict[tuple[int, int], int] = {}
    xindex = {v: int(v[1:]) - 1 for v in g.variables if v in poly.TORUS_VARS}
    for e, c in g.terms.items():
        t_exp = 0
        y_exp = 0
        coeff = int(c) % l
        for v, k in zip(g.variables, e):
            if v == "y":
                y_exp = k
            else:
                i = xindex[v]
                t_exp += vector[i] * k
                coeff = coeff * pow(theta[i], k, l) % l
        key = (t_exp, y_exp)
        raw[key] = (raw.get(key, 0) + coeff) % l
    raw = {k: c for k, c in raw.items() if c}
    if not raw:
        return {}
    shift = min(t for t, _ in raw)
    return {(t - shift, y): c for (t, y), c in raw.items()}


def _coeff_polys_t(terms: dict[tuple[int, int], int], d: int) -> list[list[int]]:
    """Dense t-polynomials A_k with sum A_k(t) y^k, k = 0..d."""
    out = []
    for k in range(d + 1):
        entries = {t: c for (t, y), c in terms.items() if y == k}
        size = max(entries) + 1 if entries else 0
        dense = [0] * size
        for t, c in entries.items():
            dense[t] = c
        out.append(dense)
    return out


def _disc_is_square_mod(terms: dict[tuple[int, int], int], l: int) -> Optional[bool]:
    """Perfect-square test for the y-discriminant over F_l-bar[t]; None when the
    substituted polynomial is not honestly quadratic."""
    F = PrimeField(l)
    d = max((y for (_, y) in terms), default=0)
    if d != 2:
        return None
    a, b, c = (up_trim(x[:]) for x in _coeff_polys_t(terms, 2))
    from .gf import up_mul, up_scal, up_sub

    disc = up_sub(up_mul(b, b, F), up_scal(up_mul(a, c, F), F.from_int(4), F), F)
    if not disc:
        return True  # zero discriminant: certified split (repeated factor)
    if up_deg(disc) == 0:
        return True  # constants are squares over the algebraic closure
    return all(mult % 2 == 0 for _, mult in squarefree_decomposition(disc, F))


def _specialization_irreducible_mod(
    terms: dict[tuple[int, int], int], l: int, d: int, max_points: int = 200
) -> Optional[bool]:
    """Specialization certificate for d >= 3 over F_l: True when some t-point
    over F_{l^L} keeps degree d and is irreducible there; None when undecided."""
    L = math.lcm(*range(1, d + 1))
    if l**L > _EXT_ORDER_CAP:
        return None
    F = ext_field(l, L)
    coeff_polys = _coeff_polys_t(terms, d)
    import random

    rng = random.Random(l)
    for _ in range(max_points):
        t0 = F.element_from_code(rng.randrange(F.order))
        coeffs = []
        for dense in coeff_polys:
            acc = F.zero
            for c in reversed(dense):
                acc = F.add(F.mul(acc, t0), F.from_int(c))
            coeffs.append(acc)
        while coeffs and coeffs[-1] == F.zero:
            coeffs.pop()
        if len(coeffs) - 1 != d:
            continue
        if up_is_irreducible(coeffs, F):
            return True
    return None


def subgroup_scan(
    f: MPolyQ,
    vectors: list[tuple[int, ...]],
    torsion_orders: tuple[int, ...],
    l: int,
) -> list[ExceptionalFlag]:
    """Probe exponent vectors with root-of-unity twists inside F_l*.

    A vector is flagged when a component vanishes, when some twist yields a
    certified split (square discriminant for quadratics), or when no
    certificate materializes (reported as undecided).  Flags are candidate
    members of the exceptional set: small-field coincidences can flag vectors
    that are unexceptional over QQbar.
    """
    g = f.primitive_integral()
    n = len([v for v in g.variables if v in poly.TORUS_VARS])
    d = g.degree("y")
    flags: list[ExceptionalFlag] = []
    for vector in vectors:
        vector = tuple(vector)
        if len(vector) != n:
            raise ValueError(f"vector {vector} has wrong length (need {n})")
        if any(a == 0 for a in vector):
            flags.append(ExceptionalFlag(vector, "zero_component"))
            continue
        flagged = None
        undecided = None
        for h in torsion_orders:
            if (l - 1) % h != 0:
                continue
            mu = _roots_of_unity(l, h)
            for idx in range(len(mu) ** n):
                rem = idx
                theta = []
                for _ in range(n):
                    rem, j = divmod(rem, len(mu))
                    theta.append(mu[j])
                theta = tuple(theta)
                terms = _substitute_mod(g, vector, theta, l)
                if not terms or max(y for (_, y) in terms) != d:
                    flagged = ExceptionalFlag(vector, "certified_split", h, theta)
                    break
                if d == 2:
                    square = _disc_is_square_mod(terms, l)
                    if square:
                        flagged = ExceptionalFlag(vector, "certified_split", h, theta)
                        break
                else:
                    ok = _specialization_irreducible_mod(terms, l, d)
                    if ok is None:
                        undecided = ExceptionalFlag(vector, "undecided", h, theta)
            if flagged:
                break
        if flagged:
            flags.append(flagged)
        elif undecided:
            flags.append(undecided)
    return flags


def verify_kron_report(f: MPolyQ, report: KronReport, budget: Optional[AbsBudget] = None) -> Verdict:
    """Deterministic recomputation of a report's verdict and flag lists."""
    try:
        fresh = kron_scan(
            f,
            report.m_range,
            budget,
            report.torsion_orders,
            report.vectors,
            report.subgroup_prime,
            report.seed,
        )
    except PreconditionFailed as exc:
        return Verdict(False, str(exc))
    if fresh.poly_digest != report.poly_digest:
        return Verdict(False, "polynomial digest mismatch")
    if fresh.verdicts != report.verdicts:
        return Verdict(False, "per-m verdicts do not recompute")
    if fresh.exceptional != report.exceptional:
        return Verdict(False, "exceptional flags do not recompute")
    return Verdict(True)
