"""Progression certificates for covers of G_m^r (x G_a).

Two search strategies feed the same certificate format:

* torsion targeting: pick a small prime p with l = 1 mod p, look for a tuple
  of p-th roots of unity in F_l* where every cover's fiber is obstructed, and
  pull the hit back to exponent classes of the base point via discrete logs;
* exhaustive orbit scan: walk the full cyclic orbit of the base point mod l
  and record every obstructed exponent class.

A certificate (l, M, residues, fiber records) is sound on its own: for any n
in a certified class, the fiber polynomial over Q reduces mod l to the stored
polynomial with full degree, so a rational root would reduce to a root mod l
(no-root mode), and an irreducible full-degree reduction forces
Q-irreducibility (irreducible-fiber mode).  The verifier recomputes everything
from scratch and never calls the search code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from typing import Optional

from . import poly
from .arith import (
    CongruenceClass,
    crt,
    discrete_log,
    divisors,
    factorize,
    is_prime,
    mult_independent,
    mult_order,
    primes_up_to,
)
from .errors import BadPrime, BoundExceeded, PreconditionFailed
from .gf import (
    PrimeField,
    up_factor_degrees,
    up_has_root,
    up_is_irreducible,
)
from .pbgate import CoverSpec, pb_check
from .search import first_hit

MODE_NO_ROOT = "no_rational_point"
MODE_IRREDUCIBLE = "irreducible_fiber"
MODES = (MODE_NO_ROOT, MODE_IRREDUCIBLE)


@dataclass(frozen=True)
class BasePoint:
    """Generator of the cyclic subgroup: xi in (Q*)^r, optional additive tau."""

    xi: tuple[Fraction, ...]
    tau: Optional[Fraction] = None

    @staticmethod
    def make(xi, tau=None) -> "BasePoint":
        xi = tuple(Fraction(x) for x in xi)
        if not xi or any(x == 0 for x in xi):
            raise ValueError("xi entries must be nonzero")
        if mult_independent(list(xi)) is not None:
            raise ValueError("xi entries must be multiplicatively independent")
        if tau is not None:
            tau = Fraction(tau)
            if tau == 0:
                raise ValueError("tau must be nonzero when present")
        return BasePoint(xi, tau)

    @property
    def r(self) -> int:
        return len(self.xi)

    def canonical(self) -> str:
        xi = ",".join(str(x) for x in self.xi)
        tau = str(self.tau) if self.tau is not None else ""
        return f"base:xi={xi};tau={tau}"


@dataclass(frozen=True)
class GoodClasses:
    modulus: int
    residues: tuple[int, ...]


@dataclass(frozen=True)
class TorsionWitness:
    """Obstructed torsion point: zeta in (mu_p)^r inside F_l*, not all ones."""

    p: int
    l: int
    zeta: tuple[int, ...]
    additive_target: Optional[int]
    verdicts: tuple[str, ...]  # per cover: "no_root" | "irreducible"


@dataclass(frozen=True)
class FiberRecord:
    residue: int
    coeffs: tuple[int, ...]  # dense mod-l coefficients, low degree first
    factor_degrees: tuple[int, ...]


@dataclass(frozen=True)
class ProgressionCertificate:
    mode: str
    l: int
    modulus: int
    residues: tuple[int, ...]
    fibers: tuple[tuple[FiberRecord, ...], ...]  # per cover, per residue
    cover_digests: tuple[str, ...]
    base_digest: str
    seed: int


@dataclass
class TorusConfig:
    mode: str = MODE_NO_ROOT
    min_prime: int = 3
    max_prime: int = 10**5
    torsion_orders: tuple[int, ...] = (3, 5, 7, 11, 13)
    orbit_cap: int = 10**7
    torsion_point_cap: int = 10**4
    seed: int = 0
    jobs: int = 1
    gate: bool = True  # enforce the pull-back gate in irreducible-fiber mode


@dataclass
class SearchTrace:
    candidates_considered: int = 0
    strategy: str = ""
    winner_l: int = 0


@dataclass
class SearchResult:
    certificate: Optional[ProgressionCertificate]
    trace: SearchTrace


@dataclass
class Verdict:
    accepted: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


def _unit_mod(x: Fraction, l: int) -> int:
    """x as an element of F_l*; BadPrime if l divides numerator or denominator."""
    if x.numerator % l == 0 or x.denominator % l == 0:
        raise BadPrime(f"l={l} divides base point data")
    return x.numerator * pow(x.denominator, -1, l) % l


def _fiber_condition(coeffs: list[int], F: PrimeField, mode: str) -> bool:
    d = len(coeffs) - 1
    if mode == MODE_NO_ROOT:
        return not up_has_root(coeffs, F)
    if d <= 3:
        # with full degree <= 3 irreducibility over F_l is exactly rootlessness
        return not up_has_root(coeffs, F)
    return up_is_irreducible(coeffs, F)


def _orbit_modulus(base: BasePoint, l: int) -> tuple[int, list[int], Optional[int]]:
    xi_mod = [_unit_mod(x, l) for x in base.xi]
    orders = [mult_order(x, l) for x in xi_mod]
    modulus = math.lcm(*orders)
    tau_mod = None
    if base.tau is not None:
        tau_mod = _unit_mod(base.tau, l)
        modulus *= l
    return modulus, xi_mod, tau_mod


def _point_values(xi_mod: list[int], tau_mod: Optional[int], n: int, l: int) -> dict:
    values = {f"x{i+1}": pow(x, n, l) for i, x in enumerate(xi_mod)}
    if tau_mod is not None:
        values["s"] = n * tau_mod % l
    return values


def orbit_scan(
    covers: list[CoverSpec],
    base: BasePoint,
    l: int,
    mode: str,
    orbit_cap: int = 10**7,
) -> GoodClasses:
    """Exhaust the orbit of the base point mod l; return every good class.

    A class n is good when, for every cover, the fiber polynomial specialized
    at (xi^n, n*tau) mod l keeps full degree and meets the mode condition.
    Raises BadPrime when l is even, touches the base point data, or gives a
    cover bad reduction (leading fiber coefficient vanishing mod l).
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if l == 2 or not is_prime(l):
        raise BadPrime("l must be an odd prime")
    for cov in covers:
        if cov.has_additive and base.tau is None:
            raise PreconditionFailed("cover uses the additive coordinate but tau is absent")
    reduced = [poly.reduce_mod(c.f, l, c.fiber_var) for c in covers]
    modulus, xi_mod, tau_mod = _orbit_modulus(base, l)
    if modulus > orbit_cap:
        raise BoundExceeded(f"orbit size {modulus} over cap at l={l}")
    F = PrimeField(l)
    cur = [1] * len(xi_mod)
    residues = []
    for n in range(modulus):
        values = {f"x{i+1}": cur[i] for i in range(len(cur))}
        if tau_mod is not None:
            values["s"] = n * tau_mod % l
        good = True
        for rp in reduced:
            coeffs, full = rp.specialize(values, F)
            if not full or not _fiber_condition(coeffs, F, mode):
                good = False
                break
        if good:
            residues.append(n)
        cur = [c * x % l for c, x in zip(cur, xi_mod)]
    return GoodClasses(modulus, tuple(residues))


def _least_primitive_root(l: int) -> int:
    group = l - 1
    prime_parts = list(factorize(group).factors)
    for g in range(2, l):
        if all(pow(g, group // p, l) != 1 for p in prime_parts):
            return g
    raise RuntimeError("no primitive root found (l not prime?)")


def torsion_target(
    covers: list[CoverSpec],
    p: int,
    l: int,
    mode: str,
    point_cap: int = 10**4,
) -> Optional[TorsionWitness]:
    """First obstructed p-torsion tuple in (F_l*)^r, scanning mu_p^r in fixed
    mixed-radix order through the least primitive root; None when the cap runs
    out.  Degree-dropping (exceptional) tuples are skipped, not certified."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if p == 2 or not is_prime(p):
        raise ValueError("torsion order p must be an odd prime")
    if l % p != 1:
        raise ValueError("l must be 1 mod p")
    r = max(c.r for c in covers)
    any_additive = any(c.has_additive for c in covers)
    reduced = [poly.reduce_mod(c.f, l, c.fiber_var) for c in covers]
    g = _least_primitive_root(l)
    w = pow(g, (l - 1) // p, l)
    mu = [pow(w, j, l) for j in range(p)]
    F = PrimeField(l)
    digits = r + (1 if any_additive else 0)
    total = min(p**digits, point_cap)
    for idx in range(total):
        rem = idx
        js = []
        for _ in range(digits):
            rem, j = divmod(rem, p)
            js.append(j)
        mult = js[:r]
        if all(j == 0 for j in mult):
            continue
        zeta = tuple(mu[j] for j in mult)
        additive_target = mu[js[r]] if any_additive else None
        values = {f"x{i+1}": zeta[i] for i in range(r)}
        if any_additive:
            values["s"] = additive_target
        verdicts = []
        ok = True
        for rp in reduced:
            coeffs, full = rp.specialize(values, F)
            if not full:
                ok = False  # exceptional tuple: skip past it
                break
            if not _fiber_condition(coeffs, F, mode):
                ok = False
                break
            verdicts.append("no_root" if mode == MODE_NO_ROOT else "irreducible")
        if ok:
            return TorsionWitness(p, l, zeta, additive_target, tuple(verdicts))
    return None


def transfer(witness: TorsionWitness, base: BasePoint) -> Optional[GoodClasses]:
    """Exponent classes hitting the witness tuple: solve xi_i^n = zeta_i by
    discrete logarithm and intersect with CRT; None when there is no hit."""
    l = witness.l
    modulus, xi_mod, tau_mod = _orbit_modulus(base, l)
    classes: list[CongruenceClass] = []
    for x, z in zip(xi_mod, witness.zeta):
        h = mult_order(x, l)
        c = discrete_log(x, z, l)
        if c is None:
            return None
        classes.append(CongruenceClass(c, h))
    if witness.additive_target is not None:
        if tau_mod is None:
            return None
        target = witness.additive_target * pow(tau_mod, -1, l) % l
        classes.append(CongruenceClass(target, l))
    combined = crt(classes)
    if combined is None:
        return None
    residues = tuple(range(combined.residue, modulus, combined.modulus))
    return GoodClasses(modulus, residues)


def _fiber_records(
    covers: list[CoverSpec],
    base: BasePoint,
    l: int,
    classes: GoodClasses,
    seed: int,
) -> tuple[tuple[FiberRecord, ...], ...]:
    F = PrimeField(l)
    reduced = [poly.reduce_mod(c.f, l, c.fiber_var) for c in covers]
    _, xi_mod, tau_mod = _orbit_modulus(base, l)
    out = []
    for rp in reduced:
        records = []
        for n in classes.residues:
            values = _point_values(xi_mod, tau_mod, n, l)
            coeffs, full = rp.specialize(values, F)
            if not full:
                raise RuntimeError("internal error: degree drop on a good class")
            records.append(
                FiberRecord(n, tuple(coeffs), tuple(up_factor_degrees(coeffs, F, seed)))
            )
        out.append(tuple(records))
    return tuple(out)


def cover_digest(cover: CoverSpec) -> str:
    from .certificate import sha256_hex

    return sha256_hex(cover.canonical())


def base_digest(base: BasePoint) -> str:
    from .certificate import sha256_hex

    return sha256_hex(base.canonical())


def _scan_one_prime(task: tuple, l: int) -> Optional[tuple[str, GoodClasses]]:
    """Prime-scan worker: a (strategy, classes) hit or None (miss / bad prime)."""
    covers, base, config = task
    try:
        for p in config.torsion_orders:
            if p != 2 and is_prime(p) and l % p == 1:
                witness = torsion_target(covers, p, l, config.mode, config.torsion_point_cap)
                if witness is not None:
                    hit = transfer(witness, base)
                    if hit is not None and hit.residues:
                        return ("torsion_transfer", hit)
        classes = orbit_scan(covers, base, l, config.mode, config.orbit_cap)
    except (BadPrime, BoundExceeded):
        return None
    if classes.residues:
        return ("orbit", classes)
    return None


def find_progression(
    covers: list[CoverSpec],
    base: BasePoint,
    config: Optional[TorusConfig] = None,
) -> SearchResult:
    """Scan primes ascending; emit a certificate from the first nonempty
    good-class set (torsion transfer is tried before the exhaustive scan).

    In irreducible-fiber mode every cover must pass the pull-back gate unless
    config.gate is disabled; no-root mode leaves isogeny-freeness asserted by
    the caller.  Returns a SearchResult whose certificate is None (Exhausted)
    when no prime up to the bound yields a nonempty class set.  The winning
    certificate is the one with the smallest successful l regardless of the
    worker count.
    """
    config = config or TorusConfig()
    if config.mode not in MODES:
        raise ValueError(f"unknown mode {config.mode!r}")
    if mult_independent(list(base.xi)) is not None:
        raise PreconditionFailed("base point coordinates are multiplicatively dependent")
    if config.mode == MODE_IRREDUCIBLE and config.gate:
        for cov in covers:
            verdict = pb_check(cov)
            if verdict.status != "certified_pb":
                raise PreconditionFailed(
                    f"cover {poly.poly_str(cov.f)} failed the pull-back gate: {verdict.status}"
                )
    candidates = [l for l in primes_up_to(config.max_prime) if l >= max(3, config.min_prime)]
    task = (tuple(covers), base, config)
    idx, hit = first_hit(candidates, partial(_scan_one_prime, task), jobs=config.jobs)
    trace = SearchTrace(
        candidates_considered=(idx + 1) if idx is not None else len(candidates)
    )
    if hit is None:
        return SearchResult(None, trace)
    strategy, classes = hit
    trace.strategy = strategy
    trace.winner_l = candidates[idx]
    return SearchResult(_emit(covers, base, candidates[idx], classes, config), trace)


def _emit(covers, base, l, classes: GoodClasses, config: TorusConfig) -> ProgressionCertificate:
    fibers = _fiber_records(covers, base, l, classes, config.seed)
    return ProgressionCertificate(
        mode=config.mode,
        l=l,
        modulus=classes.modulus,
        residues=classes.residues,
        fibers=fibers,
        cover_digests=tuple(cover_digest(c) for c in covers),
        base_digest=base_digest(base),
        seed=config.seed,
    )


# ------------------------------------------------------------------------------
# verification (independent of the search paths above)


def _rational_roots(coeffs: list[Fraction]) -> list[Fraction]:
    """All rational roots of a nonzero univariate over Q (rational root theorem)."""
    ints = [Fraction(c) for c in coeffs]
    den = math.lcm(*(c.denominator for c in ints))
    zz = [int(c * den) for c in ints]
    while zz and zz[-1] == 0:
        zz.pop()
    if not zz:
        raise ValueError("zero polynomial")
    roots = []
    if zz[0] == 0:
        roots.append(Fraction(0))
        while zz and zz[0] == 0:
            zz.pop(0)
    if len(zz) <= 1:
        return roots
    a0, ad = abs(zz[0]), abs(zz[-1])
    for u in divisors(a0):
        for w in divisors(ad):
            if math.gcd(u, w) != 1:
                continue
            for cand in (Fraction(u, w), Fraction(-u, w)):
                acc = Fraction(0)
                for c in reversed(zz):
                    acc = acc * cand + c
                if acc == 0 and cand not in roots:
                    roots.append(cand)
    return roots


def _exact_fiber_check(cover: CoverSpec, base: BasePoint, n: int, mode: str) -> Optional[str]:
    """Exact check over Q at exponent n; returns a failure reason or None."""
    values = {f"x{i+1}": x**n for i, x in enumerate(base.xi)}
    if cover.has_additive:
        values["s"] = base.tau * n
    coeffs = cover.f.fiber_coeffs_q(values, cover.fiber_var)
    if len(coeffs) - 1 != cover.d:
        return f"fiber degree drop over Q at n={n}"
    roots = _rational_roots(coeffs)
    if mode == MODE_NO_ROOT:
        if roots:
            return f"rational root {roots[0]} at n={n}"
        return None
    # irreducible-fiber mode: exact for degree <= 3 (no root <=> irreducible);
    # for higher degree the exact claim is downgraded to rootlessness.
    if roots:
        return f"rational root {roots[0]} at n={n} (reducible fiber)"
    return None


def verify_certificate(
    cert: ProgressionCertificate,
    covers: list[CoverSpec],
    base: BasePoint,
    exact_bound: int = 40,
) -> Verdict:
    """Recompute the certificate from scratch: modulus, every residue's fiber
    condition mod l, and the exact rational check for n <= exact_bound."""
    if cert.mode not in MODES:
        return Verdict(False, f"unknown mode {cert.mode!r}")
    if len(covers) != len(cert.fibers):
        return Verdict(False, "cover count mismatch")
    if tuple(cover_digest(c) for c in covers) != tuple(cert.cover_digests):
        return Verdict(False, "cover digest mismatch")
    if base_digest(base) != cert.base_digest:
        return Verdict(False, "base point digest mismatch")
    l = cert.l
    if l == 2 or not is_prime(l):
        return Verdict(False, f"BadPrime: {l} is not an odd prime")
    if any(c.has_additive for c in covers) and base.tau is None:
        return Verdict(False, "cover uses the additive coordinate but tau is absent")
    try:
        modulus, xi_mod, tau_mod = _orbit_modulus(base, l)
        reduced = [poly.reduce_mod(c.f, l, c.fiber_var) for c in covers]
    except BadPrime as exc:
        return Verdict(False, f"BadPrime: {exc}")
    if modulus != cert.modulus:
        return Verdict(False, f"modulus mismatch: recomputed {modulus}, stored {cert.modulus}")
    if not cert.residues:
        return Verdict(False, "empty residue list")
    if len(set(cert.residues)) != len(cert.residues):
        return Verdict(False, "duplicate residues")
    if any(not 0 <= n < modulus for n in cert.residues):
        return Verdict(False, "residue out of range")
    F = PrimeField(l)
    for ci, (cov, rp, records) in enumerate(zip(covers, reduced, cert.fibers)):
        if tuple(rec.residue for rec in records) != tuple(cert.residues):
            return Verdict(False, f"cover {ci}: fiber records do not match residues")
        for rec in records:
            values = _point_values(xi_mod, tau_mod, rec.residue, l)
            coeffs, full = rp.specialize(values, F)
            if not full:
                return Verdict(False, f"cover {ci}: degree drop at residue {rec.residue}")
            if tuple(coeffs) != tuple(rec.coeffs):
                return Verdict(False, f"cover {ci}: fiber mismatch at residue {rec.residue}")
            degrees = tuple(up_factor_degrees(coeffs, F, cert.seed))
            if degrees != tuple(rec.factor_degrees):
                return Verdict(
                    False, f"cover {ci}: factorization degrees mismatch at residue {rec.residue}"
                )
            d = len(coeffs) - 1
            if cert.mode == MODE_NO_ROOT:
                if 1 in degrees:
                    return Verdict(False, f"cover {ci}: fiber has a root at residue {rec.residue}")
            else:
                if degrees != (d,):
                    return Verdict(
                        False, f"cover {ci}: fiber reducible at residue {rec.residue}"
                    )
    residue_set = set(cert.residues)
    for n in range(exact_bound + 1):
        if n % cert.modulus not in residue_set:
            continue
        for ci, cov in enumerate(covers):
            reason = _exact_fiber_check(cov, base, n, cert.mode)
            if reason is not None:
                return Verdict(False, f"cover {ci}: exact check failed: {reason}")
    return Verdict(True)
