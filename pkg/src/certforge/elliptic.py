"""Orbit certificates on reductions of an elliptic curve over Q.

For a short Weierstrass curve E: y^2 = x^3 + Ax + B, a non-torsion rational
point P and fiber polynomials in the point coordinates (x1, x2) with fiber
variable T, the scan walks the cyclic group generated by the reduction of P
mod l and certifies residue classes n mod ord(P mod l) where the fiber has no
root (or is irreducible) over F_l.  Good classes avoid n with trivial
reduction, so the coordinates of nP are l-integral and the mod-l conclusion
lifts to Q exactly as in the torus engine.

Frobenius bookkeeping (point counts, trace, the power-sum recurrence for
counts over extensions, and the (Z/a)+(Z/b) group shape) is exposed for the
invariant suite; counting is exhaustive, small-field only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from typing import Optional

from . import poly
from .arith import factorize, is_prime, legendre, primes_up_to
from .errors import BadPrime, BadReduction, BoundExceeded, PreconditionFailed
from .gf import PrimeField, ext_field, up_factor_degrees
from .pbgate import abs_irreducible
from .poly import MPolyQ, poly_str
from .search import first_hit
from .torus import (
    MODE_IRREDUCIBLE,
    MODE_NO_ROOT,
    MODES,
    FiberRecord,
    GoodClasses,
    SearchTrace,
    Verdict,
    _fiber_condition,
    _rational_roots,
)

_COUNT_CAP = 1 << 20

PointQ = Optional[tuple[Fraction, Fraction]]  # None is the identity
PointF = Optional[tuple[int, int]]


@dataclass(frozen=True)
class EllipticCurveQ:
    """y^2 = x^3 + A x + B over Q with nonzero discriminant."""

    A: Fraction
    B: Fraction

    @staticmethod
    def make(A, B) -> "EllipticCurveQ":
        A, B = Fraction(A), Fraction(B)
        curve = EllipticCurveQ(A, B)
        if curve.discriminant() == 0:
            raise ValueError("singular curve: discriminant is zero")
        return curve

    def discriminant(self) -> Fraction:
        return Fraction(-16) * (4 * self.A**3 + 27 * self.B**2)

    def canonical(self) -> str:
        return f"curve:A={self.A};B={self.B}"


def point_canonical(P: PointQ) -> str:
    if P is None:
        return "point:O"
    return f"point:x={P[0]};y={P[1]}"


def ec_on_curve_q(E: EllipticCurveQ, P: PointQ) -> bool:
    if P is None:
        return True
    x, y = P
    return y * y == x**3 + E.A * x + E.B


def ec_add_q(E: EllipticCurveQ, P: PointQ, Q: PointQ) -> PointQ:
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if y1 == -y2:
            return None
        lam = (3 * x1 * x1 + E.A) / (2 * y1)
    else:
        lam = (y2 - y1) / (x2 - x1)
    x3 = lam * lam - x1 - x2
    y3 = lam * (x1 - x3) - y1
    return (x3, y3)


def ec_mul_q(E: EllipticCurveQ, n: int, P: PointQ) -> PointQ:
    if n < 0:
        P = None if P is None else (P[0], -P[1])
        n = -n
    result: PointQ = None
    base = P
    while n:
        if n & 1:
            result = ec_add_q(E, result, base)
        base = ec_add_q(E, base, base)
        n >>= 1
    return result


# ------------------------------------------------------------------------------
# reductions mod l


@dataclass(frozen=True)
class CurveF:
    a: int
    b: int
    l: int


def ec_reduce(E: EllipticCurveQ, l: int) -> CurveF:
    """Reduce the coefficients; BadReduction on denominator or singular drop."""
    if l <= 3:
        raise BadReduction("l must exceed 3")
    for c in (E.A, E.B):
        if c.denominator % l == 0:
            raise BadReduction(f"l={l} divides a coefficient denominator")
    a = E.A.numerator * pow(E.A.denominator, -1, l) % l
    b = E.B.numerator * pow(E.B.denominator, -1, l) % l
    if (4 * a**3 + 27 * b**2) % l == 0:
        raise BadReduction(f"discriminant vanishes mod {l}")
    return CurveF(a, b, l)


def ec_reduce_point(P: PointQ, l: int) -> PointF:
    if P is None:
        return None
    x, y = P
    if x.denominator % l == 0 or y.denominator % l == 0:
        raise BadPrime(f"l={l} divides a point denominator")
    return (
        x.numerator * pow(x.denominator, -1, l) % l,
        y.numerator * pow(y.denominator, -1, l) % l,
    )


def ec_add_f(C: CurveF, P: PointF, Q: PointF) -> PointF:
    l = C.l
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % l == 0:
            return None
        lam = (3 * x1 * x1 + C.a) * pow(2 * y1, -1, l) % l
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, l) % l
    x3 = (lam * lam - x1 - x2) % l
    y3 = (lam * (x1 - x3) - y1) % l
    return (x3, y3)


def ec_mul_f(C: CurveF, n: int, P: PointF) -> PointF:
    result: PointF = None
    base = P
    n = int(n)
    while n:
        if n & 1:
            result = ec_add_f(C, result, base)
        base = ec_add_f(C, base, base)
        n >>= 1
    return result


def ec_count_points(C: CurveF) -> int:
    """#E(F_l) = l + 1 + sum_x chi(x^3 + ax + b), exhaustively."""
    if C.l > _COUNT_CAP:
        raise BoundExceeded(f"l={C.l} over the exhaustive counting cap")
    total = C.l + 1
    for x in range(C.l):
        total += legendre((x * x * x + C.a * x + C.b) % C.l, C.l)
    return total


def ec_count_points_quadratic_ext(C: CurveF) -> int:
    """#E(F_{l^2}) by exhaustive counting in the deterministic quadratic field."""
    l = C.l
    F = ext_field(l, 2)
    c = F.modulus[0]  # modulus z^2 + c
    order = l * l
    if order > _COUNT_CAP:
        raise BoundExceeded("l^2 over the exhaustive counting cap")
    # square table: counts of representations v = y^2
    sq_count = [0] * order
    for u in range(l):
        for v in range(l):
            su = (u * u - c * v * v) % l
            sv = 2 * u * v % l
            sq_count[su + sv * l] += 1
    total = 1
    a_u, b_u = C.a, C.b
    for u in range(l):
        for v in range(l):
            # x = (u, v); rhs = x^3 + a x + b computed in F_{l^2}
            x2u = (u * u - c * v * v) % l
            x2v = 2 * u * v % l
            x3u = (x2u * u - c * x2v * v) % l
            x3v = (x2u * v + x2v * u) % l
            ru = (x3u + a_u * u + b_u) % l
            rv = (x3v + a_u * v) % l
            total += sq_count[ru + rv * l]
    return total


def ec_all_points(C: CurveF) -> list[PointF]:
    """Every affine point (identity excluded), by table lookup."""
    l = C.l
    roots: dict[int, list[int]] = {}
    for y in range(l):
        roots.setdefault(y * y % l, []).append(y)
    pts = []
    for x in range(l):
        rhs = (x * x * x + C.a * x + C.b) % l
        for y in roots.get(rhs, ()):
            pts.append((x, y))
    return pts


def ec_point_order(C: CurveF, P: PointF, group_order: int) -> int:
    """Order of P by dividing the group order down its prime factorization."""
    if P is None:
        return 1
    order = group_order
    for p in factorize(group_order).factors:
        while order % p == 0 and ec_mul_f(C, order // p, P) is None:
            order //= p
    return order


@dataclass(frozen=True)
class FrobeniusData:
    """Point count, trace and derived data at a good prime.

    gammas[m-1] = #E(F_{l^m}) predicted by the power-sum recurrence
    s_m = trace*s_{m-1} - l*s_{m-2}, gamma_m = l^m + 1 - s_m; the group shape
    (a, b) with a | b and a*b = N1 comes from the brute-force group exponent.
    """

    l: int
    n1: int
    trace: int
    gammas: tuple[int, ...]
    shape: tuple[int, int]


def ec_frobenius(E: EllipticCurveQ, l: int, m_max: int = 2) -> FrobeniusData:
    C = ec_reduce(E, l)
    n1 = ec_count_points(C)
    trace = l + 1 - n1
    if trace * trace > 4 * l:
        raise RuntimeError("Hasse bound violated: counting bug")
    s_prev, s_cur = 2, trace
    gammas = []
    power = 1
    for m in range(1, m_max + 1):
        power *= l
        gammas.append(power + 1 - s_cur)
        s_prev, s_cur = s_cur, trace * s_cur - l * s_prev
    exponent = 1
    for pt in ec_all_points(C):
        exponent = math.lcm(exponent, ec_point_order(C, pt, n1))
        if exponent == n1:
            break
    shape = (n1 // exponent, exponent)
    return FrobeniusData(l, n1, trace, tuple(gammas), shape)


# ------------------------------------------------------------------------------
# fiber specifications and orbit certificates


@dataclass(frozen=True)
class FiberSpec:
    """Fiber polynomial in the point coordinates: x1 = x(P), x2 = y(P), fiber
    variable T."""

    f: MPolyQ
    d: int

    @staticmethod
    def ingest(f: MPolyQ) -> "FiberSpec":
        d = f.degree("T")
        if d < 1:
            raise ValueError("fiber polynomial must involve T")
        bad = [v for v in f.variables if v not in ("x1", "x2", "T")]
        if bad:
            raise ValueError(f"fiber polynomials use x1, x2, T only; found {bad}")
        g = f.primitive_integral()
        if not poly.is_squarefree(g):
            raise ValueError("fiber polynomial has repeated factors")
        return FiberSpec(g, d)

    def canonical(self) -> str:
        return f"fiber:T;f={poly_str(self.f)}"


@dataclass(frozen=True)
class EllipticCertificate:
    mode: str
    l: int
    modulus: int  # order of the reduced point
    residues: tuple[int, ...]
    fibers: tuple[tuple[FiberRecord, ...], ...]
    curve_digest: str
    point_digest: str
    fiber_digests: tuple[str, ...]
    seed: int


@dataclass
class EllConfig:
    mode: str = MODE_NO_ROOT
    min_prime: int = 5
    max_prime: int = 10**4
    seed: int = 0
    jobs: int = 1
    assume_no_cm: bool = False


@dataclass
class EllSearchResult:
    certificate: Optional[EllipticCertificate]
    trace: SearchTrace


def curve_digest(E: EllipticCurveQ) -> str:
    from .certificate import sha256_hex

    return sha256_hex(E.canonical())


def point_digest(P: PointQ) -> str:
    from .certificate import sha256_hex

    return sha256_hex(point_canonical(P))


def fiber_digest(fs: FiberSpec) -> str:
    from .certificate import sha256_hex

    return sha256_hex(fs.canonical())


def check_non_torsion(E: EllipticCurveQ, P: PointQ) -> None:
    """nP != O for n in 1..10 and 12 certifies infinite order (rational torsion
    orders never exceed 12)."""
    if P is None or not ec_on_curve_q(E, P):
        raise PreconditionFailed("point is missing or not on the curve")
    for n in (*range(1, 11), 12):
        if ec_mul_q(E, n, P) is None:
            raise PreconditionFailed(f"point is torsion: {n}P = O over Q")


def fiber_gate(fs: FiberSpec) -> None:
    """Pull-back surrogate for fibers over the curve: exact discriminant route
    for quadratics, the generic specialization certificate otherwise."""
    if fs.d == 2:
        disc = poly.discriminant_quadratic(fs.f, "T")
        if disc.is_zero():
            raise PreconditionFailed("fiber discriminant is zero")
        _, _, is_square = poly.square_decomposition(disc)
        if is_square:
            raise PreconditionFailed("fiber discriminant is a perfect square")
        return
    res = abs_irreducible(fs.f, "T")
    if not res.ok:
        detail = "reducible" if res.certified_reducible else res.reason
        raise PreconditionFailed(f"fiber failed the irreducibility gate: {detail}")


def ec_orbit_scan(
    E: EllipticCurveQ,
    P: PointQ,
    fibers: list[FiberSpec],
    l: int,
    mode: str,
) -> GoodClasses:
    """Scan multiples of the reduced point; residues live in [1, ord) so the
    reduction of nP is never the identity on a certified class."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    C = ec_reduce(E, l)
    pt = ec_reduce_point(P, l)
    if pt is None or (pt[1] * pt[1] - (pt[0] ** 3 + C.a * pt[0] + C.b)) % l != 0:
        raise BadPrime("point does not reduce onto the curve")
    reduced = [poly.reduce_mod(fs.f, l, "T") for fs in fibers]
    n1 = ec_count_points(C)
    order = ec_point_order(C, pt, n1)
    F = PrimeField(l)
    residues = []
    current = pt
    for n in range(1, order):
        values = {"x1": current[0], "x2": current[1]}
        good = True
        for rp in reduced:
            coeffs, full = rp.specialize(values, F)
            if not full or not _fiber_condition(coeffs, F, mode):
                good = False
                break
        if good:
            residues.append(n)
        current = ec_add_f(C, current, pt)
    return GoodClasses(order, tuple(residues))


def _scan_one_prime_ell(task: tuple, l: int) -> Optional[GoodClasses]:
    E, P, fibers, config = task
    try:
        classes = ec_orbit_scan(E, P, fibers, l, config.mode)
    except (BadPrime, BadReduction, BoundExceeded):
        return None
    return classes if classes.residues else None


def ec_find_progression(
    E: EllipticCurveQ,
    P: PointQ,
    fibers: list[FiberSpec],
    config: Optional[EllConfig] = None,
) -> EllSearchResult:
    """Ascending good-reduction prime scan, smallest-l certificate wins."""
    config = config or EllConfig()
    if config.mode not in MODES:
        raise ValueError(f"unknown mode {config.mode!r}")
    check_non_torsion(E, P)
    for fs in fibers:
        fiber_gate(fs)
    candidates = [l for l in primes_up_to(config.max_prime) if l >= max(5, config.min_prime)]
    task = (E, P, tuple(fibers), config)
    idx, hit = first_hit(candidates, partial(_scan_one_prime_ell, task), config.jobs)
    trace = SearchTrace(candidates_considered=(idx + 1) if idx is not None else len(candidates))
    if hit is None:
        return EllSearchResult(None, trace)
    l = candidates[idx]
    trace.strategy = "point_orbit"
    trace.winner_l = l
    cert = EllipticCertificate(
        mode=config.mode,
        l=l,
        modulus=hit.modulus,
        residues=hit.residues,
        fibers=_ell_fiber_records(E, P, fibers, l, hit, config.seed),
        curve_digest=curve_digest(E),
        point_digest=point_digest(P),
        fiber_digests=tuple(fiber_digest(fs) for fs in fibers),
        seed=config.seed,
    )
    return EllSearchResult(cert, trace)


def _ell_fiber_records(E, P, fibers, l, classes: GoodClasses, seed: int):
    C = ec_reduce(E, l)
    pt = ec_reduce_point(P, l)
    reduced = [poly.reduce_mod(fs.f, l, "T") for fs in fibers]
    F = PrimeField(l)
    out = []
    for rp in reduced:
        records = []
        for n in classes.residues:
            q = ec_mul_f(C, n, pt)
            coeffs, full = rp.specialize({"x1": q[0], "x2": q[1]}, F)
            if not full:
                raise RuntimeError("internal error: degree drop on a good class")
            records.append(
                FiberRecord(n, tuple(coeffs), tuple(up_factor_degrees(coeffs, F, seed)))
            )
        out.append(tuple(records))
    return tuple(out)


def ec_verify(
    cert: EllipticCertificate,
    E: EllipticCurveQ,
    P: PointQ,
    fibers: list[FiberSpec],
    exact_bound: int = 8,
) -> Verdict:
    """Recompute the scan data at cert.l and check certified n <= exact_bound
    exactly over Q (nP by exact group law, then the rational-root test)."""
    if cert.mode not in MODES:
        return Verdict(False, f"unknown mode {cert.mode!r}")
    if curve_digest(E) != cert.curve_digest:
        return Verdict(False, "curve digest mismatch")
    if point_digest(P) != cert.point_digest:
        return Verdict(False, "point digest mismatch")
    if tuple(fiber_digest(fs) for fs in fibers) != tuple(cert.fiber_digests):
        return Verdict(False, "fiber digest mismatch")
    if len(fibers) != len(cert.fibers):
        return Verdict(False, "fiber record count mismatch")
    if not ec_on_curve_q(E, P):
        return Verdict(False, "point is not on the curve")
    l = cert.l
    if not is_prime(l):
        return Verdict(False, f"{l} is not prime")
    try:
        C = ec_reduce(E, l)
        pt = ec_reduce_point(P, l)
    except (BadPrime, BadReduction) as exc:
        return Verdict(False, f"BadPrime: {exc}")
    n1 = ec_count_points(C)
    order = ec_point_order(C, pt, n1)
    if order != cert.modulus:
        return Verdict(False, f"order mismatch: recomputed {order}, stored {cert.modulus}")
    if not cert.residues:
        return Verdict(False, "empty residue list")
    if any(not 1 <= n < order for n in cert.residues):
        return Verdict(False, "residue out of range [1, ord)")
    if len(set(cert.residues)) != len(cert.residues):
        return Verdict(False, "duplicate residues")
    F = PrimeField(l)
    try:
        reduced = [poly.reduce_mod(fs.f, l, "T") for fs in fibers]
    except BadPrime as exc:
        return Verdict(False, f"BadPrime: {exc}")
    for fi, (rp, records) in enumerate(zip(reduced, cert.fibers)):
        if tuple(rec.residue for rec in records) != tuple(cert.residues):
            return Verdict(False, f"fiber {fi}: records do not match residues")
        for rec in records:
            q = ec_mul_f(C, rec.residue, pt)
            if q is None:
                return Verdict(False, f"fiber {fi}: nP reduces to O at residue {rec.residue}")
            coeffs, full = rp.specialize({"x1": q[0], "x2": q[1]}, F)
            if not full:
                return Verdict(False, f"fiber {fi}: degree drop at residue {rec.residue}")
            if tuple(coeffs) != tuple(rec.coeffs):
                return Verdict(False, f"fiber {fi}: fiber mismatch at residue {rec.residue}")
            degrees = tuple(up_factor_degrees(coeffs, F, cert.seed))
            if degrees != tuple(rec.factor_degrees):
                return Verdict(False, f"fiber {fi}: degree data mismatch at {rec.residue}")
            d = len(coeffs) - 1
            if cert.mode == MODE_NO_ROOT:
                if 1 in degrees:
                    return Verdict(False, f"fiber {fi}: root mod l at residue {rec.residue}")
            elif degrees != (d,):
                return Verdict(False, f"fiber {fi}: reducible at residue {rec.residue}")
    residue_set = set(cert.residues)
    for n in range(1, exact_bound + 1):
        if n % cert.modulus not in residue_set:
            continue
        Q = ec_mul_q(E, n, P)
        if Q is None:
            return Verdict(False, f"{n}P = O over Q on a certified class")
        values = {"x1": Q[0], "x2": Q[1]}
        for fi, fs in enumerate(fibers):
            coeffs = fs.f.fiber_coeffs_q(values, "T")
            if len(coeffs) - 1 != fs.d:
                return Verdict(False, f"fiber {fi}: exact degree drop at n={n}")
            roots = _rational_roots(coeffs)
            if roots:
                return Verdict(False, f"fiber {fi}: rational root {roots[0]} at n={n}")
    return Verdict(True)
