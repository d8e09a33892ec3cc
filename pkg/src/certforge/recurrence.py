"""Perfect-power-free progressions for integer linear recurrences.

Given u_{n+k} = c1 u_{n+k-1} + ... + ck u_n with integer data, a shift e and a
power d >= 2, the scan finds a prime l and residue classes modulo the state
period where u_n + e is provably never a d-th power: its value mod l is
nonzero and outside the d-th power subgroup of F_l*.  Certificates are purely
congruential, hence sound even for degenerate recurrences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Optional

from .arith import dth_power_residue, is_perfect_dth_power, primes_up_to
from .errors import BadPrime, BoundExceeded
from .search import first_hit
from .torus import SearchTrace, Verdict

_EVAL_CAP = 10**6
_PERIOD_CAP = 10**7


@dataclass(frozen=True)
class RecurrenceSpec:
    """u_{n+k} = sum coeffs[i] * u_{n+k-1-i}; shift e and power d for the query
    'is u_n + e ever a d-th power?'."""

    coeffs: tuple[int, ...]
    initial: tuple[int, ...]
    shift: int
    power: int

    @staticmethod
    def make(coeffs, initial, shift: int, power: int) -> "RecurrenceSpec":
        coeffs = tuple(int(c) for c in coeffs)
        initial = tuple(int(u) for u in initial)
        if not coeffs or len(coeffs) != len(initial):
            raise ValueError("need k coefficients and k initial values")
        if coeffs[-1] == 0:
            raise ValueError("c_k must be nonzero (invertible companion matrix)")
        if power < 2:
            raise ValueError("power must be >= 2")
        return RecurrenceSpec(coeffs, initial, int(shift), int(power))

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def degenerate(self) -> bool:
        """Repeated characteristic root or a root-of-unity root ratio.

        Exact for order <= 2 (disc = 0, or c1 = 0 giving ratio -1); higher
        orders are not analyzed.  Degenerate specs stay usable: only search
        termination is at risk, never certificate soundness.
        """
        if self.order == 1:
            return False
        if self.order == 2:
            c1, c2 = self.coeffs
            return c1 * c1 + 4 * c2 == 0 or c1 == 0
        return False

    def canonical(self) -> str:
        cs = ",".join(str(c) for c in self.coeffs)
        us = ",".join(str(u) for u in self.initial)
        return f"rec:coeffs={cs};init={us};shift={self.shift};power={self.power}"


def rec_from_quadratic(trace: int, norm: int, u0: int, u1: int, e: int, d: int) -> RecurrenceSpec:
    """Order-2 spec for u_n = alpha^n + beta^n style sums, where alpha, beta are
    the roots of x^2 - trace*x + norm."""
    return RecurrenceSpec.make((trace, -norm), (u0, u1), e, d)


def rec_eval(spec: RecurrenceSpec, n: int) -> int:
    """Exact u_n by iteration (n capped at 10^6)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > _EVAL_CAP:
        raise BoundExceeded(f"n > {_EVAL_CAP}")
    k = spec.order
    if n < k:
        return spec.initial[n]
    window = list(spec.initial)
    for _ in range(n - k + 1):
        nxt = sum(c * u for c, u in zip(spec.coeffs, reversed(window)))
        window = window[1:] + [nxt]
    return window[-1]


def rec_mod_scan(
    spec: RecurrenceSpec, l: int, period_cap: int = _PERIOD_CAP
) -> tuple[int, tuple[int, ...]]:
    """Walk the state vector mod l to its period P; return (P, good residues).

    A residue n in [0, P) is good when (u_n + shift) mod l is nonzero and not a
    d-th power residue.  BadPrime when l divides c_k (state map not invertible).
    """
    if spec.coeffs[-1] % l == 0:
        raise BadPrime(f"l={l} divides the trailing coefficient")
    k = spec.order
    start = tuple(u % l for u in spec.initial)
    state = start
    coeffs = tuple(c % l for c in spec.coeffs)
    d = spec.power
    good = []
    n = 0
    while True:
        value = (state[0] + spec.shift) % l
        if value != 0 and not dth_power_residue(value, d, l):
            good.append(n)
        nxt = sum(c * u for c, u in zip(coeffs, reversed(state))) % l
        state = state[1:] + (nxt,)
        n += 1
        if state == start:
            break
        if n > period_cap:
            raise BoundExceeded(f"period cap {period_cap} hit at l={l}")
    return n, tuple(good)


@dataclass(frozen=True)
class RecurrenceCertificate:
    l: int
    period: int
    residues: tuple[int, ...]
    spec_digest: str
    seed: int


@dataclass
class RecConfig:
    min_prime: int = 3
    max_prime: int = 10**5
    period_cap: int = _PERIOD_CAP
    seed: int = 0
    jobs: int = 1


@dataclass
class RecSearchResult:
    certificate: Optional[RecurrenceCertificate]
    trace: SearchTrace


def spec_digest(spec: RecurrenceSpec) -> str:
    from .certificate import sha256_hex

    return sha256_hex(spec.canonical())


def _scan_one_prime_rec(task: tuple, l: int) -> Optional[tuple[int, tuple[int, ...]]]:
    spec, config = task
    if math.gcd(spec.power, l - 1) == 1:
        return None  # every unit is a d-th power: no obstruction possible
    try:
        period, residues = rec_mod_scan(spec, l, config.period_cap)
    except (BadPrime, BoundExceeded):
        return None
    if residues:
        return (period, residues)
    return None


def find_power_free_progression(
    spec: RecurrenceSpec, config: Optional[RecConfig] = None
) -> RecSearchResult:
    """Ascending prime scan; primes with gcd(d, l-1) = 1 are skipped since the
    d-th power subgroup is everything there."""
    config = config or RecConfig()
    candidates = [l for l in primes_up_to(config.max_prime) if l >= max(3, config.min_prime)]
    idx, hit = first_hit(candidates, partial(_scan_one_prime_rec, (spec, config)), config.jobs)
    trace = SearchTrace(candidates_considered=(idx + 1) if idx is not None else len(candidates))
    if hit is None:
        return RecSearchResult(None, trace)
    period, residues = hit
    trace.strategy = "state_scan"
    trace.winner_l = candidates[idx]
    cert = RecurrenceCertificate(
        l=candidates[idx],
        period=period,
        residues=residues,
        spec_digest=spec_digest(spec),
        seed=config.seed,
    )
    return RecSearchResult(cert, trace)


def verify_power_certificate(
    cert: RecurrenceCertificate, spec: RecurrenceSpec, exact_bound: int = 40
) -> Verdict:
    """Recompute the scan at cert.l and run exact integer d-th power tests for
    every certified n up to exact_bound."""
    if spec_digest(spec) != cert.spec_digest:
        return Verdict(False, "recurrence digest mismatch")
    try:
        period, good = rec_mod_scan(spec, cert.l)
    except BadPrime as exc:
        return Verdict(False, f"BadPrime: {exc}")
    except BoundExceeded as exc:
        return Verdict(False, f"BoundExceeded: {exc}")
    if period != cert.period:
        return Verdict(False, f"period mismatch: recomputed {period}, stored {cert.period}")
    if not cert.residues:
        return Verdict(False, "empty residue list")
    if len(set(cert.residues)) != len(cert.residues):
        return Verdict(False, "duplicate residues")
    good_set = set(good)
    for n in cert.residues:
        if not 0 <= n < period:
            return Verdict(False, f"residue {n} out of range")
        if n not in good_set:
            return Verdict(False, f"residue {n} fails the mod-{cert.l} power test")
    residue_set = set(cert.residues)
    d = spec.power
    for n in range(exact_bound + 1):
        if n % period not in residue_set:
            continue
        value = rec_eval(spec, n) + spec.shift
        if is_perfect_dth_power(value, d):
            return Verdict(False, f"u_{n} + e = {value} is a perfect {d}-th power")
    return Verdict(True)
