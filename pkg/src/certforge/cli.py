"""The forge command line: certificate construction and verification.

Exit codes: 0 success/Accept, 2 search exhausted, 3 verifier Reject,
4 input error (bad arguments, parse/schema failures, digest mismatches,
violated preconditions).
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

from . import certificate as cert_io
from .elliptic import (
    EllConfig,
    EllipticCurveQ,
    FiberSpec,
    ec_find_progression,
    ec_verify,
)
from .errors import CertforgeError, DigestMismatch, PreconditionFailed, SchemaError
from .kron import kron_scan
from .pbgate import AbsBudget, CoverSpec, pb_check
from .poly import parse_poly
from .recurrence import (
    RecConfig,
    RecurrenceSpec,
    find_power_free_progression,
    rec_from_quadratic,
    verify_power_certificate,
)
from .torus import (
    MODE_IRREDUCIBLE,
    MODE_NO_ROOT,
    BasePoint,
    TorusConfig,
    find_progression,
    verify_certificate,
)

EXIT_OK = 0
EXIT_EXHAUSTED = 2
EXIT_REJECT = 3
EXIT_INPUT = 4

_MODE_BY_FLAG = {"noroot": MODE_NO_ROOT, "irred": MODE_IRREDUCIBLE}


def _read_poly_file(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        text = " ".join(
            line.strip() for line in fh if line.strip() and not line.lstrip().startswith("#")
        )
    return parse_poly(text)


def _fractions(text: str) -> list[Fraction]:
    return [Fraction(part.strip()) for part in text.split(",") if part.strip()]


def _ints(text: str) -> list[int]:
    return [int(part.strip()) for part in text.split(",") if part.strip()]


def _m_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition("..")
    return int(lo), int(hi)


def _write_envelope(env, out: str | None) -> None:
    data = cert_io.dumps_envelope(env)
    if out:
        with open(out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data.decode())


def _emit_trace(path: str | None, trace, elapsed: float) -> None:
    if not path:
        return
    lines = [
        f"candidates_considered={trace.candidates_considered}",
        f"strategy={trace.strategy}",
        f"winner_l={trace.winner_l}",
        f"elapsed_seconds={elapsed:.3f}",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _load_covers(paths: list[str]) -> list[CoverSpec]:
    return [CoverSpec.ingest(_read_poly_file(p)) for p in paths]


def _base_point(args) -> BasePoint:
    tau = Fraction(args.tau) if args.tau is not None else None
    return BasePoint.make(_fractions(args.xi), tau)


def _curve(args) -> EllipticCurveQ:
    a, b = _fractions(args.curve)
    return EllipticCurveQ.make(a, b)


def _point(args):
    x, y = _fractions(args.point)
    return (x, y)


def _add_search_flags(p: argparse.ArgumentParser, max_prime_default: int) -> None:
    p.add_argument("--min-prime", type=int, default=3)
    p.add_argument("--max-prime", type=int, default=max_prime_default)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None)
    p.add_argument("--emit-trace", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge",
        description="Construct and verify finite-field progression certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_pb = sub.add_parser("pb", help="pull-back stability verdict for a cover")
    p_pb.add_argument("--cover", required=True)
    p_pb.add_argument("--max-witness-prime", type=int, default=400)
    p_pb.add_argument("--seed", type=int, default=0)
    p_pb.add_argument("--out", default=None)

    p_torus = sub.add_parser("torus", help="progression certificate over the torus")
    p_torus.add_argument("--cover", action="append", required=True)
    p_torus.add_argument("--xi", required=True, help="comma-separated rationals, e.g. 2,3")
    p_torus.add_argument("--tau", default=None)
    p_torus.add_argument("--mode", choices=("noroot", "irred"), required=True)
    p_torus.add_argument("--skip-pb-gate", action="store_true")
    _add_search_flags(p_torus, 10**5)

    p_verify = sub.add_parser("verify", help="verify a certificate envelope against inputs")
    p_verify.add_argument("--cert", required=True)
    p_verify.add_argument("--cover", action="append", default=None)
    p_verify.add_argument("--xi", default=None)
    p_verify.add_argument("--tau", default=None)
    p_verify.add_argument("--poly", default=None)
    p_verify.add_argument("--exact-bound", type=int, default=None)

    p_rec = sub.add_parser("rec", help="power-free progression for a linear recurrence")
    p_rec.add_argument("--trace", type=int, default=None)
    p_rec.add_argument("--norm", type=int, default=None)
    p_rec.add_argument("--u0", type=int, default=None)
    p_rec.add_argument("--u1", type=int, default=None)
    p_rec.add_argument("--coeffs", default=None, help="c1,...,ck")
    p_rec.add_argument("--init", default=None, help="u0,...,u(k-1)")
    p_rec.add_argument("--shift", type=int, default=0)
    p_rec.add_argument("--power", type=int, required=True)
    _add_search_flags(p_rec, 10**5)

    p_vrec = sub.add_parser("verify-rec", help="verify a recurrence certificate")
    p_vrec.add_argument("--cert", required=True)
    p_vrec.add_argument("--trace", type=int, default=None)
    p_vrec.add_argument("--norm", type=int, default=None)
    p_vrec.add_argument("--u0", type=int, default=None)
    p_vrec.add_argument("--u1", type=int, default=None)
    p_vrec.add_argument("--coeffs", default=None)
    p_vrec.add_argument("--init", default=None)
    p_vrec.add_argument("--shift", type=int, default=0)
    p_vrec.add_argument("--power", type=int, required=True)
    p_vrec.add_argument("--exact-bound", type=int, default=40)

    p_ell = sub.add_parser("ell", help="orbit certificate on an elliptic curve")
    p_ell.add_argument("--curve", required=True, help="A,B for y^2 = x^3 + A*x + B")
    p_ell.add_argument("--point", required=True, help="x,y rational point")
    p_ell.add_argument("--fiber", action="append", required=True,
                       help="file with a polynomial in x1, x2, T (x1=x(P), x2=y(P))")
    p_ell.add_argument("--mode", choices=("noroot", "irred"), default="noroot")
    p_ell.add_argument("--assume-no-cm", action="store_true",
                       help="assert the curve has no complex multiplication (not checked)")
    _add_search_flags(p_ell, 10**4)

    p_vell = sub.add_parser("ell-verify", help="verify an elliptic certificate")
    p_vell.add_argument("--cert", required=True)
    p_vell.add_argument("--curve", required=True)
    p_vell.add_argument("--point", required=True)
    p_vell.add_argument("--fiber", action="append", required=True)
    p_vell.add_argument("--exact-bound", type=int, default=8)

    p_kron = sub.add_parser("kron", help="exponent-substitution irreducibility report")
    p_kron.add_argument("--poly", required=True)
    p_kron.add_argument("--m-range", required=True, help="e.g. 2..30")
    p_kron.add_argument("--vectors", default=None, help="file of comma-separated exponent vectors")
    p_kron.add_argument("--torsion-orders", default=None, help="e.g. 2,3,4,6")
    p_kron.add_argument("--subgroup-prime", type=int, default=0)
    p_kron.add_argument("--seed", type=int, default=0)
    p_kron.add_argument("--out", default=None)

    return parser


def _cmd_pb(args) -> int:
    cover = CoverSpec.ingest(_read_poly_file(args.cover))
    verdict = pb_check(cover, AbsBudget(max_prime=args.max_witness_prime))
    env = cert_io.envelope_from_pb(cover, verdict, args.seed)
    _write_envelope(env, args.out)
    print(f"pb: {verdict.status}" + (f" ({verdict.reason})" if verdict.reason else ""), file=sys.stderr)
    if verdict.status == "unknown":
        print(f"budget used: {verdict.budget_report}", file=sys.stderr)
        return EXIT_EXHAUSTED
    return EXIT_OK


def _cmd_torus(args) -> int:
    covers = _load_covers(args.cover)
    base = _base_point(args)
    config = TorusConfig(
        mode=_MODE_BY_FLAG[args.mode],
        min_prime=args.min_prime,
        max_prime=args.max_prime,
        seed=args.seed,
        jobs=args.jobs,
        gate=not args.skip_pb_gate,
    )
    started = time.monotonic()
    result = find_progression(covers, base, config)
    elapsed = time.monotonic() - started
    _emit_trace(args.emit_trace, result.trace, elapsed)
    if result.certificate is None:
        print(f"exhausted after {result.trace.candidates_considered} primes", file=sys.stderr)
        return EXIT_EXHAUSTED
    env = cert_io.envelope_from_torus(result.certificate, result.trace)
    _write_envelope(env, args.out)
    c = result.certificate
    print(f"certificate: l={c.l} M={c.modulus} residues={list(c.residues)}", file=sys.stderr)
    return EXIT_OK


def _cmd_verify(args) -> int:
    env = cert_io.load_envelope(args.cert)
    inputs = cert_io.VerifyInputs(exact_bound=args.exact_bound)
    if env.kind == "torus":
        if not args.cover or not args.xi:
            print("torus verification needs --cover and --xi", file=sys.stderr)
            return EXIT_INPUT
        inputs.covers = _load_covers(args.cover)
        inputs.base = _base_point(args)
    elif env.kind == "kron-report":
        if not args.poly:
            print("kron verification needs --poly", file=sys.stderr)
            return EXIT_INPUT
        inputs.poly_f = _read_poly_file(args.poly)
    elif env.kind == "pb-verdict":
        if not args.cover:
            print("pb verification needs --cover", file=sys.stderr)
            return EXIT_INPUT
        inputs.cover = CoverSpec.ingest(_read_poly_file(args.cover[0]))
    else:
        print(f"use the dedicated verifier for kind {env.kind!r}", file=sys.stderr)
        return EXIT_INPUT
    verdict = cert_io.verify_envelope(env, inputs)
    if verdict.accepted:
        print("Accept", file=sys.stderr)
        return EXIT_OK
    print(f"Reject: {verdict.reason}", file=sys.stderr)
    return EXIT_REJECT


def _rec_spec(args) -> RecurrenceSpec:
    if args.coeffs is not None or args.init is not None:
        if args.coeffs is None or args.init is None:
            raise ValueError("--coeffs and --init go together")
        return RecurrenceSpec.make(_ints(args.coeffs), _ints(args.init), args.shift, args.power)
    if None in (args.trace, args.norm, args.u0, args.u1):
        raise ValueError("need --trace/--norm/--u0/--u1 or --coeffs/--init")
    return rec_from_quadratic(args.trace, args.norm, args.u0, args.u1, args.shift, args.power)


def _cmd_rec(args) -> int:
    spec = _rec_spec(args)
    if spec.degenerate:
        print("warning: degenerate recurrence (search may not terminate)", file=sys.stderr)
    config = RecConfig(
        min_prime=args.min_prime, max_prime=args.max_prime, seed=args.seed, jobs=args.jobs
    )
    started = time.monotonic()
    result = find_power_free_progression(spec, config)
    elapsed = time.monotonic() - started
    _emit_trace(args.emit_trace, result.trace, elapsed)
    if result.certificate is None:
        print(f"exhausted after {result.trace.candidates_considered} primes", file=sys.stderr)
        return EXIT_EXHAUSTED
    env = cert_io.envelope_from_recurrence(result.certificate, result.trace)
    _write_envelope(env, args.out)
    c = result.certificate
    print(f"certificate: l={c.l} period={c.period} residues={list(c.residues)}", file=sys.stderr)
    return EXIT_OK


def _cmd_verify_rec(args) -> int:
    env = cert_io.load_envelope(args.cert)
    if env.kind != "recurrence":
        print(f"expected a recurrence certificate, got {env.kind!r}", file=sys.stderr)
        return EXIT_INPUT
    spec = _rec_spec(args)
    verdict = cert_io.verify_envelope(
        env, cert_io.VerifyInputs(rec_spec=spec, exact_bound=args.exact_bound)
    )
    if verdict.accepted:
        print("Accept", file=sys.stderr)
        return EXIT_OK
    print(f"Reject: {verdict.reason}", file=sys.stderr)
    return EXIT_REJECT


def _cmd_ell(args) -> int:
    if not args.assume_no_cm:
        print("refusing to search without --assume-no-cm (the no-CM hypothesis "
              "is asserted by the caller, never checked)", file=sys.stderr)
        return EXIT_INPUT
    curve = _curve(args)
    point = _point(args)
    fibers = [FiberSpec.ingest(_read_poly_file(p)) for p in args.fiber]
    config = EllConfig(
        mode=_MODE_BY_FLAG[args.mode],
        min_prime=args.min_prime,
        max_prime=args.max_prime,
        seed=args.seed,
        jobs=args.jobs,
        assume_no_cm=True,
    )
    started = time.monotonic()
    result = ec_find_progression(curve, point, fibers, config)
    elapsed = time.monotonic() - started
    _emit_trace(args.emit_trace, result.trace, elapsed)
    if result.certificate is None:
        print(f"exhausted after {result.trace.candidates_considered} primes", file=sys.stderr)
        return EXIT_EXHAUSTED
    env = cert_io.envelope_from_elliptic(result.certificate, result.trace)
    _write_envelope(env, args.out)
    c = result.certificate
    print(f"certificate: l={c.l} M={c.modulus} residues={list(c.residues)}", file=sys.stderr)
    return EXIT_OK


def _cmd_ell_verify(args) -> int:
    env = cert_io.load_envelope(args.cert)
    if env.kind != "elliptic":
        print(f"expected an elliptic certificate, got {env.kind!r}", file=sys.stderr)
        return EXIT_INPUT
    inputs = cert_io.VerifyInputs(
        curve=_curve(args),
        point=_point(args),
        fibers=[FiberSpec.ingest(_read_poly_file(p)) for p in args.fiber],
        exact_bound=args.exact_bound,
    )
    verdict = cert_io.verify_envelope(env, inputs)
    if verdict.accepted:
        print("Accept", file=sys.stderr)
        return EXIT_OK
    print(f"Reject: {verdict.reason}", file=sys.stderr)
    return EXIT_REJECT


def _cmd_kron(args) -> int:
    f = _read_poly_file(args.poly)
    vectors: tuple = ()
    if args.vectors:
        with open(args.vectors, "r", encoding="utf-8") as fh:
            vectors = tuple(
                tuple(_ints(line)) for line in fh if line.strip() and not line.startswith("#")
            )
    torsion = tuple(_ints(args.torsion_orders)) if args.torsion_orders else ()
    report = kron_scan(
        f,
        _m_range(args.m_range),
        torsion_orders=torsion,
        vectors=vectors,
        subgroup_prime=args.subgroup_prime,
        seed=args.seed,
    )
    env = cert_io.envelope_from_kron(report, args.seed)
    _write_envelope(env, args.out)
    certified = sum(1 for v in report.verdicts if v.status == "certified_irreducible")
    print(
        f"report: {certified}/{len(report.verdicts)} values of m certified; "
        f"{len(report.exceptional)} exceptional vectors",
        file=sys.stderr,
    )
    return EXIT_OK


_COMMANDS = {
    "pb": _cmd_pb,
    "torus": _cmd_torus,
    "verify": _cmd_verify,
    "rec": _cmd_rec,
    "verify-rec": _cmd_verify_rec,
    "ell": _cmd_ell,
    "ell-verify": _cmd_ell_verify,
    "kron": _cmd_kron,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else 0
    try:
        return _COMMANDS[args.command](args)
    except (DigestMismatch, SchemaError, PreconditionFailed) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CertforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
