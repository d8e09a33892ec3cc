"""Certificate envelopes: canonical JSON, strict schema, digests, dispatch.

Envelopes are byte-deterministic: keys are sorted, separators fixed, integers
beyond 2^53 are wrapped as {"$bigint": "..."} for cross-tool safety, and no
wall-clock data is stored.  Loading rejects unknown fields and malformed
payloads with a JSON pointer; verification recomputes input digests and then
defers to the kind-specific verifier, never touching search code.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import DigestMismatch, SchemaError

VERSION = 1
TOOLCHAIN = "certforge 0.1.0"
DIGEST_ALGORITHM = "sha256"
KINDS = ("torus", "recurrence", "elliptic", "kron-report", "pb-verdict")

_BIG = 1 << 53


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ------------------------------------------------------------------------------
# canonical JSON with big-integer wrapping


def _encode_tree(obj):
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, int):
        if abs(obj) > _BIG:
            return {"$bigint": str(obj)}
        return obj
    if isinstance(obj, str) or obj is None:
        return obj
    if isinstance(obj, (list, tuple)):
        return [_encode_tree(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _encode_tree(v) for k, v in obj.items()}
    raise TypeError(f"cannot encode {type(obj).__name__} into a certificate")


def _decode_tree(obj):
    if isinstance(obj, dict):
        if set(obj.keys()) == {"$bigint"}:
            return int(obj["$bigint"])
        return {k: _decode_tree(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode_tree(v) for v in obj]
    return obj


def canonical_bytes(tree) -> bytes:
    return (json.dumps(_encode_tree(tree), sort_keys=True, separators=(",", ":")) + "\n").encode()


# ------------------------------------------------------------------------------
# schema validation

_INT, _STR = "int", "str"


def _validate(obj, spec, pointer: str) -> None:
    if spec == _INT:
        if not isinstance(obj, int) or isinstance(obj, bool):
            raise SchemaError("expected an integer", pointer)
        return
    if spec == _STR:
        if not isinstance(obj, str):
            raise SchemaError("expected a string", pointer)
        return
    if isinstance(spec, tuple) and spec and spec[0] == "nullable":
        if obj is None:
            return
        _validate(obj, spec[1], pointer)
        return
    if isinstance(spec, list):
        if not isinstance(obj, list):
            raise SchemaError("expected a list", pointer)
        for i, v in enumerate(obj):
            _validate(v, spec[0], f"{pointer}/{i}")
        return
    if isinstance(spec, dict):
        if not isinstance(obj, dict):
            raise SchemaError("expected an object", pointer)
        unknown = set(obj) - set(spec)
        if unknown:
            raise SchemaError(f"unknown field {sorted(unknown)[0]!r}", pointer)
        missing = set(spec) - set(obj)
        if missing:
            raise SchemaError(f"missing field {sorted(missing)[0]!r}", pointer)
        for k, sub in spec.items():
            _validate(obj[k], sub, f"{pointer}/{k}")
        return
    raise AssertionError(f"bad schema spec {spec!r}")


_FIBER_RECORD = {"residue": _INT, "coeffs": [_INT], "factor_degrees": [_INT]}

_WITNESS = {
    "kind": _STR,
    "fiber_var": _STR,
    "l": _INT,
    "ext_degree": _INT,
    "point_vars": [_STR],
    "point_codes": [_INT],
    "disc": _STR,
}

_EVIDENCE = {
    "kind": _STR,
    "m": _INT,
    "factor": _STR,
    "cofactor": _STR,
    "disc": _STR,
    "sqrt_constant": _STR,
    "sqrt_poly": _STR,
}

_PAYLOAD_SCHEMAS = {
    "torus": {
        "mode": _STR,
        "l": _INT,
        "modulus": _INT,
        "residues": [_INT],
        "fibers": [[_FIBER_RECORD]],
        "cover_digests": [_STR],
        "base_digest": _STR,
        "seed": _INT,
    },
    "recurrence": {
        "l": _INT,
        "period": _INT,
        "residues": [_INT],
        "spec_digest": _STR,
        "seed": _INT,
    },
    "elliptic": {
        "mode": _STR,
        "l": _INT,
        "modulus": _INT,
        "residues": [_INT],
        "fibers": [[_FIBER_RECORD]],
        "curve_digest": _STR,
        "point_digest": _STR,
        "fiber_digests": [_STR],
        "seed": _INT,
    },
    "kron-report": {
        "poly_digest": _STR,
        "m_range": [_INT],
        "verdicts": [{"m": _INT, "status": _STR, "method": _STR, "disc": _STR, "note": _STR}],
        "vectors": [[_INT]],
        "exceptional": [
            {
                "vector": [_INT],
                "reason": _STR,
                "torsion_order": _INT,
                "theta_codes": [_INT],
            }
        ],
        "torsion_orders": [_INT],
        "subgroup_prime": _INT,
        "seed": _INT,
    },
    "pb-verdict": {
        "status": _STR,
        "fiber_var": _STR,
        "d": _INT,
        "witness": ("nullable", _WITNESS),
        "evidence": ("nullable", _EVIDENCE),
        "reason": _STR,
    },
}

_ENVELOPE_SCHEMA = {
    "version": _INT,
    "kind": _STR,
    "payload": None,  # validated per kind
    "digests": None,  # validated per kind
    "digest_algorithm": _STR,
    "seed": _INT,
    "toolchain": _STR,
    "trace": {"candidates_considered": _INT, "strategy": _STR, "winner_l": _INT},
}

_DIGEST_SCHEMAS = {
    "torus": {"covers": [_STR], "base": _STR},
    "recurrence": {"recurrence": _STR},
    "elliptic": {"curve": _STR, "point": _STR, "fibers": [_STR]},
    "kron-report": {"poly": _STR},
    "pb-verdict": {"cover": _STR},
}


@dataclass
class Envelope:
    kind: str
    payload: dict
    digests: dict
    seed: int
    trace: dict = field(default_factory=lambda: {"candidates_considered": 0, "strategy": "", "winner_l": 0})
    version: int = VERSION
    toolchain: str = TOOLCHAIN
    digest_algorithm: str = DIGEST_ALGORITHM

    def to_tree(self) -> dict:
        return {
            "version": self.version,
            "kind": self.kind,
            "payload": self.payload,
            "digests": self.digests,
            "digest_algorithm": self.digest_algorithm,
            "seed": self.seed,
            "toolchain": self.toolchain,
            "trace": self.trace,
        }


def dumps_envelope(env: Envelope) -> bytes:
    return canonical_bytes(env.to_tree())


def save_envelope(env: Envelope, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps_envelope(env))


def loads_envelope(data: bytes) -> Envelope:
    try:
        tree = _decode_tree(json.loads(data.decode("utf-8")))
    except (ValueError, UnicodeDecodeError) as exc:
        raise SchemaError(f"invalid JSON: {exc}", "") from None
    if not isinstance(tree, dict):
        raise SchemaError("top level must be an object", "")
    unknown = set(tree) - set(_ENVELOPE_SCHEMA)
    if unknown:
        raise SchemaError(f"unknown field {sorted(unknown)[0]!r}", "")
    missing = set(_ENVELOPE_SCHEMA) - set(tree)
    if missing:
        raise SchemaError(f"missing field {sorted(missing)[0]!r}", "")
    if tree["version"] != VERSION:
        raise SchemaError(f"unsupported version {tree['version']!r}", "/version")
    kind = tree["kind"]
    if kind not in KINDS:
        raise SchemaError(f"unknown kind {kind!r}", "/kind")
    if tree["digest_algorithm"] != DIGEST_ALGORITHM:
        raise SchemaError("unsupported digest algorithm", "/digest_algorithm")
    for name, spec in _ENVELOPE_SCHEMA.items():
        if spec is not None:
            _validate(tree[name], spec, f"/{name}")
    _validate(tree["payload"], _PAYLOAD_SCHEMAS[kind], "/payload")
    _validate(tree["digests"], _DIGEST_SCHEMAS[kind], "/digests")
    return Envelope(
        kind=kind,
        payload=tree["payload"],
        digests=tree["digests"],
        seed=tree["seed"],
        trace=tree["trace"],
        version=tree["version"],
        toolchain=tree["toolchain"],
        digest_algorithm=tree["digest_algorithm"],
    )


def load_envelope(path: str) -> Envelope:
    with open(path, "rb") as fh:
        return loads_envelope(fh.read())


# ------------------------------------------------------------------------------
# payload builders and parsers


def envelope_from_torus(cert, trace) -> Envelope:
    payload = {
        "mode": cert.mode,
        "l": cert.l,
        "modulus": cert.modulus,
        "residues": list(cert.residues),
        "fibers": [
            [
                {"residue": rec.residue, "coeffs": list(rec.coeffs), "factor_degrees": list(rec.factor_degrees)}
                for rec in records
            ]
            for records in cert.fibers
        ],
        "cover_digests": list(cert.cover_digests),
        "base_digest": cert.base_digest,
        "seed": cert.seed,
    }
    return Envelope(
        kind="torus",
        payload=payload,
        digests={"covers": list(cert.cover_digests), "base": cert.base_digest},
        seed=cert.seed,
        trace=_trace_tree(trace),
    )


def _trace_tree(trace) -> dict:
    if trace is None:
        return {"candidates_considered": 0, "strategy": "", "winner_l": 0}
    return {
        "candidates_considered": trace.candidates_considered,
        "strategy": trace.strategy,
        "winner_l": trace.winner_l,
    }


def torus_from_payload(payload: dict):
    from .torus import FiberRecord, ProgressionCertificate

    return ProgressionCertificate(
        mode=payload["mode"],
        l=payload["l"],
        modulus=payload["modulus"],
        residues=tuple(payload["residues"]),
        fibers=tuple(
            tuple(
                FiberRecord(rec["residue"], tuple(rec["coeffs"]), tuple(rec["factor_degrees"]))
                for rec in records
            )
            for records in payload["fibers"]
        ),
        cover_digests=tuple(payload["cover_digests"]),
        base_digest=payload["base_digest"],
        seed=payload["seed"],
    )


def envelope_from_recurrence(cert, trace) -> Envelope:
    payload = {
        "l": cert.l,
        "period": cert.period,
        "residues": list(cert.residues),
        "spec_digest": cert.spec_digest,
        "seed": cert.seed,
    }
    return Envelope(
        kind="recurrence",
        payload=payload,
        digests={"recurrence": cert.spec_digest},
        seed=cert.seed,
        trace=_trace_tree(trace),
    )


def recurrence_from_payload(payload: dict):
    from .recurrence import RecurrenceCertificate

    return RecurrenceCertificate(
        l=payload["l"],
        period=payload["period"],
        residues=tuple(payload["residues"]),
        spec_digest=payload["spec_digest"],
        seed=payload["seed"],
    )


def envelope_from_elliptic(cert, trace) -> Envelope:
    payload = {
        "mode": cert.mode,
        "l": cert.l,
        "modulus": cert.modulus,
        "residues": list(cert.residues),
        "fibers": [
            [
                {"residue": rec.residue, "coeffs": list(rec.coeffs), "factor_degrees": list(rec.factor_degrees)}
                for rec in records
            ]
            for records in cert.fibers
        ],
        "curve_digest": cert.curve_digest,
        "point_digest": cert.point_digest,
        "fiber_digests": list(cert.fiber_digests),
        "seed": cert.seed,
    }
    return Envelope(
        kind="elliptic",
        payload=payload,
        digests={
            "curve": cert.curve_digest,
            "point": cert.point_digest,
            "fibers": list(cert.fiber_digests),
        },
        seed=cert.seed,
        trace=_trace_tree(trace),
    )


def elliptic_from_payload(payload: dict):
    from .elliptic import EllipticCertificate
    from .torus import FiberRecord

    return EllipticCertificate(
        mode=payload["mode"],
        l=payload["l"],
        modulus=payload["modulus"],
        residues=tuple(payload["residues"]),
        fibers=tuple(
            tuple(
                FiberRecord(rec["residue"], tuple(rec["coeffs"]), tuple(rec["factor_degrees"]))
                for rec in records
            )
            for records in payload["fibers"]
        ),
        curve_digest=payload["curve_digest"],
        point_digest=payload["point_digest"],
        fiber_digests=tuple(payload["fiber_digests"]),
        seed=payload["seed"],
    )


def envelope_from_kron(report, seed: int = 0) -> Envelope:
    payload = {
        "poly_digest": report.poly_digest,
        "m_range": list(report.m_range),
        "verdicts": [
            {"m": v.m, "status": v.status, "method": v.method, "disc": v.disc, "note": v.note}
            for v in report.verdicts
        ],
        "vectors": [list(v) for v in report.vectors],
        "exceptional": [
            {
                "vector": list(flag.vector),
                "reason": flag.reason,
                "torsion_order": flag.torsion_order,
                "theta_codes": list(flag.theta_codes),
            }
            for flag in report.exceptional
        ],
        "torsion_orders": list(report.torsion_orders),
        "subgroup_prime": report.subgroup_prime,
        "seed": report.seed,
    }
    return Envelope(
        kind="kron-report",
        payload=payload,
        digests={"poly": report.poly_digest},
        seed=seed,
    )


def kron_from_payload(payload: dict):
    from .kron import ExceptionalFlag, KronReport, KronVerdict

    return KronReport(
        poly_digest=payload["poly_digest"],
        m_range=tuple(payload["m_range"]),
        verdicts=tuple(
            KronVerdict(v["m"], v["status"], v["method"], v["disc"], v["note"])
            for v in payload["verdicts"]
        ),
        vectors=tuple(tuple(v) for v in payload["vectors"]),
        exceptional=tuple(
            ExceptionalFlag(
                tuple(flag["vector"]),
                flag["reason"],
                flag["torsion_order"],
                tuple(flag["theta_codes"]),
            )
            for flag in payload["exceptional"]
        ),
        torsion_orders=tuple(payload["torsion_orders"]),
        subgroup_prime=payload["subgroup_prime"],
        seed=payload["seed"],
    )


def envelope_from_pb(cover, verdict, seed: int = 0) -> Envelope:
    from .torus import cover_digest

    witness = None
    if verdict.witness is not None:
        w = verdict.witness
        witness = {
            "kind": w.kind,
            "fiber_var": w.fiber_var,
            "l": w.l,
            "ext_degree": w.ext_degree,
            "point_vars": list(w.point_vars),
            "point_codes": list(w.point_codes),
            "disc": w.disc,
        }
    evidence = None
    if verdict.evidence is not None:
        ev = verdict.evidence
        evidence = {
            "kind": ev.kind,
            "m": ev.m,
            "factor": ev.factor,
            "cofactor": ev.cofactor,
            "disc": ev.disc,
            "sqrt_constant": ev.sqrt_constant,
            "sqrt_poly": ev.sqrt_poly,
        }
    payload = {
        "status": verdict.status,
        "fiber_var": cover.fiber_var,
        "d": cover.d,
        "witness": witness,
        "evidence": evidence,
        "reason": verdict.reason,
    }
    return Envelope(
        kind="pb-verdict",
        payload=payload,
        digests={"cover": cover_digest(cover)},
        seed=seed,
    )


# ------------------------------------------------------------------------------
# verification dispatch


@dataclass
class VerifyInputs:
    covers: Optional[list] = None
    base: Optional[object] = None
    rec_spec: Optional[object] = None
    curve: Optional[object] = None
    point: Optional[object] = None
    fibers: Optional[list] = None
    poly_f: Optional[object] = None
    cover: Optional[object] = None
    exact_bound: Optional[int] = None


def _require(value, name: str):
    if value is None:
        raise ValueError(f"verification needs {name}")
    return value


def verify_envelope(env: Envelope, inputs: VerifyInputs):
    """Digest check, then kind-specific verification (never search code)."""
    from .torus import Verdict

    if env.kind == "torus":
        from .torus import base_digest, cover_digest, verify_certificate

        covers = _require(inputs.covers, "covers")
        base = _require(inputs.base, "base point")
        if [cover_digest(c) for c in covers] != list(env.digests["covers"]):
            raise DigestMismatch("cover digests do not match the envelope")
        if base_digest(base) != env.digests["base"]:
            raise DigestMismatch("base point digest does not match the envelope")
        cert = torus_from_payload(env.payload)
        return verify_certificate(cert, covers, base, inputs.exact_bound or 40)
    if env.kind == "recurrence":
        from .recurrence import spec_digest, verify_power_certificate

        spec = _require(inputs.rec_spec, "recurrence spec")
        if spec_digest(spec) != env.digests["recurrence"]:
            raise DigestMismatch("recurrence digest does not match the envelope")
        cert = recurrence_from_payload(env.payload)
        return verify_power_certificate(cert, spec, inputs.exact_bound or 40)
    if env.kind == "elliptic":
        from .elliptic import curve_digest, ec_verify, fiber_digest, point_digest

        curve = _require(inputs.curve, "curve")
        point = _require(inputs.point, "point")
        fibers = _require(inputs.fibers, "fiber specs")
        if curve_digest(curve) != env.digests["curve"]:
            raise DigestMismatch("curve digest does not match the envelope")
        if point_digest(point) != env.digests["point"]:
            raise DigestMismatch("point digest does not match the envelope")
        if [fiber_digest(fs) for fs in fibers] != list(env.digests["fibers"]):
            raise DigestMismatch("fiber digests do not match the envelope")
        cert = elliptic_from_payload(env.payload)
        return ec_verify(cert, curve, point, fibers, inputs.exact_bound or 8)
    if env.kind == "kron-report":
        from .kron import verify_kron_report
        from .pbgate import CoverSpec

        f = _require(inputs.poly_f, "polynomial")
        cover = CoverSpec.ingest(f)
        if sha256_hex(cover.canonical()) != env.digests["poly"]:
            raise DigestMismatch("polynomial digest does not match the envelope")
        report = kron_from_payload(env.payload)
        return verify_kron_report(f, report)
    if env.kind == "pb-verdict":
        from .pbgate import (
            AbsIrredWitness,
            NotPBEvidence,
            verify_abs_witness,
            verify_not_pb_evidence,
        )
        from .poly import pullback
        from .torus import cover_digest

        cover = _require(inputs.cover, "cover")
        if cover_digest(cover) != env.digests["cover"]:
            raise DigestMismatch("cover digest does not match the envelope")
        status = env.payload["status"]
        if status == "unknown":
            return Verdict(True, "unknown verdict makes no claim")
        if status == "certified_pb":
            w = env.payload["witness"]
            if w is None:
                return Verdict(False, "certified_pb without a witness")
            witness = AbsIrredWitness(
                w["kind"],
                w["fiber_var"],
                w["l"],
                w["ext_degree"],
                tuple(w["point_vars"]),
                tuple(w["point_codes"]),
                w["disc"],
            )
            g = pullback(cover.f, cover.d)
            ok = verify_abs_witness(g, witness)
            return Verdict(ok, "" if ok else "pull-back witness failed to re-verify")
        if status == "certified_not_pb":
            ev = env.payload["evidence"]
            if ev is None:
                return Verdict(False, "certified_not_pb without evidence")
            evidence = NotPBEvidence(
                ev["kind"],
                ev["m"],
                ev["factor"],
                ev["cofactor"],
                ev["disc"],
                ev["sqrt_constant"],
                ev["sqrt_poly"],
            )
            ok = verify_not_pb_evidence(cover, evidence)
            return Verdict(ok, "" if ok else "reducibility evidence failed to re-verify")
        return Verdict(False, f"unknown status {status!r}")
    raise SchemaError(f"unknown kind {env.kind!r}", "/kind")
