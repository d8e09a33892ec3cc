#!/usr/bin/env python3
"""Regenerate the bundled certificates under certs/.

Valid certificates come from the searches (or, for the torus anchor, from the
hand-derived class set); tampered variants stay schema-valid so that the
verifier, not the loader, rejects them.
"""

from __future__ import annotations

import copy
import json
import pathlib
import sys
from fractions import Fraction

ROOT = pathlib.Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from certforge import certificate as cert_io  # noqa: E402
from certforge.elliptic import EllipticCurveQ, FiberSpec, ec_find_progression  # noqa: E402
from certforge.kron import kron_scan  # noqa: E402
from certforge.pbgate import CoverSpec, pb_check  # noqa: E402
from certforge.poly import parse_poly  # noqa: E402
from certforge.recurrence import rec_from_quadratic, find_power_free_progression  # noqa: E402
from certforge.torus import (  # noqa: E402
    MODE_NO_ROOT,
    BasePoint,
    GoodClasses,
    ProgressionCertificate,
    SearchTrace,
    _fiber_records,
    base_digest,
    cover_digest,
)

CERTS = ROOT / "certs"


def write(name: str, env) -> None:
    path = CERTS / name
    path.write_bytes(cert_io.dumps_envelope(env))
    print("wrote", path)


def mutate(env_bytes: bytes, edit) -> bytes:
    tree = json.loads(env_bytes.decode())
    edit(tree)
    return (json.dumps(tree, sort_keys=True, separators=(",", ":")) + "\n").encode()


def main() -> None:
    CERTS.mkdir(exist_ok=True)

    cover = CoverSpec.ingest(parse_poly("y^2 - x1 - x2 - 1"))
    base = BasePoint.make([2, 3])
    # hand-derived anchor: fiber values 2^n + 3^n + 1 mod 7 are 3, 6, 0, 1, 0, 3
    # for n = 0..5; classes 1 and 5 carry the non-residues 6 and 3.
    classes = GoodClasses(6, (1, 5))
    anchor = ProgressionCertificate(
        mode=MODE_NO_ROOT,
        l=7,
        modulus=6,
        residues=classes.residues,
        fibers=_fiber_records([cover], base, 7, classes, 0),
        cover_digests=(cover_digest(cover),),
        base_digest=base_digest(base),
        seed=0,
    )
    env = cert_io.envelope_from_torus(anchor, SearchTrace(0, "hand_derived", 7))
    write("torus_anchor.json", env)
    data = cert_io.dumps_envelope(env)

    # tampered: inject residue 2 (fiber value 0 mod 7, so y^2 has a root)
    def inject_residue(tree):
        tree["payload"]["residues"] = [1, 2, 5]
        records = tree["payload"]["fibers"][0]
        records.insert(1, {"residue": 2, "coeffs": [0, 0, 1], "factor_degrees": [1, 1]})

    (CERTS / "torus_anchor_tampered.json").write_bytes(mutate(data, inject_residue))

    # tampered: bit-flip inside the stored fiber polynomial of residue 1
    def bitflip(tree):
        tree["payload"]["fibers"][0][0]["coeffs"][0] ^= 1

    (CERTS / "torus_anchor_bitflip.json").write_bytes(mutate(data, bitflip))

    spec = rec_from_quadratic(4, 5, 2, 4, 1, 2)
    rec_res = find_power_free_progression(spec)
    env = cert_io.envelope_from_recurrence(rec_res.certificate, rec_res.trace)
    write("rec_anchor.json", env)

    def inject_zero(tree):
        tree["payload"]["residues"] = sorted(set(tree["payload"]["residues"]) | {0})

    (CERTS / "rec_anchor_tampered.json").write_bytes(
        mutate(cert_io.dumps_envelope(env), inject_zero)
    )

    curve = EllipticCurveQ.make(0, -2)
    point = (Fraction(3), Fraction(5))
    fiber = FiberSpec.ingest(parse_poly("T^2 - x1"))
    ell_res = ec_find_progression(curve, point, [fiber])
    env = cert_io.envelope_from_elliptic(ell_res.certificate, ell_res.trace)
    write("ell_anchor.json", env)

    def inject_identity(tree):
        tree["payload"]["residues"] = [0] + tree["payload"]["residues"]
        records = tree["payload"]["fibers"][0]
        records.insert(0, {"residue": 0, "coeffs": [0, 0, 1], "factor_degrees": [1, 1]})

    (CERTS / "ell_anchor_tampered.json").write_bytes(
        mutate(cert_io.dumps_envelope(env), inject_identity)
    )

    pb_cover = CoverSpec.ingest(parse_poly("y^2 - x1 - 1"))
    env = cert_io.envelope_from_pb(pb_cover, pb_check(pb_cover))
    write("pb_anchor.json", env)

    def break_disc(tree):
        tree["payload"]["witness"]["disc"] = "4*x1^2 + 8"

    (CERTS / "pb_anchor_tampered.json").write_bytes(
        mutate(cert_io.dumps_envelope(env), break_disc)
    )

    report = kron_scan(
        parse_poly("y^2 - x1 - x2 - 1"),
        (2, 10),
        torsion_orders=(2,),
        vectors=((1, 1), (1, 2)),
        subgroup_prime=19,
    )
    env = cert_io.envelope_from_kron(report)
    write("kron_anchor.json", env)

    def drop_flag(tree):
        tree["payload"]["exceptional"] = []

    (CERTS / "kron_anchor_tampered.json").write_bytes(
        mutate(cert_io.dumps_envelope(env), drop_flag)
    )
    print("done")


if __name__ == "__main__":
    main()
