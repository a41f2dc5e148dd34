#!/usr/bin/env python3
"""Regenerate the bundled example specs and their expected-label manifest."""

from __future__ import annotations

import argparse
import json
import math
from fractions import Fraction
from pathlib import Path

from lolight3.model import IRRATIONAL, ArithCertificates, LatticeSpec, MetricSpec
from lolight3.periodic import PeriodicFn2D as F
from lolight3.periodic import ThetaSpec

ROOT = Path(__file__).resolve().parents[1]
DEFAULT_OUT = ROOT / "src" / "lolight3" / "corpus"

SQRT3 = math.sqrt(3.0)
# 2 + sin(2 pi z) has harmonic mean sqrt(3)
L2_SIN = F.const(2.0) + F.sin(0, 1, 1.0)
GOLDEN = ThetaSpec.golden()
ZERO = F.zero()


def gamma(n, theta, lam, L2, nu, mu, certs=None) -> MetricSpec:
    return MetricSpec(LatticeSpec.gamma(n), theta, lam, L2, nu, mu, certs or ArithCertificates())


def corpus() -> dict[str, tuple[MetricSpec, dict]]:
    out = {}
    out["case1_torusA"] = (
        MetricSpec(LatticeSpec("torusA", tau=math.sqrt(2.0), r1=0.3, r2=0.1),
                   ThetaSpec.rational(0), 1.0, L2_SIN, ZERO, ZERO),
        {"table1_row": "a", "table2_case": 1, "group": "trivial", "isom_compact": True})
    out["case1_torusB"] = (
        MetricSpec(LatticeSpec("torusB", tau=SQRT3, r1=0.2, r2=0.7),
                   ThetaSpec.rational(0), 1.0, F.const(1.5), ZERO, F.cos(1, 0, 0.4)),
        {"table1_row": "b", "table2_case": 1, "group": "trivial", "isom_compact": True})
    out["case2_diophantine"] = (
        gamma(0, GOLDEN, 1.0, F.const(1.5), F.const(0.25) + F.cos(1, 1, 0.2),
              F.const(0.6) + F.cos(0, 1, 0.3) + F.sin(1, -1, 0.2)),
        {"table1_row": "c", "table2_case": 2, "group": "trivial", "isom_compact": True})
    out["case3_phi0"] = (
        gamma(1, GOLDEN, 1.0, F.const(1.0), ZERO, F.cos(1, 0, 0.5)),
        {"table1_row": "c", "table2_case": 3, "group": "Z", "isom_compact": True})
    out["case4_sigma"] = (
        gamma(0, ThetaSpec.rational(0), 1.0, L2_SIN,
              F.const(0.1) + F.cos(1, 0, 0.1) + F.sin(1, 1, 0.05),
              F.const(0.3) + F.cos(1, 1, 0.5)),
        {"table1_row": "d", "table2_case": 4, "group": "Z", "isom_compact": True})
    out["case5_psi"] = (
        gamma(2, ThetaSpec.rational(0), 1.0, F.const(2.0) + F.sin(0, 2, 0.5), ZERO,
              F.cos(1, 1, 0.4), ArithCertificates(period_decl=(2, 1))),
        {"table1_row": "d", "table2_case": 5, "group": "Z", "isom_compact": True})
    out["case6_chi"] = (
        gamma(0, ThetaSpec.rational(0), SQRT3, L2_SIN, F.const(SQRT3 / 3.0), F.const(0.25),
              ArithCertificates(Fraction(1), Fraction(1, 3))),
        {"table1_row": "d", "table2_case": 6, "group": "Z", "isom_compact": False})
    out["case7_sigma_chi"] = (
        gamma(0, ThetaSpec.rational(0), SQRT3, L2_SIN, F.const(SQRT3 * (math.sqrt(2.0) - 1.0)),
              F.const(0.3), ArithCertificates(Fraction(1), IRRATIONAL)),
        {"table1_row": "d", "table2_case": 7, "group": "Z2", "isom_compact": True})
    out["case8_flat_flow"] = (
        gamma(1, GOLDEN, 1.0, F.const(1.0), ZERO, ZERO),
        {"table1_row": "c", "table2_case": 8, "group": "R", "isom_compact": True})
    out["case9_flow"] = (
        gamma(2, ThetaSpec.rational(0), SQRT3 / 2.0, L2_SIN, ZERO, ZERO,
              ArithCertificates(Fraction(2))),
        {"table1_row": "d", "table2_case": 9, "group": "R", "isom_compact": False})
    out["undecided_no_certificate"] = (
        gamma(0, ThetaSpec.rational(0), 1.3, L2_SIN, F.const(0.2), F.const(0.5)),
        {"table1_row": "d", "table2_case": "undecided", "group": None,
         "isom_compact": "undecided", "missing": "Lcal_over_Lambda"})
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    manifest = {}
    for name, (spec, labels) in corpus().items():
        path = args.out / f"{name}.json"
        path.write_text(json.dumps(spec.to_json(), indent=2, sort_keys=True) + "\n")
        manifest[name] = {"file": path.name, **labels}
    (args.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(manifest)} specs to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
