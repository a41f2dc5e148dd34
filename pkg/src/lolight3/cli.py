"""Command-line front end: ``lolight3 <command> SPEC [options]``.

Exit codes: 0 success, 1 verification failure, 2 malformed input,
3 undecided (missing certificates).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    CertificateMissing,
    LolightError,
    SpecError,
    VerificationFailed,
)
from .model import MetricSpec, check_invariance, lorentz_signature

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_UNDECIDED = 0, 1, 2, 3

DEFAULT_TOL = {
    "check-parallel": 1e-9,
    "gauss-bonnet": 1e-6,
    "holonomy": 1e-6,
    "verify-map": 1e-8,
    "deform": 1e-8,
    "inspect": 1e-10,
}


# ---------------------------------------------------------------------------
# deterministic output
# ---------------------------------------------------------------------------


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return json.dumps(str(obj))
        return "%.12e" % obj
    return json.dumps(obj)


def dumps(obj, indent: int = 2) -> str:
    """JSON with sorted keys and every float written as %.12e."""
    return _encode(_plain(obj), indent, 0) + "\n"


def _flatten(obj, prefix: str = "") -> list[tuple[str, object]]:
    if isinstance(obj, dict):
        out = []
        for k in sorted(obj):
            out.extend(_flatten(obj[k], f"{prefix}.{k}" if prefix else str(k)))
        return out
    if isinstance(obj, list):
        out = []
        for i, v in enumerate(obj):
            out.extend(_flatten(v, f"{prefix}[{i}]"))
        return out
    return [(prefix, obj)]


def _csv_value(v) -> str:
    if isinstance(v, float):
        return "%.12e" % v
    return "" if v is None else str(v)


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if "csv_rows" in report:
        header, rows = report["csv_rows"]
        w.writerow(header)
        for row in rows:
            w.writerow([_csv_value(v) for v in row])
        return buf.getvalue()
    w.writerow(["key", "value"])
    for k, v in _flatten(_plain(report)):
        w.writerow([k, _csv_value(v)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _working_spec(spec: MetricSpec) -> tuple[MetricSpec, str]:
    """Normal-form coordinates when a reduction exists, else the input coordinates."""
    from .classify import normal_form_certs
    from .normalform import NormalFormClosed, reduce

    if spec.lattice.kind != "gamma":
        return spec, "input"
    try:
        nf = reduce(spec)
    except LolightError:
        return spec, "input"
    if isinstance(nf, NormalFormClosed):
        try:
            return nf.to_spec(normal_form_certs(nf, spec.certs)), "normal_form"
        except CertificateMissing:
            return nf.to_spec(), "normal_form"
    return nf.to_spec(), "normal_form"


def _parse_params(text: str | None) -> dict:
    if not text:
        return {}
    text = text.strip()
    if text.startswith("{"):
        try:
            out = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"--params is not valid JSON: {exc}") from None
        if not isinstance(out, dict):
            raise SpecError("--params must be a JSON object")
        return out
    out = {}
    for item in text.split(","):
        if "=" not in item:
            raise SpecError(f"--params entry {item!r} is not key=value")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v) if any(c in v for c in ".eE") else int(v)
        except ValueError:
            raise SpecError(f"--params value {v!r} is not a number") from None
    return out


def _parse_ts(text: str) -> list[float]:
    try:
        ts = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise SpecError(f"--t must be a comma-separated list of numbers, got {text!r}") from None
    if not ts or any(not 0.0 <= t <= 1.0 for t in ts):
        raise SpecError("--t values must lie in [0, 1]")
    return ts


def _tol(args) -> float:
    return args.tol if args.tol is not None else DEFAULT_TOL.get(args.command, 1e-8)


# ---------------------------------------------------------------------------
# commands; each returns (exit code, report)
# ---------------------------------------------------------------------------


def cmd_inspect(args, spec: MetricSpec):
    from .curvature import check_parallel_X

    inv = check_invariance(spec)
    sig = lorentz_signature(spec)
    par = check_parallel_X(spec, min(args.grid, 32))
    tol = _tol(args)
    ok = inv < tol and sig == (1, 2) and par < 1e-9
    return (EXIT_OK if ok else EXIT_FAIL), {
        "spec": spec.to_json(), "n": spec.n, "theta_value": spec.theta.value,
        "checks": {"lattice_invariance": inv, "signature_neg_pos": list(sig), "parallel_X": par,
                   "passed": ok}}


def cmd_curvature(args, spec: MetricSpec):
    from .curvature import r_on_grid
    from .periodic import grid_points

    r = r_on_grid(spec, args.grid)
    y, z = grid_points(args.grid)
    report = {"grid": args.grid, "sup_abs_r": float(np.abs(r).max()), "mean_r": float(r.mean()),
              "r": r.tolist()}
    if args.format == "csv":
        rows = [(float(a), float(b), float(c)) for a, b, c in
                zip(np.ravel(y), np.ravel(z), np.ravel(r))]
        report["csv_rows"] = (["y", "z", "r"], rows)
    return EXIT_OK, report


def cmd_check_parallel(args, spec: MetricSpec):
    from .curvature import check_parallel_X

    res = check_parallel_X(spec, args.grid)
    tol = _tol(args)
    return (EXIT_OK if res < tol else EXIT_FAIL), {"grid": args.grid, "sup_nabla_X": res,
                                                   "tol": tol, "passed": res < tol}


def cmd_gauss_bonnet(args, spec: MetricSpec):
    from .curvature import gauss_bonnet

    val = gauss_bonnet(spec, args.grid)
    tol = _tol(args)
    ok = abs(val) < tol
    return (EXIT_OK if ok else EXIT_FAIL), {"grid": args.grid, "integral": val, "tol": tol,
                                            "passed": ok}


def cmd_normalize(args, spec: MetricSpec):
    from .normalform import check_ranges, reduce

    nf = reduce(spec)
    change = nf.change
    steps = [] if change is None else [s.describe() for s in change.steps]
    return EXIT_OK, {"normal_form": nf.to_json(), "range_violations": check_ranges(nf),
                     "change": {"label": None if change is None else change.label,
                                "steps": steps}}


def cmd_classify(args, spec: MetricSpec):
    from .classify import UNDECIDED, classify

    rep = classify(spec, grid_n=args.grid)
    out = rep.to_json()
    if rep.table2_case == UNDECIDED or rep.isom_compact == UNDECIDED:
        code = EXIT_UNDECIDED
    else:
        code = EXIT_OK if rep.verified else EXIT_FAIL
    return code, out


def _build_map(args, spec: MetricSpec):
    from .transforms import GENERATOR_KINDS, make_generator

    if args.map not in GENERATOR_KINDS:
        raise SpecError(f"unknown map kind {args.map!r}; choose from {', '.join(GENERATOR_KINDS)}")
    return make_generator(args.map, _parse_params(args.params), spec)


def cmd_verify_map(args, spec: MetricSpec):
    from .transforms import verify_generator

    work, coords = (spec, "input") if args.raw else _working_spec(spec)
    phi = _build_map(args, work)
    rep = verify_generator(work, phi, min(args.grid, 24))
    tol = _tol(args)
    ok = rep.passed(tol_defect=tol)
    out = rep.to_json()
    out.update({"passed": ok, "coordinates": coords, "map": phi.describe(),
                "steps": [s.describe() for s in phi.steps]})
    return (EXIT_OK if ok else EXIT_FAIL), out


def cmd_deform(args, spec: MetricSpec):
    from .deform import path_report

    work, coords = (spec, "input") if args.raw else _working_spec(spec)
    phi = _build_map(args, work)
    rep = path_report(work, phi, _parse_ts(args.t), case_iv=args.case_iv,
                      grid_n=min(args.grid, 24))
    ok = rep["passed"] and all(s["residual"] < _tol(args) for s in rep["samples"])
    rep.update({"coordinates": coords, "passed": ok})
    return (EXIT_OK if ok else EXIT_FAIL), rep


def cmd_holonomy(args, spec: MetricSpec):
    from .curvature import leaf_holonomy_alpha, parallel_transport_loop

    work, coords = _working_spec(spec)
    z = float(args.z)
    alpha = float(leaf_holonomy_alpha(work, z))
    m1 = parallel_transport_loop(work, z, "gamma1")
    m2 = parallel_transport_loop(work, z, "gamma2")
    e1 = float(np.abs(m1 - np.eye(2)).max())
    e2 = float(np.abs(m2 - np.array([[1.0, alpha], [0.0, 1.0]])).max())
    tol = _tol(args)
    ok = e2 < tol and e1 < tol
    return (EXIT_OK if ok else EXIT_FAIL), {
        "z": z, "alpha": alpha, "gamma1": m1.tolist(), "gamma2": m2.tolist(),
        "gamma1_error": e1, "gamma2_error": e2, "coordinates": coords, "passed": ok}


def cmd_selftest(args, spec=None):
    from .acceptance import run_all

    results = run_all(lambda line: print(line, file=sys.stderr))
    ok = all(r.passed for r in results)
    return (EXIT_OK if ok else EXIT_FAIL), {
        "passed": ok, "criteria": [r.to_json() for r in results]}


COMMANDS = {
    "inspect": (cmd_inspect, "echo the parsed spec with invariance checks"),
    "curvature": (cmd_curvature, "curvature function r on a grid"),
    "check-parallel": (cmd_check_parallel, "sup of the covariant derivative of d/dx"),
    "gauss-bonnet": (cmd_gauss_bonnet, "integral of r against the parallel density"),
    "normalize": (cmd_normalize, "normal form and the recorded change of coordinates"),
    "classify": (cmd_classify, "affine-quotient classification report"),
    "verify-map": (cmd_verify_map, "verify a generator by the pullback oracle"),
    "deform": (cmd_deform, "follow a generator along the deformation to a flat metric"),
    "holonomy": (cmd_holonomy, "linear holonomy of the leaf loops at height z"),
    "selftest": (cmd_selftest, "run the acceptance suite"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=64, help="grid size per axis (default 64)")
    common.add_argument("--tol", type=float, default=None, help="pass threshold")
    common.add_argument("--out", type=Path, default=None, help="write the report here")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    ap = argparse.ArgumentParser(prog="lolight3", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name != "selftest":
            p.add_argument("spec", type=Path, help="metric spec (JSON)")
        if name in ("verify-map", "deform"):
            p.add_argument("--map", required=True, help="generator kind")
            p.add_argument("--params", default=None, help="JSON object or k=v,k=v")
            p.add_argument("--raw", action="store_true",
                           help="use the input coordinates instead of the normal form")
        if name == "deform":
            p.add_argument("--t", required=True, help="comma-separated path parameters")
            p.add_argument("--case-iv", action="store_true",
                           help="use the family adapted to y-shifting maps (chi)")
        if name == "holonomy":
            p.add_argument("--z", required=True, type=float, help="leaf height")
    return ap


def _emit(report: dict, args) -> None:
    text = to_csv(report) if args.format == "csv" else dumps(
        {k: v for k, v in report.items() if k != "csv_rows"})
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.grid < 4:
        print("error: --grid must be at least 4", file=sys.stderr)
        return EXIT_INPUT
    fn = COMMANDS[args.command][0]
    try:
        spec = None if args.command == "selftest" else MetricSpec.load(args.spec)
        code, report = fn(args, spec)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (LolightError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = {"command": args.command, **report, "exit_code": code}
    _emit(report, args)
    return code


def main(argv=None) -> None:
    raise SystemExit(run(argv))


__all__ = ["run", "main", "dumps", "to_csv", "build_parser"]
