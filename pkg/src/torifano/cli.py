"""Command line front end: ingest a problem document, run one command,
emit a deterministic JSON report.

Exit codes separate operational failure from mathematical outcome: 0 covers
every computed verdict (including NotExists and Obstructed), 1 is a usage
mistake, 2 invalid input, 3 non-convergence of a requested solve.  Floats
are serialized as strings with 17 significant digits and rationals as
"p/q", so identical inputs byte-reproduce the report apart from wall time.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from enum import Enum
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import InputError, UnknownExampleError
from .geometry import (
    DEFAULT_FLOAT_TOL,
    Fan,
    polytope_from_halfspaces,
    validate_fan,
)
from .masolver import DEFAULT_T_SCHEDULE, solve_continuity_1d
from .moments import barycenter, volume, weighted_barycenter
from .problems import (
    builtin_example,
    document_to_dict,
    load_problem,
    parse_scalar,
    registry_names,
)
from .stability import (
    Decomposition,
    coupled_ke_verdict,
    destabilizer,
    df_invariant,
    lifted_config,
    soliton_residual,
    solve_soliton,
    sum_barycenter,
    validate_decomposition,
)

COMMANDS = (
    "validate",
    "barycenter",
    "ke-verdict",
    "soliton-check",
    "soliton-solve",
    "df",
    "lift",
    "ma-solve",
)

DEFAULT_TOL = 1e-10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def jsonable(value):
    """Deterministic JSON-ready form: Fractions as "p/q", floats as %.17g."""
    if isinstance(value, bool):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, Enum):
        return value.name
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in value]
    if value is None or isinstance(value, str):
        return value
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _geometry_tol(doc):
    return 0 if doc.exact else DEFAULT_FLOAT_TOL


def _build_parts(doc):
    if doc.halfspaces is not None:
        tol = _geometry_tol(doc)
        return [polytope_from_halfspaces(part, tol=tol) for part in doc.halfspaces]
    fan = Fan(doc.rays, doc.max_cones)
    report = validate_fan(fan)
    if not report.ok:
        raise InputError(
            "fan is not a smooth complete Fano fan: "
            + "; ".join(w[0] for w in report.witnesses)
        )
    return None


def _decomposition(doc):
    parts = _build_parts(doc)
    if parts is not None:
        return Decomposition.from_polytopes(parts)
    return Decomposition.from_fan(Fan(doc.rays, doc.max_cones), doc.decomposition)


def _vfields(doc):
    if doc.vector_fields is None:
        return None
    return tuple(tuple(v) for v in doc.vector_fields)


def _single_vfield(args, dec):
    if getattr(args, "vfield", None):
        return tuple(parse_scalar(tok.strip(), "--vfield") for tok in args.vfield.split(","))
    v = destabilizer(dec)
    if v is None:
        return tuple(Fraction(0) for _ in range(dec.dim))
    return v


def _part_interval(polytope):
    xs = sorted(v[0] for v in polytope.vertices)
    return float(xs[0]), float(xs[-1])


# Command handlers return (results, diagnostics, exit_code).

def _cmd_validate(doc, args):
    diagnostics = {"exact": doc.exact}
    if doc.halfspaces is not None:
        parts = []
        ok = True
        try:
            for polytope in _build_parts(doc):
                parts.append(
                    {
                        "nvertices": polytope.nvertices,
                        "redundant_halfspaces": [
                            j for j, r in enumerate(polytope.redundant) if r
                        ],
                        "degenerate": polytope.degenerate,
                    }
                )
                ok = ok and not polytope.degenerate
        except InputError as exc:
            return {"ok": False, "reason": str(exc)}, diagnostics, 0
        results = {"ok": ok, "parts": parts}
        diagnostics["note"] = "raw halfspace route: no fan, ampleness and column sums not checked"
        return results, diagnostics, 0

    fan = Fan(doc.rays, doc.max_cones)
    fan_report = validate_fan(fan)
    results = {
        "fan": {
            "smooth": fan_report.smooth,
            "complete": fan_report.complete,
            "fano": fan_report.fano,
            "witnesses": [list(w) for w in fan_report.witnesses],
        }
    }
    if fan_report.ok:
        dec_report = validate_decomposition(fan, doc.decomposition)
        results["decomposition"] = {
            "k": dec_report.k,
            "row_ampleness": list(dec_report.row_ampleness),
            "column_sums": list(dec_report.column_sums),
            "failures": [list(f) for f in dec_report.failures],
        }
        results["ok"] = dec_report.ok
    else:
        results["ok"] = False
    return results, diagnostics, 0


def _cmd_barycenter(doc, args):
    dec = _decomposition(doc)
    vfields = _vfields(doc)
    parts = []
    for i, mesh in enumerate(dec.meshes):
        entry = {
            "volume": volume(mesh),
            "barycenter": list(barycenter(mesh)),
        }
        if vfields is not None:
            entry["weighted_barycenter"] = list(weighted_barycenter(mesh, vfields[i]))
        parts.append(entry)
    results = {
        "parts": parts,
        "sum_barycenter": list(sum_barycenter(dec)),
    }
    return results, {"exact": dec.exact}, 0


def _cmd_ke_verdict(doc, args):
    dec = _decomposition(doc)
    verdict = coupled_ke_verdict(dec, tol=args.tol)
    results = {
        "verdict": "Exists" if verdict.exists else "NotExists",
        "exists": verdict.exists,
        "sum_barycenter": list(verdict.sum_barycenter),
        "destabilizer": None if verdict.destabilizer is None else list(verdict.destabilizer),
        "exact": verdict.exact,
    }
    return results, {"tol": verdict.tol}, 0


def _cmd_soliton_check(doc, args):
    dec = _decomposition(doc)
    vfields = _vfields(doc)
    if vfields is None:
        raise InputError("soliton-check needs vector_fields in the document")
    residual = soliton_residual(dec, vfields)
    is_zero = (
        all(x == 0 for x in residual.total)
        if dec.exact and all(isinstance(x, Fraction) for row in vfields for x in row)
        else residual.norm < args.tol
    )
    results = {
        "residual": list(residual.total),
        "per_polytope": [list(r) for r in residual.per_polytope],
        "norm": residual.norm,
        "is_soliton": is_zero,
    }
    return results, {"tol": args.tol}, 0


def _cmd_soliton_solve(doc, args):
    dec = _decomposition(doc)
    solution = solve_soliton(dec, tol=args.tol)
    results = {
        "vfield": list(solution.vfield),
        "residual_norm": solution.residual_norm,
        "iterations": solution.iterations,
        "converged": solution.converged,
        "per_polytope_A": [list(r) for r in solution.per_polytope_A],
    }
    diagnostics = {
        "tol": args.tol,
        "hessian_condition": solution.hessian_condition,
    }
    return results, diagnostics, 0 if solution.converged else 3


def _cmd_df(doc, args):
    dec = _decomposition(doc)
    vfield = _single_vfield(args, dec)
    report = df_invariant(dec, vfield)
    results = {
        "value": report.value,
        "vfield": list(report.vfield),
        "sum_barycenter": list(report.sum_barycenter),
    }
    return results, {"exact": dec.exact}, 0


def _cmd_lift(doc, args):
    dec = _decomposition(doc)
    vfield = _single_vfield(args, dec)
    cap = parse_scalar(args.cap, "--cap") if args.cap else None
    parts = []
    for polytope in dec.polytopes:
        lifted = lifted_config(polytope, vfield, cap=cap)
        parts.append(
            {
                "cap": lifted.cap,
                "volume_lifted": lifted.volume_lifted,
                "volume_product": lifted.volume_product,
                "identity_holds": lifted.identity_holds,
            }
        )
    results = {"vfield": list(vfield), "parts": parts}
    return results, {"exact": dec.exact}, 0


def _cmd_ma_solve(doc, args):
    dec = _decomposition(doc)
    if dec.dim != 1:
        raise InputError("ma-solve supports one-dimensional decompositions only")
    intervals = [_part_interval(p) for p in dec.polytopes]
    vfields = _vfields(doc)
    scalars = [0.0] * dec.k if vfields is None else [float(v[0]) for v in vfields]
    result = solve_continuity_1d(
        intervals,
        scalars,
        t_schedule=args.t_schedule,
        R=args.grid["R"],
        spacing=args.grid["h"],
        tol=args.tol,
        include_arrays=args.snapshots is not None,
    )
    if args.snapshots:
        with open(args.snapshots, "w", encoding="utf-8") as handle:
            for snap in result.snapshots:
                handle.write(json.dumps(jsonable(snap), sort_keys=True) + "\n")
    stages = [
        {k: v for k, v in snap.items() if k not in ("grid", "f", "rho")}
        for snap in result.snapshots
    ]
    results = {
        "status": result.status,
        "f_at_zero": [float(f[len(f) // 2]) for f in result.state.f],
        "stages": stages,
    }
    diagnostics = dict(result.diagnostics)
    diagnostics["tol"] = args.tol
    return results, diagnostics, 0


_HANDLERS = {
    "validate": _cmd_validate,
    "barycenter": _cmd_barycenter,
    "ke-verdict": _cmd_ke_verdict,
    "soliton-check": _cmd_soliton_check,
    "soliton-solve": _cmd_soliton_solve,
    "df": _cmd_df,
    "lift": _cmd_lift,
    "ma-solve": _cmd_ma_solve,
}


def _parse_grid(text):
    fields = {}
    for token in text.split(","):
        key, _, value = token.partition("=")
        if key.strip() not in ("R", "h") or not value:
            raise UsageError(f"--grid expects R=<radius>,h=<spacing>, got {text!r}")
        try:
            fields[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--grid: {value!r} is not a number") from None
    if set(fields) != {"R", "h"}:
        raise UsageError(f"--grid expects both R and h, got {text!r}")
    return fields


def _parse_schedule(text):
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise UsageError(f"--t-schedule: {text!r} is not a comma-separated float list") from None


def build_parser():
    parser = _Parser(prog="torifano", description=__doc__)
    parser.add_argument("--version", action="version", version=f"torifano {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name in COMMANDS:
        p = sub.add_parser(name, prog=f"torifano {name}")
        src = p.add_mutually_exclusive_group()
        src.add_argument("--input", help="problem document (JSON file)")
        src.add_argument("--example", help="built-in example name[:param]")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                       help="verdict / convergence tolerance (default 1e-10)")
        p.add_argument("--out", help="also write the report to this file")
        if name in ("df", "lift"):
            p.add_argument("--vfield", help="comma-separated vector, rationals allowed")
        if name == "lift":
            p.add_argument("--cap", help="height cap for the lifted polytope (rational)")
        if name == "ma-solve":
            p.add_argument("--grid", type=_parse_grid, default={"R": 8.0, "h": 0.004},
                           help="grid as R=8,h=0.004")
            p.add_argument("--t-schedule", dest="t_schedule", type=_parse_schedule,
                           default=DEFAULT_T_SCHEDULE,
                           help="comma-separated increasing path ending at 1")
            p.add_argument("--snapshots",
                           help="write one JSON object per path stage to this file")
    return parser


def _resolve_document(args):
    if args.input and args.example:
        raise UsageError("give exactly one of --input or --example")
    if args.input:
        return load_problem(args.input)
    if args.example:
        return builtin_example(args.example)
    raise UsageError("give exactly one of --input or --example")


def run(command, doc, args):
    start = time.perf_counter()
    results, diagnostics, code = _HANDLERS[command](doc, args)
    elapsed = time.perf_counter() - start
    options_used = {"tol": args.tol}
    if command == "ma-solve":
        options_used["grid"] = args.grid
        options_used["t_schedule"] = list(args.t_schedule)
    report = {
        "command": command,
        "document": document_to_dict(doc),
        "options_used": options_used,
        "results": results,
        "diagnostics": diagnostics,
        "version": f"torifano {__version__}",
        "wall_time_s": elapsed,
    }
    return report, code


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("missing command; expected one of: " + ", ".join(COMMANDS))
        doc = _resolve_document(args)
        report, code = run(args.command, doc, args)
    except UsageError as exc:
        print(f"torifano: {exc}", file=sys.stderr)
        return 1
    except UnknownExampleError as exc:
        print(f"torifano: {exc}", file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"torifano: invalid input: {exc}", file=sys.stderr)
        return 2
    payload = json.dumps(jsonable(report), indent=2, sort_keys=True) + "\n"
    sys.stdout.write(payload)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(payload)
    return code


def entrypoint():
    sys.exit(main(sys.argv[1:]))
