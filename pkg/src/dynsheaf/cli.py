"""Command-line interface: ``analyze``, ``verify``, ``pairs``, ``torsors`` and ``spectral``.

Exit codes: 0 when everything checked passes, 1 when an analysis finished
with failed identities, 2 for usage and parse errors.
"""

import argparse
import json
import re
import sys
from dataclasses import replace

import numpy as np

from .errors import DegreeZero, DimensionMismatch, DynsheafError, MapSyntaxError, NonRationalExpression
from .numerics.tolerances import DEFAULT
from .pairs_ext import CocycleClass, DynPair, pair_hom_ext, torsor_count, two_column_assemble
from .parser import parse_map
from .report import SCHEMA, AnalysisConfig, analyze, report_json, verify

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

_TOL_FLAGS = {
    "eps_point": float,
    "eps_rank": float,
    "eps_residual": float,
    "max_root_iterations": int,
    "q_max": int,
    "unity_tol": float,
    "degree_cap": int,
}


def _tolerances(args):
    kw = {k: getattr(args, k) for k in _TOL_FLAGS if getattr(args, k, None) is not None}
    return replace(DEFAULT, **kw)


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2)


def _matrix(text, what):
    try:
        a = np.array(json.loads(text), dtype=np.complex128)
    except (ValueError, TypeError) as e:
        raise ValueError(f"{what}: not a JSON matrix ({e})") from None
    return np.atleast_2d(a)


def cmd_analyze(args):
    tol = _tolerances(args)
    f = parse_map(args.expr, tol)
    rep = analyze(f, AnalysisConfig(kmax=args.kmax, N=args.N, seed=args.seed, tol=tol), args.expr)
    print(report_json(rep) if args.format == "json" else rep.to_text())
    return EXIT_OK if rep.all_pass else EXIT_FAILED


def cmd_verify(args):
    try:
        results = verify(args.suite, _tolerances(args))
    except KeyError as e:
        print(f"error: {e.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    width = max(len(r.name) for r in results)
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        extra = f"  ({r.detail})" if r.detail and not r.passed else ""
        print(f"{mark}  {r.name:<{width}}{extra}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def _cx(z):
    return [float(z.real) + 0.0, float(z.imag) + 0.0]


def cmd_pairs(args):
    a = DynPair(_matrix(args.phi, "--phi"))
    b = DynPair(_matrix(args.psi, "--psi"))
    res = pair_hom_ext(a, b, _tolerances(args))
    out = {
        "schema": SCHEMA,
        "hom": res.hom_dim,
        "ext1": res.ext1_dim,
        "hom_basis": [[[_cx(x) for x in row] for row in t] for t in res.hom_basis],
    }
    if args.cocycle is not None:
        c = CocycleClass(_matrix(args.cocycle, "--cocycle"), a, b)
        out["cocycle_split"] = c.is_split(_tolerances(args))
        out["extension_matrix"] = [[_cx(x) for x in row] for row in c.extension_matrix()]
    print(_dump(out))
    return EXIT_OK


def parse_group(text):
    """Cyclic factors from ``Z/2xZ/3``, ``Z2 x Z3``, ``2,3`` or ``1`` (trivial group)."""
    t = text.replace(" ", "")
    if re.fullmatch(r"\d+(,\d+)*", t):
        return [int(n) for n in t.split(",")]
    parts = re.split(r"[x*]", t)
    out = []
    for p in parts:
        m = re.fullmatch(r"Z/?(\d+)(?:Z)?", p)
        if m is None:
            raise ValueError(f"cannot read group factor {p!r}")
        out.append(int(m.group(1)))
    return out


def cmd_torsors(args):
    factors = parse_group(args.group)
    order = int(np.prod(factors))
    n = torsor_count(factors)
    print(_dump({"schema": SCHEMA, "factors": factors, "order": order, "classes": n}))
    return EXIT_OK


def cmd_spectral(args):
    src = sys.stdin.read() if args.rows == "-" else open(args.rows).read()
    data = json.loads(src)
    rows = data["rows"] if isinstance(data, dict) else data
    parsed = []
    for r in rows:
        a, b = int(r["E0"]), int(r["E1"])
        m = r.get("matrix")
        if m is not None:
            m = np.array(m, dtype=np.complex128).reshape(b, a) if a * b else np.zeros((b, a))
        parsed.append((a, b, m))
    rep = two_column_assemble(parsed, _tolerances(args))
    print(_dump(dict(rep.to_json(), schema=SCHEMA)))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="dynsheaf", description="Dynamical invariants and Ext bookkeeping for rational maps.")
    tolp = argparse.ArgumentParser(add_help=False)
    for name, typ in _TOL_FLAGS.items():
        tolp.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[tolp], help="analyze a rational map given as an expression in z")
    a.add_argument("expr")
    a.add_argument("--kmax", type=int, default=2, help="largest cycle period")
    a.add_argument("--N", type=int, default=None, help="truncation index for the critical divisor")
    a.add_argument("--seed", type=int, default=0)
    fmt = a.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json")
    fmt.add_argument("--text", dest="format", action="store_const", const="text")
    a.set_defaults(format="text", func=cmd_analyze)

    v = sub.add_parser("verify", parents=[tolp], help="run a built-in suite (core, lattes)")
    v.add_argument("suite")
    v.set_defaults(func=cmd_verify)

    pr = sub.add_parser("pairs", parents=[tolp], help="Hom and Ext^1 of two dynamical pairs")
    pr.add_argument("--phi", required=True, help="JSON matrix of the source endomorphism")
    pr.add_argument("--psi", required=True, help="JSON matrix of the target endomorphism")
    pr.add_argument("--cocycle", default=None, help="JSON matrix h: V -> W to test for splitting")
    pr.set_defaults(func=cmd_pairs)

    t = sub.add_parser("torsors", help="count torsor classes for a finite abelian group")
    t.add_argument("group", help="e.g. Z/2xZ/3 or 2,3")
    t.set_defaults(func=cmd_torsors)

    s = sub.add_parser("spectral", parents=[tolp], help="assemble two-column rows from a JSON file")
    s.add_argument("rows", help="JSON file with rows [{E0, E1, matrix}], or - for stdin")
    s.set_defaults(func=cmd_spectral)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MapSyntaxError, NonRationalExpression, DegreeZero) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, OSError, DimensionMismatch, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DynsheafError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
