"""Command-line driver: constant tables, verification suites and flow demos.

Exit codes: 0 when everything passes, 1 on a failed check, 2 on bad usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

from .constants import (Params, sobolev_sharp_constant, sphere_hls_constant, stability_bounds,
                        trace_constants)
from .errors import DomainError, OptimizerError, UsageError
from .funcspace import RadialGrid
from .suites import SUITES, Context, run_suites
from . import symmetry as sym

CONSTANT_COLUMNS = ["n", "s", "S_ns", "K_ns", "hls_bound", "sob_bound", "koenig_upper",
                    "B_ns", "C_ns", "D_ns"]

# Hidden fault hook for testing the failure path: scales down the Sobolev
# constant handed to the suites.
FAULTS = {"sobolev_constant": 0.99}

def _parse_range(text: str, kind) -> list:
    """'3' -> [3]; 'a:b' -> inclusive integer range; 'a:b:h' -> inclusive stepped range."""
    parts = text.split(":")
    try:
        vals = [kind(p) for p in parts]
    except ValueError as exc:
        raise UsageError(f"cannot parse range {text!r}") from exc
    if len(parts) == 1:
        return vals
    if len(parts) == 2:
        lo, hi = vals
        step = kind(1)
    elif len(parts) == 3:
        lo, hi, step = vals
    else:
        raise UsageError(f"cannot parse range {text!r}")
    if not step > 0 or hi < lo:
        raise UsageError(f"empty range {text!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [kind(lo + i * step) if kind is int else round(lo + i * step, 12) for i in range(count)]

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return f"{x:.15g}"

def constants_row(P: Params) -> dict:
    """One table row; trace columns stay empty when s <= 1/2."""
    row = {"n": P.n, "s": P.s, "S_ns": sobolev_sharp_constant(P)}
    try:
        b = stability_bounds(P)
        row.update(K_ns=b.K_ns, hls_bound=b.hls_bound, sob_bound=b.sob_bound,
                   koenig_upper=b.koenig_upper)
    except OptimizerError:
        row.update(K_ns=None, hls_bound=None, sob_bound=None, koenig_upper=None)
    row["B_ns"] = sphere_hls_constant(P)
    if P.n >= 2 and P.s > 0.5:
        t = trace_constants(P)
        row.update(C_ns=t.C_ns, D_ns=t.D_ns)
    else:
        row.update(C_ns=None, D_ns=None)
    return row

def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)

def cmd_constants(args) -> int:
    ns = _parse_range(args.n or "3", int)
    ss = _parse_range(args.s or "1", float)
    single = len(ns) == 1 and len(ss) == 1
    rows = []
    for n in ns:
        for s in ss:
            try:
                P = Params(n, s)
            except DomainError:
                if single:
                    raise
                continue
            rows.append(constants_row(P))
    if not rows:
        raise UsageError("no valid (n, s) pair in the requested ranges")
    if args.format == "json":
        text = json.dumps({"schema": 1, "columns": CONSTANT_COLUMNS, "rows": rows}, indent=1) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CONSTANT_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in CONSTANT_COLUMNS])
        text = buf.getvalue()
    _emit(text, args.out)
    return 0

def cmd_verify(args) -> int:
    ns = _parse_range(args.n or "3", int)
    ss = _parse_range(args.s or "1", float)
    if len(ns) != 1 or len(ss) != 1:
        raise UsageError("verify takes a single n and s")
    P = Params(ns[0], ss[0])
    grid = RadialGrid(P.n, N=args.grid_N)
    ctx = Context(P, grid, tol=args.tol, seed=args.seed)
    if args.fault:
        if args.fault not in FAULTS:
            raise UsageError(f"unknown fault {args.fault!r}")
        ctx.S *= FAULTS[args.fault]
    names = args.suite or None
    if names:
        unknown = [n for n in names if n not in SUITES]
        if unknown:
            raise UsageError(f"unknown suite(s): {', '.join(unknown)}")
    results = []
    lines = []
    for name in names or list(SUITES):
        t0 = time.perf_counter()
        res = run_suites(ctx, [name])[0]
        elapsed = time.perf_counter() - t0
        results.append((res, elapsed))
        if not args.format:
            w = res.worst
            status = "SKIP" if res.skipped else ("PASS" if res.passed else "FAIL")
            detail = res.skipped or (
                "" if w is None else f"worst {w.label} margin {w.margin:.3e}")
            failed = [c.label for c in res.checks if not c.ok]
            if failed:
                detail += " failed: " + ", ".join(failed[:5]) + (" ..." if len(failed) > 5 else "")
            line = f"{res.name:<18} {status}  checks={len(res.checks):<4d} {detail}  ({elapsed:.1f}s)"
            lines.append(line)
            print(line, file=sys.stderr if args.out else sys.stdout, flush=True)
    ok = all(r.passed for r, _ in results)
    if args.format == "json":
        doc = {"schema": 1, "n": P.n, "s": P.s, "seed": args.seed, "pass": ok,
               "suites": [r.to_dict() for r, _ in results]}
        _emit(json.dumps(doc, indent=1) + "\n", args.out)
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "pass", "checks", "worst_check", "worst_margin", "skipped"])
        for r, _ in results:
            d = r.to_dict()
            w.writerow([d["suite"], int(d["pass"]), d["checks"], d["worst_check"] or "",
                        _fmt(d["worst_margin"]), d["skipped"]])
        _emit(buf.getvalue(), args.out)
    elif args.out:
        Path(args.out).write_text("\n".join(lines) + "\n")
    return 0 if ok else 1

def cmd_flow(args) -> int:
    ns = _parse_range(args.n or "2", int)
    if ns != [2]:
        raise UsageError("flows are planar: only n = 2 is supported")
    s = _parse_range(args.s or "0.5", float)
    if len(s) != 1:
        raise UsageError("flow takes a single s")
    P = Params(2, s[0])
    if not P.s < 1:
        raise UsageError("planar flows need 0 < s < 1")
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    if args.input == "fixed":
        x, y = sym.grid_centres(args.grid_N2, 12.0)
        f0 = sym.GridFn2D((2.0 / (1.0 + x * x + y * y)) ** (2.0 / P.hls_exp), 12.0, P)
        cases = [("fixed", f0)]
    else:
        cases = sym.flow_corpus(args.cases, args.seed, N=args.grid_N2, s=P.s)
    summary = ["# case flow steps first_dist last_dist hls_first hls_last"]
    for cid, f0 in cases:
        cs = sym.competing_symmetries(f0, args.steps, distances=True)
        (out / f"competing_{cid}.csv").write_text(cs.to_csv())
        pol = sym.discrete_flow(f0, args.polar_steps, seed=args.seed)
        (out / f"polarization_{cid}.csv").write_text(pol.to_csv())
        for name, t in (("competing", cs), ("polarization", pol)):
            summary.append(f"{cid} {name} {t.step[-1]} {t.dist_to_h[0]:.10g} {t.dist_to_h[-1]:.10g} "
                           f"{t.hls_value[0]:.10g} {t.hls_value[-1]:.10g}")
    if args.gnuplot:
        (out / "summary.dat").write_text("\n".join(summary) + "\n")
    print("\n".join(summary[1:]))
    return 0

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", help="dimension or inclusive range a:b")
    common.add_argument("--s", help="order or inclusive range a:b:step")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file (directory for flow)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--tol", type=float, default=1e-6, help="slack in ratio >= bound checks")
    common.add_argument("--grid-N", dest="grid_N", type=int, default=2048, help="radial grid size")

    parser = argparse.ArgumentParser(prog="hlslab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("constants", parents=[common], help="table of constants and bounds")
    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("--suite", action="append", help=f"one of: {', '.join(SUITES)} (repeatable)")
    v.add_argument("--fault", help=argparse.SUPPRESS)
    f = sub.add_parser("flow", parents=[common], help="planar flow traces as CSV")
    f.add_argument("--steps", type=int, default=30, help="competing-symmetries iterations")
    f.add_argument("--polar-steps", dest="polar_steps", type=int, default=500)
    f.add_argument("--cases", type=int, default=2)
    f.add_argument("--input", choices=["corpus", "fixed"], default="corpus")
    f.add_argument("--grid-N2", dest="grid_N2", type=int, default=128, help="planar cells per side")
    f.add_argument("--gnuplot", action="store_true", help="also write summary.dat")
    return parser

def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"constants": cmd_constants, "verify": cmd_verify, "flow": cmd_flow}[args.command]
    try:
        return handler(args)
    except (UsageError, DomainError) as exc:
        print(f"hlslab: error: {exc}", file=sys.stderr)
        return 2

if __name__ == "__main__":
    sys.exit(main())
