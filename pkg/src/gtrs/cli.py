"""Command-line front end: JSON problem files in, JSON reports out."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import conic
from .canonical import EarlyDiagnostic, canonicalize
from .errors import GtrsError, NotApplicable, ParseError
from .oracle import OracleConfig, brute_force_min, probe_unbounded
from .problem import DEFAULT_TOL, GtrsProblem, Kind
from .reformulate import build_socp, canonical_problem
from .slemma import SLemmaQuery, s_lemma, verify
from .variants import solve

log = logging.getLogger("gtrs")

COMMANDS = ("solve", "classify", "canonical", "slemma", "oracle", "export")
TOL_KEYS = {"tol_eig": "eig", "tol_cluster": "cluster", "tol_dual": "dual", "tol_sym": "sym", "tol_rank": "rank"}


class UnknownCommand(GtrsError):
    pass


def _matrix(data, n, name):
    arr = np.asarray(data, dtype=float)
    if arr.size != n * n:
        raise ParseError(f"{name} has {arr.size} entries, expected {n * n}")
    return arr.reshape(n, n)


def _vector(data, n, name):
    arr = np.asarray(data, dtype=float).reshape(-1)
    if arr.size != n:
        raise ParseError(f"{name} has {arr.size} entries, expected {n}")
    return arr


def parse_problem(doc: dict, tol=DEFAULT_TOL):
    """(problem, offset v, tolerances, warnings) from a problem document."""
    warnings = []
    try:
        n = int(doc["n"])
        D = _matrix(doc["D"], n, "D")
        A = _matrix(doc["A"], n, "A")
        e = _vector(doc.get("e", [0.0] * n), n, "e")
        b = _vector(doc.get("b", [0.0] * n), n, "b")
        kind = Kind(doc.get("kind", "ineq"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad problem file: {exc}") from exc
    overrides = {TOL_KEYS.get(k, k): float(v) for k, v in doc.get("tolerances", {}).items()}
    tol = replace(tol, **overrides)
    for name, M in (("D", D), ("A", A)):
        asym = float(np.max(np.abs(M - M.T))) if n else 0.0
        if asym > tol.sym * (1.0 + float(np.max(np.abs(M)))):
            warnings.append(f"{name} not symmetric (max asymmetry {asym:.3g}); symmetrized")
    if kind is Kind.INTERVAL:
        P = GtrsProblem(D, A, e, b, 0.0, kind, float(doc["c1"]), float(doc["c2"]), name=doc.get("name", ""))
    else:
        P = GtrsProblem(D, A, e, b, float(doc.get("c", 0.0)), kind, name=doc.get("name", ""))
    return P, float(doc.get("v", 0.0)), tol, warnings


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _tol_from_args(args):
    tol = DEFAULT_TOL
    kw = {}
    if args.tol_eig is not None:
        kw["eig"] = args.tol_eig
    if args.tol_cluster is not None:
        kw["cluster"] = args.tol_cluster
    if args.tol_dual is not None:
        kw["dual"] = args.tol_dual
    return replace(tol, **kw)


def _cmd_solve(P, v, tol, args):
    sol = solve(P, tol, args.eps)
    rep = sol.to_dict()
    if args.timings:
        rep["timings"] = {"solve_s": sol.elapsed}
    return rep


def _cmd_classify(P, v, tol, args):
    sol = solve(P, tol, args.eps)
    cls = sol.classification
    status = "unbounded" if sol.status.value == "unbounded" else sol.status.value
    return {
        "status": status,
        "reasons": [r.to_dict() for r in sol.reasons],
        "classification": cls.to_dict() if cls else None,
        "witness": None if sol.x is None or status != "unbounded" else [float(t) for t in sol.x],
    }


def _cmd_canonical(P, v, tol, args):
    cf = canonicalize(P.A, P.D, tol)
    out = cf.summary()
    if not isinstance(cf, EarlyDiagnostic):
        out["S"] = cf.S.tolist()
        out["residual"] = float(cf.residual(P.A, P.D))
    return out


def _cmd_slemma(P, v, tol, args):
    q = SLemmaQuery(P.D, P.e, v, P.A, P.b, P.c, P.kind, P.c1, P.c2)
    try:
        verdict = s_lemma(q, tol, args.eps)
    except NotApplicable as exc:
        return {"status": "not_applicable", "assumption": exc.assumption, "detail": str(exc)}
    out = verdict.to_dict()
    out["status"] = "holds" if verdict.holds else "fails"
    out["verified"] = verify(q, verdict)
    return out


def _cmd_oracle(P, v, tol, args):
    cfg = OracleConfig(radius=args.radius, resolution=args.resolution, seed=args.seed)
    res = brute_force_min(P, cfg)
    probe = probe_unbounded(P, cfg=cfg)
    return {
        "value": res.value if np.isfinite(res.value) else str(res.value),
        "x": None if res.x is None else res.x.tolist(),
        "note": res.note,
        "probe_value": probe.value if np.isfinite(probe.value) else str(probe.value),
    }


def _cmd_export(P, v, tol, args):
    cf = canonicalize(P.A, P.D, tol)
    if isinstance(cf, EarlyDiagnostic):
        raise GtrsError("no cone program: " + "; ".join(d.describe() for d in cf.diagnostics))
    sp = build_socp(canonical_problem(P, cf, tol), tol)
    return {"socp": conic.dumps(sp)}


HANDLERS = {
    "solve": _cmd_solve,
    "classify": _cmd_classify,
    "canonical": _cmd_canonical,
    "slemma": _cmd_slemma,
    "oracle": _cmd_oracle,
    "export": _cmd_export,
}


def run_file(command, path, args):
    """Report for one file; errors become ``{"error": ...}`` entries."""
    np.random.seed(args.seed)
    try:
        P, v, tol, warnings = parse_problem(_load(path), _tol_from_args(args))
        t0 = time.perf_counter()
        rep = HANDLERS[command](P, v, tol, args)
        if warnings:
            rep.setdefault("input_warnings", warnings)
        if args.timings:
            rep.setdefault("timings", {})["total_s"] = time.perf_counter() - t0
        return {"file": path, **rep}, 0
    except (GtrsError, OSError) as exc:
        log.error("%s: %s", path, exc)
        return {"file": path, "error": type(exc).__name__, "detail": str(exc)}, 1


def _worker(job):
    command, path, args = job
    return run_file(command, path, args)


def build_parser():
    p = argparse.ArgumentParser(prog="gtrs", description="Quadratic minimization under one quadratic constraint.")
    p.add_argument("command", help="one of: " + ", ".join(COMMANDS))
    p.add_argument("paths", nargs="+", help="JSON problem files")
    p.add_argument("--eps", type=float, default=1e-6, help="target gap of epsilon-solutions")
    p.add_argument("--tol-eig", type=float, default=None)
    p.add_argument("--tol-cluster", type=float, default=None)
    p.add_argument("--tol-dual", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--parallel", type=int, default=1, help="worker processes (one file each)")
    p.add_argument("--radius", type=float, default=10.0, help="oracle box radius")
    p.add_argument("--resolution", type=int, default=41, help="oracle grid points per axis")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings (non-deterministic)")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("GTRS_LOG", "WARNING").upper(), format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    if args.command not in COMMANDS:
        print(f"gtrs: unknown command {args.command!r}", file=sys.stderr)
        return 2
    jobs = [(args.command, path, args) for path in args.paths]
    if args.parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.parallel) as pool:
            results = list(pool.map(_worker, jobs))
    else:
        results = [_worker(j) for j in jobs]
    reports = [r for r, _ in results]
    code = max(c for _, c in results)
    if args.command == "export" and len(reports) == 1 and "socp" in reports[0]:
        text = reports[0]["socp"]
    else:
        body = reports[0] if len(reports) == 1 else reports
        text = json.dumps(body, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
