"""Command-line front end.

    entropydual solve problem.json [--qualify] [--trace t.csv] [--density q.csv]
    entropydual marginals coupling.json
    entropydual gamma-star problem.json --x 1 0.5
    entropydual norm norms.json

Problem files are JSON:

    {"entropy": {"name": "boltzmann_variant", "m": [...]},
     "ground": {"points": [...], "weights": [...]},
     "theta": [[...], ...],
     "target": {"singleton": [...]} | {"box": {"center": [...], "radius": [...]}},
     "options": {"gap_tol": 1e-9, ...}}

Exit codes: 0 converged, 1 bad input, 2 infeasible or dual unbounded,
3 iteration budget exhausted or stalled.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .constraints import TargetSet
from .dual import MomentProblem, SolverOptions, Status
from .errors import (EntropyDualError, InfeasibleParameterization, NotConverged,
                     ZeroDenominator)
from .measure import GroundSpace, luxemburg_norm
from .oracle import brute_force_primal
from .qualification import feasibility_check, icor_check
from .recovery import gamma_star_of, solve
from .sinkhorn import MarginalProblem, marginals_certificate, solve_marginals
from .young import catalog, young_family

__all__ = ["main", "run", "parse_problem", "problem_to_dict", "EXIT"]

EXIT = {"ok": 0, "input": 1, "infeasible": 2, "unfinished": 3}
_STATUS_EXIT = {
    Status.CONVERGED: EXIT["ok"],
    Status.DUAL_UNBOUNDED: EXIT["infeasible"],
    Status.MAX_ITERATIONS: EXIT["unfinished"],
    Status.STALLED: EXIT["unfinished"],
}
_RHO = ("lambda_max", "lambda_plus", "lambda_minus", "lam", "lambda_star",
        "lambda_max_star")


class InputError(Exception):
    pass


# --- problem files ------------------------------------------------------------

def _floats(v, what):
    try:
        a = np.asarray(v, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{what}: expected numbers ({exc})") from None
    if not np.all(np.isfinite(a)):
        raise InputError(f"{what}: non-finite entries")
    return a


def _require(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise InputError(f"{where}: missing field '{key}'")
    return d[key]


def parse_target(t):
    if not isinstance(t, dict) or len(t) != 1:
        raise InputError("target: expected exactly one of 'singleton' or 'box'")
    if "singleton" in t:
        return TargetSet.singleton(_floats(t["singleton"], "target.singleton"))
    if "box" in t:
        b = t["box"]
        return TargetSet.box(_floats(_require(b, "center", "target.box"), "target.box.center"),
                             _floats(_require(b, "radius", "target.box"), "target.box.radius"))
    raise InputError(f"target: unknown kind {sorted(t)}")


def parse_options(o):
    if o is None:
        return SolverOptions()
    known = {f.name for f in fields(SolverOptions)}
    extra = set(o) - known
    if extra:
        raise InputError(f"options: unknown keys {sorted(extra)}")
    return SolverOptions(**o)


def _parse_spec(e, ground):
    name = _require(e, "name", "entropy")
    m = e.get("m")
    if m is not None:
        if name != "boltzmann_variant":
            raise InputError(f"entropy: 'm' is only accepted for boltzmann_variant, not {name}")
        m = _floats(m, "entropy.m")
    return catalog(name, ground, m)


def _parse_ground(g):
    pts = _require(g, "points", "ground")
    return GroundSpace(_floats(pts, "ground.points"),
                       _floats(_require(g, "weights", "ground"), "ground.weights"))


def parse_problem(d, options_override=None) -> MomentProblem:
    """Build a MomentProblem from the decoded JSON of a problem file."""
    if not isinstance(d, dict):
        raise InputError("problem file must hold a JSON object")
    ground = _parse_ground(_require(d, "ground", "problem"))
    spec = _parse_spec(_require(d, "entropy", "problem"), ground)
    theta = _floats(_require(d, "theta", "problem"), "theta")
    if theta.ndim != 2:
        raise InputError("theta: expected a list of K rows")
    target = parse_target(_require(d, "target", "problem"))
    opts = dict(d.get("options") or {})
    opts.update(options_override or {})
    return MomentProblem(spec, theta, target, ground, parse_options(opts))


def problem_to_dict(p: MomentProblem) -> dict:
    """Canonical form: fixed key order, per-point ``m``, all options explicit."""
    entropy = {"name": p.spec.name}
    if p.spec.name == "boltzmann_variant":
        entropy["m"] = np.broadcast_to(p.spec.m, (p.N,)).tolist()
    opts = asdict(p.options)
    if opts["init_y"] is not None:
        opts["init_y"] = [float(v) for v in opts["init_y"]]
    return {
        "entropy": entropy,
        "ground": {"points": p.ground.coords.tolist(), "weights": p.ground.weights.tolist()},
        "theta": p.theta.theta.tolist(),
        "target": p.target.to_dict(),
        "options": opts,
    }


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _json_safe(v):
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_json_safe(x) for x in v]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
        return v
    if isinstance(v, np.integer):
        return int(v)
    return v


def _emit(obj, out):
    # json writes floats with repr, the shortest string that round-trips
    out.write(json.dumps(_json_safe(obj), indent=2, allow_nan=False))
    out.write("\n")


def _write_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(rows)


def _point_label(p):
    p = np.atleast_1d(np.asarray(p, dtype=float))
    return " ".join(repr(float(v)) for v in p)


# --- subcommands ---------------------------------------------------------------

def _cmd_solve(args, out, err):
    override = {}
    for key in ("gap_tol", "max_iter", "ls_shrink", "domain_margin"):
        v = getattr(args, key)
        if v is not None:
            override[key] = v
    if args.init_y is not None:
        override["init_y"] = tuple(args.init_y)
    problem = parse_problem(_load_json(args.file), override)

    if args.dump_normalized:
        _emit(problem_to_dict(problem), out)
        return EXIT["ok"]

    report = {}
    infeasible = False
    if args.qualify:
        feas, icor = feasibility_check(problem), icor_check(problem)
        err.write(f"feasibility: {feas.verdict}\nicor: {icor.verdict}\n")
        report["qualification"] = {"feasibility": feas.verdict, "icor": icor.verdict,
                                   "margin": feas.margin}
        infeasible = feas.verdict == "Infeasible"

    result, cert = solve(problem)
    report.update(cert.to_dict())
    report["iterations"] = len(result.trace) - 1
    report["message"] = result.message
    if result.status is Status.DUAL_UNBOUNDED:
        report["sup_finite"] = result.sup_finite

    if args.oracle:
        try:
            o = brute_force_primal(problem, resolution=args.oracle_resolution)
        except InfeasibleParameterization as exc:
            report["oracle"] = {"value": math.inf, "message": str(exc)}
        else:
            report["oracle"] = {"value": o.value, "q": o.q,
                                "difference": cert.primal_value - o.value}

    if args.trace:
        _write_csv(args.trace, result.trace.csv_rows())
    if args.density:
        rows = [("point", "weight", "q_hat")]
        for z, r, q in zip(problem.ground.coords, problem.ground.weights, cert.q_hat):
            rows.append((_point_label(z), repr(float(r)), repr(float(q))))
        _write_csv(args.density, rows)

    _emit(report, out)
    if infeasible:
        return EXIT["infeasible"]
    return _STATUS_EXIT[result.status]


def _load_kernel(k, base):
    if isinstance(k, str):
        path = Path(k)
        if not path.is_absolute():
            path = base / path
        try:
            return np.loadtxt(path, delimiter=",", ndmin=2)
        except (OSError, ValueError) as exc:
            raise InputError(f"kernel CSV {path}: {exc}") from None
    return _floats(k, "kernel")


def _cmd_marginals(args, out, err):
    d = _load_json(args.file)
    kernel = _load_kernel(_require(d, "kernel", "marginals"), Path(args.file).parent)
    problem = MarginalProblem(kernel, _floats(_require(d, "row_target", "marginals"), "row_target"),
                              _floats(_require(d, "col_target", "marginals"), "col_target"))
    tol = float(d.get("tol", 1e-12) if args.tol is None else args.tol)
    max_sweeps = int(d.get("max_sweeps", 1000) if args.max_sweeps is None else args.max_sweeps)
    try:
        sol = solve_marginals(problem, tol=tol, max_sweeps=max_sweeps)
    except ZeroDenominator as exc:
        _emit({"status": "Infeasible", "message": str(exc)}, out)
        return EXIT["infeasible"]
    except NotConverged as exc:
        _emit({"status": "MaxIterations", "message": str(exc)}, out)
        return EXIT["unfinished"]
    report = {"sweeps": sol.sweeps, "coupling": sol.Q}
    if np.all(sol.scaling.u > 0) and np.all(sol.scaling.v > 0):
        report.update(marginals_certificate(problem, sol.scaling).to_dict())
    else:
        # zero targets leave zero scalings; no finite potentials to certify
        f, g = sol.scaling.potentials()
        report["row_potential"], report["col_potential"] = f, g
    report["status"] = "Converged"
    _emit(report, out)
    return EXIT["ok"]


def _cmd_gamma_star(args, out, err):
    d = _load_json(args.file)
    if isinstance(d, dict) and "target" not in d:
        d = dict(d, target={"singleton": list(args.x)})
    problem = parse_problem(d)
    x = np.asarray(args.x, dtype=float)
    if x.shape != (problem.K,):
        raise InputError(f"--x needs {problem.K} values, got {x.size}")
    try:
        value = gamma_star_of(problem, x)
    except NotConverged as exc:
        _emit({"x": x, "status": "MaxIterations", "message": str(exc)}, out)
        return EXIT["unfinished"]
    _emit({"x": x, "gamma_star": value}, out)
    return EXIT["ok"] if math.isfinite(value) else EXIT["infeasible"]


def _cmd_norm(args, out, err):
    d = _load_json(args.file)
    ground = _parse_ground(_require(d, "ground", "norm"))
    spec = _parse_spec(_require(d, "entropy", "norm"), ground)
    rho_name = d.get("rho", "lambda_max") if args.rho is None else args.rho
    if rho_name not in _RHO:
        raise InputError(f"rho must be one of {', '.join(_RHO)}")
    rho = getattr(young_family(spec), rho_name)
    u = _floats(_require(d, "u", "norm"), "u")
    batch = np.atleast_2d(u)
    norms = [luxemburg_norm(row, rho, ground) for row in batch]
    _emit({"rho": rho_name, "norms": norms if u.ndim == 2 else norms[0]}, out)
    return EXIT["ok"]


def build_parser():
    p = argparse.ArgumentParser(prog="entropydual", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a moment problem and print its certificate")
    s.add_argument("file")
    s.add_argument("--qualify", action="store_true",
                   help="print feasibility and interior verdicts before solving")
    s.add_argument("--trace", metavar="CSV", help="write the iteration trace")
    s.add_argument("--density", metavar="CSV", help="write the recovered density")
    s.add_argument("--gap-tol", type=float)
    s.add_argument("--max-iter", type=int)
    s.add_argument("--ls-shrink", type=float)
    s.add_argument("--domain-margin", type=float)
    s.add_argument("--init-y", type=float, nargs="+")
    s.add_argument("--oracle", action="store_true",
                   help="cross-check against the brute-force primal (N <= 4, K <= 2)")
    s.add_argument("--oracle-resolution", type=float, default=1e-4)
    s.add_argument("--dump-normalized", action="store_true",
                   help="print the canonical problem file and exit")
    s.set_defaults(func=_cmd_solve)

    m = sub.add_parser("marginals", help="fit prescribed marginals by IPF")
    m.add_argument("file")
    m.add_argument("--tol", type=float)
    m.add_argument("--max-sweeps", type=int)
    m.set_defaults(func=_cmd_marginals)

    g = sub.add_parser("gamma-star", help="evaluate the moment-space conjugate at x")
    g.add_argument("file")
    g.add_argument("--x", type=float, nargs="+", required=True)
    g.set_defaults(func=_cmd_gamma_star)

    n = sub.add_parser("norm", help="Luxemburg norms of vectors on the ground space")
    n.add_argument("file")
    n.add_argument("--rho", choices=_RHO)
    n.set_defaults(func=_cmd_norm)
    return p


def run(argv=None, out=None, err=None) -> int:
    """Run one subcommand; returns the exit code instead of exiting."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT["input"] if exc.code else EXIT["ok"]
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG, stream=err)
    try:
        return args.func(args, out, err)
    except (InputError, EntropyDualError, ValueError, TypeError) as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT["input"]


def main():
    sys.exit(run())
