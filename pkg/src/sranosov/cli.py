"""Command-line front end.

Exit codes: 0 success, 1 internal-consistency failure (including a failed
acceptance check in verify-all), 2 domain or usage error, 3 solver
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import checks, elliptic, heisenberg, pendulum, sl2flow
from .errors import (ConsistencyError, ConvergenceError, DomainError, FitError,
                     IntegrationError, SearchFailure)

EXIT_OK, EXIT_CONSISTENCY, EXIT_DOMAIN, EXIT_NONCONVERGENCE = 0, 1, 2, 3
RUNCONFIG_ENV = "RUNCONFIG"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    tolerance: float = 1e-10
    format: str = "json"
    output: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if not (isinstance(self.tolerance, (int, float)) and self.tolerance > 0):
            raise DomainError(f"tolerance must be positive, got {self.tolerance!r}")
        if self.format not in ("csv", "json"):
            raise DomainError(f"format must be csv or json, got {self.format!r}")


def load_run_config(args) -> RunConfig:
    """Built-in defaults, then the RUNCONFIG file, then explicit flags."""
    fields = {}
    path = os.environ.get(RUNCONFIG_ENV)
    if path:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read {RUNCONFIG_ENV} file {path!r}: {exc}") from exc
        unknown = set(data) - {"tolerance", "format", "output", "seed"}
        if unknown:
            raise UsageError(f"unknown RunConfig fields {sorted(unknown)}")
        fields.update(data)
    for name in ("tolerance", "format", "output", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            fields[name] = value
    return RunConfig(**fields)


def _clean(value):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def to_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def to_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _flatten(record, prefix=""):
    flat = {}
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        elif isinstance(value, (list, tuple)):
            for j, v in enumerate(value):
                flat[f"{name}.{j}"] = v
        else:
            flat[name] = value
    return flat


def render_record(record, cfg: RunConfig) -> str:
    if cfg.format == "json":
        return to_json(record)
    flat = _flatten(record)
    return to_csv([flat], list(flat))


_K_MULTIPLE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*K\s*$")


def parse_argument(text: str, quarter: float) -> float:
    """A real number, or a multiple of the quarter period written like ``K``, ``-2K``, ``0.5*K``."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _K_MULTIPLE.match(text)
    if not m:
        raise UsageError(f"--t must be a number or a multiple of K, got {text!r}")
    factor = m.group(1)
    if factor in (None, "+", "-"):
        factor = (factor or "") + "1"
    return float(factor) * quarter


def cmd_elliptic(args, cfg):
    k = elliptic.check_modulus(args.k)
    tol = min(cfg.tolerance, elliptic.ODE_TOLERANCE)
    K = elliptic.quarter_period(k, tol)
    t = K if args.at_quarter_period else parse_argument(args.t, K)
    trip = elliptic.jacobi(t, k)
    id1, id2 = trip.residuals
    return render_record({"t": t, "k": k, "sn": trip.sn, "cn": trip.cn, "dn": trip.dn,
                          "id1_residual": id1, "id2_residual": id2}, cfg)


def cmd_pendulum(args, cfg):
    params = pendulum.PendulumParams(args.omega, args.theta0, args.thetadot0)
    sol = pendulum.fit_solution(params, min(cfg.tolerance, 1e-12))
    record = {"case": sol.case.name, "case_number": sol.case.number, "I": sol.I, "k": sol.k,
              "t0": sol.t0, "sign": sol.sign, "offset": sol.offset, "period": sol.period}
    if args.length is not None:
        record["lemma_int"] = pendulum.verify_lemma_int(sol, args.length).as_dict()
    return render_record(record, cfg)


def cmd_heisenberg(args, cfg):
    params = heisenberg.HeisenbergGeodesicParams(args.v0, args.theta0, args.length)
    if args.samples < 2:
        raise DomainError("--samples must be at least 2")
    geo = heisenberg.geodesic(params, min(cfg.tolerance, 1e-12), args.samples)
    report = heisenberg.balance_report(params)
    summary = {"E1": report.E1, "E2": report.E2, "defect": report.defect,
               "vertical_defect": heisenberg.vertical_endpoint_defect(params,
                                                                      min(cfg.tolerance, 1e-12))}
    rows = [{"t": t, "x": p[0], "y": p[1], "z": p[2], "w1": a, "w2": b}
            for t, p, a, b in zip(geo.times, geo.points, geo.path.w1, geo.path.w2)]
    if cfg.format == "json":
        return to_json({"summary": summary, "path": rows})
    return to_csv(rows, ["t", "x", "y", "z", "w1", "w2"]) + json.dumps(_clean(summary)) + "\n"


def _base_point(values):
    if values is None:
        return np.eye(2)
    h = np.array(values, dtype=float).reshape(2, 2)
    det = np.linalg.det(h)
    if abs(det - 1) > 1e-9:
        raise DomainError(f"base point must have determinant 1, got {det!r}")
    return h


def cmd_sl2(args, cfg):
    config = sl2flow.ShootingConfig(residual_tolerance=min(cfg.tolerance, 1e-10),
                                    exhaustive=args.exhaustive)
    if not 0 < args.tau <= config.tau_max:
        raise DomainError(f"tau={args.tau!r} outside the supported range (0, {config.tau_max}]")
    base = _base_point(args.base)
    result = sl2flow.shoot(args.tau, config)
    solutions = []
    for sol in result.all_solutions:
        bal = sl2flow.balance_report(sol)
        ld = sl2flow.length_derivative_check(sol, args.r_step)
        rec = {"theta0": sol.theta0, "P_X0": sol.P_X0, "length": sol.length,
               "endpoint_residual": sol.endpoint_residual, "E_s": bal.E1, "E_u": bal.E2,
               "defect": bal.defect, "closure_integrals": list(sl2flow.closure_integrals(sol)),
               "eqdiff_finite_difference": ld.finite_difference, "eqdiff_formula": ld.formula}
        if args.eqdiff:
            rec["eqdiff_mismatch"] = ld.mismatch
            rec["eqdiff_rederived"] = ld.rederived
            rec["eqdiff_halving_mismatches"] = [
                sl2flow.length_derivative_check(sol, h).mismatch for h in checks.EQDIFF_STEPS]
        rec["lemma_int"] = sl2flow.lemma_chain(sol).as_dict()
        end = base @ sol.path.states[-1, :4].reshape(2, 2)
        rec["endpoint"] = end.ravel().tolist()
        rec["target"] = sl2flow.flow(base, args.tau).ravel().tolist()
        solutions.append(rec)
    if args.path:
        t = np.linspace(0.0, result.length, args.samples)
        states = result.path(t)
        g = np.einsum("ij,njk->nik", base, states[:, :4].reshape(-1, 2, 2)).reshape(-1, 4)
        rows = [{"t": ti, "m11": m[0], "m12": m[1], "m21": m[2], "m22": m[3],
                 "theta": s[4], "P_X": s[5]} for ti, m, s in zip(t, g, states)]
        with open(args.path, "w") as fh:
            fh.write(to_csv(rows, ["t", "m11", "m12", "m21", "m22", "theta", "P_X"]))
    record = dict(solutions[0], tau=args.tau)
    if len(solutions) > 1:
        record["alternatives"] = solutions[1:]
    return render_record(record, cfg)


def cmd_verify_all(args, cfg):
    results = checks.verify_all(cfg.seed, cfg.tolerance)
    failed = [r for r in results if not r.passed]
    if cfg.format == "json":
        text = to_json([{"criterion": r.number, "name": r.name, "passed": r.passed,
                         "runtime": round(r.runtime, 2), "limit": r.limit,
                         "details": r.details} for r in results])
    else:
        text = to_csv([{"criterion": r.number, "name": r.name, "passed": r.passed,
                        "runtime": round(r.runtime, 2), "limit": r.limit} for r in results],
                      ["criterion", "name", "passed", "runtime", "limit"])
    for r in results:
        print(r.line(), file=sys.stderr)
    if failed:
        raise ChecksFailed(text, failed)
    return text


class ChecksFailed(ConsistencyError):
    """Failed acceptance checks; still carries the table for output."""

    def __init__(self, text, failed):
        super().__init__(f"{len(failed)} acceptance check(s) failed: "
                         + ", ".join(str(r.number) for r in failed))
        self.text = text


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--output", default=None, help="write to this file instead of stdout")
    common.add_argument("--tolerance", type=float, default=None,
                        help="numerical tolerance (default 1e-10; internal solvers never run looser "
                             "than their built-in accuracy)")
    common.add_argument("--seed", type=int, default=None, help="seed for randomized sweeps")

    parser = _Parser(prog="sranosov", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("elliptic", parents=[common], help="sn, cn, dn and identity residuals")
    p.add_argument("--t", default="0", help="argument; a number or a multiple of K such as 2K")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--at-quarter-period", action="store_true", help="evaluate at t = K(k)")
    p.set_defaults(func=cmd_elliptic)

    p = sub.add_parser("pendulum", parents=[common], help="classify and fit a pendulum solution")
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--theta0", type=float, default=0.0)
    p.add_argument("--thetadot0", type=float, default=0.0)
    p.add_argument("--length", type=float, default=None, help="run the half-angle integral test")
    p.set_defaults(func=cmd_pendulum)

    p = sub.add_parser("heisenberg", parents=[common], help="Heisenberg geodesic and energy split")
    p.add_argument("--v0", type=float, required=True)
    p.add_argument("--theta0", type=float, default=0.0)
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=101)
    p.set_defaults(func=cmd_heisenberg)

    p = sub.add_parser("sl2", parents=[common], help="shoot a geodesic from x to f_tau(x) on SL(2,R)")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--eqdiff", action="store_true", help="report the length-derivative mismatch")
    p.add_argument("--r-step", type=float, default=1e-3)
    p.add_argument("--base", type=float, nargs=4, metavar=("M11", "M12", "M21", "M22"),
                   help="base point x (determinant 1); defaults to the identity")
    p.add_argument("--path", default=None, help="write the sampled geodesic to this CSV file")
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--exhaustive", action="store_true", help="try every start of the grid")
    p.set_defaults(func=cmd_sl2)

    p = sub.add_parser("verify-all", parents=[common], help="run the acceptance checks")
    p.set_defaults(func=cmd_verify_all)
    return parser


def _wants_json(argv) -> bool:
    for j, a in enumerate(argv):
        if a == "--format" and j + 1 < len(argv):
            return argv[j + 1] == "json"
        if a.startswith("--format="):
            return a.split("=", 1)[1] == "json"
    path = os.environ.get(RUNCONFIG_ENV)
    if path:
        try:
            with open(path) as fh:
                return json.load(fh).get("format", "json") == "json"
        except (OSError, json.JSONDecodeError, AttributeError):
            pass
    return True


def _emit(text, cfg):
    if cfg is not None and cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    cfg = None
    try:
        args = build_parser().parse_args(argv)
        cfg = load_run_config(args)
        _emit(args.func(args, cfg), cfg)
        return EXIT_OK
    except ChecksFailed as exc:
        _emit(exc.text, cfg)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (UsageError, DomainError) as exc:
        code, exc_info = EXIT_DOMAIN, exc
    except ConsistencyError as exc:
        code, exc_info = EXIT_CONSISTENCY, exc
    except (SearchFailure, ConvergenceError, IntegrationError, FitError) as exc:
        code, exc_info = EXIT_NONCONVERGENCE, exc
    error = {"error": type(exc_info).__name__, "message": str(exc_info), "exit_code": code}
    if isinstance(exc_info, SearchFailure):
        error["best_residuals"] = [list(r) for r in exc_info.best_residuals]
    if (cfg.format == "json") if cfg is not None else _wants_json(argv):
        sys.stdout.write(to_json(error))
    else:
        print(f"error: {exc_info}", file=sys.stderr)
        if "best_residuals" in error:
            for row in error["best_residuals"]:
                print("  best residual: " + " ".join(_fmt(v) for v in row), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
