"""Command-line front end.

    numeraire solve|renyi|verify|compare-ui (--problem PATH | --preset NAME) --out PATH
              [--grid a:b:n] [--tol x] [--seed s] [--format json|csv]
    numeraire preset NAME [--out PATH]

Exit status: 0 when every certificate passes, 2 when a report was written
but some check failed, 1 on errors.  Set ``NUMERAIRE_LOG`` (e.g. ``INFO``)
for progress messages on stderr.
"""

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .certificate import Certificate, Check
from .closed_form import expfam_numeraire, symmetric_discrete_null, symmetric_numeraire
from .errors import NumeraireError, SpecError, UnsupportedNull
from .extended import guarded_exp, log_ratio
from .finite_solver import SolverOptions, first_order_certificate, solve_finite_null
from .generated_solver import certify_generated, solve_bounded_mean, solve_subgaussian
from .nullspec import BoundedMean, ExpFamily, FiniteMixture, SubGaussian, Symmetric, is_evariable
from .presets import PRESETS, preset_document
from .renyi import renyi_certificate, solve_renyi_finite
from .specs import load_problem, parse_grid, parse_problem
from .verify import (finiteness_flags, duality_gap, evaluation_grid, numeraire_certificate,
                     universal_inference_compare)

log = logging.getLogger("numeraire")

EXIT_OK, EXIT_ERROR, EXIT_CHECK_FAILED = 0, 1, 2
COMMANDS = {"solve": "solve", "renyi": "renyi", "verify": "verify", "compare-ui": "compare_ui"}


# number formatting ------------------------------------------------------------

def _fmt_float(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps(obj, indent=2, level=0):
    """JSON text with every float written to 17 significant digits."""
    obj = _plain(obj) if level == 0 else obj
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    return json.dumps(obj)


# tasks -------------------------------------------------------------------------

def _grid_for(spec, Q):
    g = spec.grid
    return evaluation_grid(Q) if g is None else g


def _grid_rows(z, X, Q, ripr, x_ui=None):
    lq = Q.logdensity(z)
    ratio = guarded_exp(log_ratio(ripr.logdensity(z), lq))
    rows = {"z": z, "x_star": guarded_exp(X.log(z)),
            "ripr_density": np.where(np.isneginf(lq), 0.0, ratio)}
    if x_ui is not None:
        rows["x_ui"] = x_ui
    return rows


def _gap_check(X, ripr, Q, tol):
    gap = duality_gap(X, ripr, Q)
    check = Check.from_residual("duality_gap", gap.gap, tol,
                                {"both_infinite": gap.both_infinite, "conditional": gap.conditional})
    info = {"gap": gap.gap, "log_value": gap.log_value, "entropy": gap.entropy,
            "lambda_star": gap.lambda_star, "conditional": gap.conditional,
            "both_infinite": gap.both_infinite}
    return Certificate((check,)), info


def run_solve(spec):
    Q, null, tol, seed = spec.alternative, spec.null, spec.options["tol"], spec.options["seed"]
    opts = SolverOptions(max_iter=spec.options["max_iter"])
    extra = {}
    if isinstance(null, Symmetric) and Q.is_discrete:
        null = symmetric_discrete_null(Q)
    if isinstance(null, FiniteMixture):
        sol = solve_finite_null(Q, null, opts)
        cert = first_order_certificate(sol, Q, null, tol).merged(
            numeraire_certificate(sol, Q, null, tol=tol, seed=seed))
    elif isinstance(null, BoundedMean):
        sol = solve_bounded_mean(null.mu, Q)
        cert = certify_generated(sol.numeraire, null, Q, tol=tol).merged(
            is_evariable(sol.numeraire, null, tol, alternative=Q))
    elif isinstance(null, SubGaussian):
        if Q.family != "normal" or not math.isclose(Q.params["sd"], null.sigma):
            raise UnsupportedNull("sub-Gaussian solve needs a normal alternative with sd = sigma")
        sol = solve_subgaussian(Q.params["mean"], null.sigma)
        cert = certify_generated(sol.numeraire, null, Q, tol=tol).merged(
            is_evariable(sol.numeraire, null, tol, alternative=Q))
    elif isinstance(null, Symmetric):
        sol = symmetric_numeraire(Q)
        cert = sol.certificate
    elif isinstance(null, ExpFamily):
        sol = expfam_numeraire(null, spec.theta1)
        Q = sol.alternative
        cert = sol.certificate
    else:
        raise UnsupportedNull(f"no solver for {null.kind} nulls")
    gap_cert, gap = _gap_check(sol.numeraire, sol.ripr, Q, tol)
    cert = cert.merged(gap_cert, flags=finiteness_flags(Q, null, sol))
    summary = {
        "lambda_star": sol.lambda_star,
        "entropy": sol.entropy_value,
        "weights": sol.mixture_weights,
        "iterations": sol.iterations,
        "converged": sol.converged,
        "negligible_set": list(sol.negligible_set),
        "params": {k: v for k, v in sol.params.items() if k != "null"},
        "ripr_mass": _ripr_mass(sol.ripr),
    }
    extra["duality"] = gap
    grid = _grid_rows(_grid_for(spec, Q), sol.numeraire, Q, sol.ripr)
    return summary, cert, grid, extra, list(sol.notes)


def _ripr_mass(ripr):
    try:
        return float(ripr.total_mass)
    except NumeraireError:
        return None


def run_renyi(spec):
    Q, null, tol = spec.alternative, spec.null, spec.options["tol"]
    sol = solve_renyi_finite(Q, null, spec.gamma, SolverOptions(max_iter=spec.options["max_iter"]))
    cert = renyi_certificate(sol, Q, null, tol, seed=spec.options["seed"])
    summary = {"gamma": sol.gamma, "weights": sol.weights, "utility": sol.utility_value,
               "divergence": sol.divergence_value, "normalizer": sol.normalizer,
               "iterations": sol.iterations, "fw_gap": sol.fw_gap}
    grid = _grid_rows(_grid_for(spec, Q), sol.optimal_evariable, Q, sol.projection)
    return summary, cert, grid, {}, list(sol.notes)


def run_verify(spec):
    Q, null, tol = spec.alternative, spec.null, spec.options["tol"]
    X = spec.candidate
    cert = is_evariable(X, null, tol, alternative=Q)
    notes = []
    try:
        cert = cert.merged(numeraire_certificate(X, Q, null, tol=tol, seed=spec.options["seed"]))
    except UnsupportedNull as exc:
        notes.append(f"numeraire probes skipped: {exc}")
    z = _grid_for(spec, Q)
    grid = {"z": z, "x_star": X(z)}
    return {"candidate": X.label}, cert, grid, {}, notes


def run_compare_ui(spec):
    Q, null, tol = spec.alternative, spec.null, spec.options["tol"]
    sol = solve_finite_null(Q, null, SolverOptions(max_iter=spec.options["max_iter"]))
    z = _grid_for(spec, Q)
    rep = universal_inference_compare(Q, null, sol, grid=z, tol=tol)
    checks = (Check.from_residual("dominance", -rep.min_difference, tol,
                                  {"min_difference": rep.min_difference}),
              Check.from_residual("log_gain", -rep.log_gain, tol, {"log_gain": rep.log_gain}))
    cert = Certificate(checks, finiteness_flags(Q, null, sol))
    summary = {"weights": sol.mixture_weights, "lambda_star": sol.lambda_star,
               "log_gain": rep.log_gain, "min_difference": rep.min_difference,
               "mass_above_tol": rep.mass_above_tol}
    grid = _grid_rows(z, sol.numeraire, Q, sol.ripr, x_ui=rep.x_ui)
    return summary, cert, grid, {}, []


RUNNERS = {"solve": run_solve, "renyi": run_renyi, "verify": run_verify,
           "compare_ui": run_compare_ui}


def build_report(spec, task):
    summary, cert, grid, extra, notes = RUNNERS[task](spec)
    report = {
        "task": task,
        "overall_pass": cert.overall_pass,
        "solution": summary,
        "certificates": cert.to_records(),
        "finiteness_flags": cert.flags.as_record(),
        "notes": list(cert.notes) + notes,
        "grid": {k: np.asarray(v, dtype=float) for k, v in grid.items()},
        "provenance": {"tool": "numeraire", "version": __version__,
                       "backend": kernels.BACKEND, "seed": spec.options["seed"],
                       "tol": spec.options["tol"], "problem": spec.raw},
    }
    report.update(extra)
    return report


def _write_csv(path, grid):
    cols = [c for c in ("z", "x_star", "ripr_density", "x_ui") if c in grid]
    lines = [",".join(cols)]
    for row in zip(*(grid[c] for c in cols)):
        lines.append(",".join(_fmt_float(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


# argument handling ------------------------------------------------------------------

def _parser():
    p = argparse.ArgumentParser(prog="numeraire", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        src = s.add_mutually_exclusive_group(required=True)
        src.add_argument("--problem", help="path to a JSON problem document")
        src.add_argument("--preset", choices=sorted(PRESETS), help="named problem")
        s.add_argument("--out", required=True, help="report path")
        s.add_argument("--grid", help="evaluation grid a:b:n")
        s.add_argument("--tol", type=float)
        s.add_argument("--seed", type=int)
        s.add_argument("--format", choices=("json", "csv"), default="json",
                       help="csv writes the grid dump to --out and the report next to it")
    s = sub.add_parser("preset", help="write a named problem document")
    s.add_argument("name")
    s.add_argument("--out")
    return p


def _setup_logging():
    level = os.environ.get("NUMERAIRE_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING),
                        format="numeraire: %(levelname)s: %(message)s")


def _load(args, task):
    doc = preset_document(args.preset) if args.preset else None
    if doc is None:
        spec = load_problem(args.problem)
        doc = spec.raw
    doc = dict(doc)
    doc["task"] = task
    options = dict(doc.get("options", {}))
    if args.grid is not None:
        parse_grid(args.grid)
        options["grid"] = args.grid
    if args.tol is not None:
        options["tol"] = args.tol
    if args.seed is not None:
        options["seed"] = args.seed
    doc["options"] = options
    return parse_problem(doc)


def run(argv=None):
    _setup_logging()
    args = _parser().parse_args(argv)
    try:
        if args.command == "preset":
            text = dumps(preset_document(args.name)) + "\n"
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
            return EXIT_OK
        task = COMMANDS[args.command]
        spec = _load(args, task)
        log.info("running %s", task)
        report = build_report(spec, task)
        out = Path(args.out)
        if args.format == "csv":
            _write_csv(out, report["grid"])
            out = out.with_suffix(".report.json")
        out.write_text(dumps(report) + "\n")
        log.info("report written to %s", out)
    except (NumeraireError, OSError, ValueError) as exc:
        kind = "invalid problem" if isinstance(exc, SpecError) else type(exc).__name__
        print(f"numeraire: error: {kind}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if not report["overall_pass"]:
        failed = [c["name"] for c in report["certificates"] if not c["pass"]]
        print(f"numeraire: certificate failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
