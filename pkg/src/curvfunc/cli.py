"""curvfunc command-line interface.

Exit codes: 0 success, 1 suite failure, 2 input error, 3 solver nonconvergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import geometry as geo
from .errors import InvalidInput, NoncompactError, ReductionMismatchError
from .euler_lagrange import constrained_residual_Fts, identity_gaps
from .functionals import FunctionalParams, eval_functional
from .report import RunReport, rows_to_csv
from .solver import SolveConfig, default_threads, get_family, solve, sweep
from .specfile import load_spec, spec_to_dict
from .suites import SUITES, run_suites

log = logging.getLogger("curvfunc")

EXIT_OK, EXIT_SUITE, EXIT_INPUT, EXIT_NOCONV = 0, 1, 2, 3


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _volume(v):
    return "noncompact" if v is geo.NONCOMPACT else float(v)


def cmd_describe(args) -> tuple[RunReport, Optional[str], int]:
    spec = load_spec(args.spec)
    hc = geo.curvature_of(spec)
    cp = hc.cp
    ms = cp.min_sectional(seed=args.seed)
    results = {
        "n": cp.n, "R": cp.R, "Ric_norm_sq": cp.ric_sq, "E_norm_sq": cp.e_sq, "W_norm_sq": cp.w_sq,
        "Rm_norm_sq": cp.rm_sq, "sigma2_schouten": cp.sigma2A,
        "ricci_spectrum": np.sort(cp.ricci_spectrum), "coord_sectionals": cp.coord_sectionals,
        "min_sectional": {"value": ms.value, "flag": ms.flag}, "volume": _volume(hc.volume),
    }
    return RunReport("describe", {"spec": spec_to_dict(spec)}, results, seed=args.seed), None, EXIT_OK


def cmd_residual(args) -> tuple[RunReport, Optional[str], int]:
    spec = load_spec(args.spec)
    hc = geo.curvature_of(spec)
    res = constrained_residual_Fts(hc, args.t, args.s)
    lam = eval_functional(hc, FunctionalParams(args.t, args.s)).normalized if hc.compact else None
    results = {
        "tensor_residual_norm": res.tensor_norm,
        "tensor_residual": res.tensor_residual,
        "scalar_residual": res.scalar_residual,
        "lambda": lam,
        "lagrange_c": res.lagrange_c,
        "identity_gaps": identity_gaps(hc, args.t, args.s),
    }
    inputs = {"spec": spec_to_dict(spec), "t": args.t, "s": args.s}
    return RunReport("residual", inputs, results, seed=args.seed), None, EXIT_OK


def _solve_config(args) -> SolveConfig:
    overrides = {}
    if args.config:
        try:
            doc = yaml.safe_load(Path(args.config).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise InvalidInput(f"cannot read solver config {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise InvalidInput("solver config must be a mapping of SolveConfig fields")
        known = {f.name for f in dataclasses.fields(SolveConfig)}
        bad = sorted(set(doc) - known)
        if bad:
            raise InvalidInput(f"unknown solver config field(s) {bad}; known: {sorted(known)}")
        overrides.update(doc)
    if args.starts is not None:
        overrides["starts"] = args.starts
    overrides["seed"] = args.seed
    if "start_range" in overrides:
        overrides["start_range"] = tuple(overrides["start_range"])
    cfg = SolveConfig(**overrides)
    if cfg.starts < 1 or cfg.max_iter < 1:
        raise InvalidInput("starts and max_iter must be positive")
    return cfg


def cmd_solve(args) -> tuple[RunReport, Optional[str], int]:
    family = get_family(args.family)
    cfg = _solve_config(args)
    result = solve(family, args.t, args.s, cfg)
    rows = [(args.t, args.s, p, "ok") for p in result.points]
    inputs = {"family": family.name, "t": args.t, "s": args.s, "config": cfg.as_dict()}
    results = {"points": result.points, "diagnostics": result.diagnostics}
    code = EXIT_OK if result.points else EXIT_NOCONV
    return (RunReport("solve", inputs, results, seed=args.seed),
            rows_to_csv(family.param_names, rows), code)


def cmd_sweep(args) -> tuple[RunReport, Optional[str], int]:
    family = get_family(args.family)
    cfg = _solve_config(args)
    if args.steps < 1:
        raise InvalidInput("--steps must be at least 1")
    grid = np.linspace(args.t_min, args.t_max, args.steps)
    result = sweep(family, grid, args.s, cfg)
    rows = [(r.t, r.s, r.point, r.point.classification if r.point else r.status) for r in result.rows]
    failed = [r.status for r in result.rows if r.point is None]
    inputs = {"family": family.name, "t_min": args.t_min, "t_max": args.t_max, "steps": args.steps,
              "s": args.s, "config": cfg.as_dict()}
    results = {"rows": [{"t": r.t, "s": r.s, "status": r.status, "point": r.point} for r in result.rows],
               "branch_reports": result.branch_reports, "failures": failed}
    code = EXIT_NOCONV if failed else EXIT_OK
    return (RunReport("sweep", inputs, results, seed=args.seed),
            rows_to_csv(family.param_names, rows), code)


def cmd_verify(args) -> tuple[RunReport, Optional[str], int]:
    names = "all" if args.suite == "all" else [args.suite]
    outcomes = run_suites(names, args.seed, threads=default_threads())
    failed = [o.name for o in outcomes if not o.passed]
    report = RunReport("verify", {"suite": args.suite}, {"failed": failed},
                       suite_outcomes=outcomes, seed=args.seed)
    return report, None, EXIT_SUITE if failed else EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError("must be finite")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness (default 0)")
    common.add_argument("--report", type=Path, help="write the JSON report here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="curvfunc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("describe", parents=[common], help="curvature summary of a geometry spec file")
    d.add_argument("spec", type=Path)
    d.set_defaults(func=cmd_describe)

    r = sub.add_parser("residual", parents=[common], help="Euler-Lagrange residual of a spec at (t, s)")
    r.add_argument("spec", type=Path)
    r.add_argument("--t", type=_finite, required=True)
    r.add_argument("--s", type=_finite, default=0.0)
    r.set_defaults(func=cmd_residual)

    solver_opts = argparse.ArgumentParser(add_help=False)
    solver_opts.add_argument("--family", required=True, help="berger or diagonal-su2")
    solver_opts.add_argument("--s", type=_finite, default=0.0)
    solver_opts.add_argument("--starts", type=int, help="number of multistart points")
    solver_opts.add_argument("--config", type=Path, help="YAML file of solver settings")
    solver_opts.add_argument("--csv", type=Path, help="write result rows as CSV")

    so = sub.add_parser("solve", parents=[common, solver_opts], help="critical points at one t")
    so.add_argument("--t", type=_finite, required=True)
    so.set_defaults(func=cmd_solve)

    sw = sub.add_parser("sweep", parents=[common, solver_opts], help="critical points along a t grid")
    sw.add_argument("--t-min", type=_finite, required=True)
    sw.add_argument("--t-max", type=_finite, required=True)
    sw.add_argument("--steps", type=int, default=25)
    sw.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", parents=[common], help="run property suites")
    v.add_argument("--suite", default="all", choices=[*SUITES, "all"])
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        report, csv_text, code = args.func(args)
    except (InvalidInput, NoncompactError) as exc:
        print(f"curvfunc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ReductionMismatchError as exc:
        print(f"curvfunc: solver check failed: {exc}", file=sys.stderr)
        return EXIT_NOCONV

    text = report.to_json()
    if args.report:
        args.report.write_text(text)
    else:
        sys.stdout.write(text)
    if csv_text is not None and getattr(args, "csv", None):
        args.csv.write_text(csv_text)
    if code == EXIT_NOCONV:
        diag = report.results.get("diagnostics") or report.results.get("failures") or []
        print("curvfunc: no converged critical point" if args.command == "solve"
              else f"curvfunc: {len(diag)} sweep point(s) failed", file=sys.stderr)
        for line in diag:
            print(f"  {line}", file=sys.stderr)
    elif code == EXIT_SUITE:
        for o in report.suite_outcomes:
            if not o.passed:
                print(f"curvfunc: suite {o.name} FAILED: {o.counterexample}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
