"""Command-line front end: analyze, solve, sweep, oracle, verify.

Exit codes: 0 success, 1 input error, 2 infeasible thresholds,
3 no nontrivial solution, 4 a verify check failed.
"""
import argparse
import io
import math
import sys
import warnings

import numpy as np

from varalg.errors import (
    BudgetExceeded,
    Infeasible,
    NonpositiveSup,
    OnlyTrivialFound,
    SolverError,
    VarAlgError,
)
from varalg.problem_io import ProblemFileError, dumps, jsonable, load_problem

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_NO_SOLUTION, EXIT_VERIFY = 0, 1, 2, 3, 4
CSV_HEADER = "lambda,min_norm,mp_energy,n_solutions,slope_fit,status"


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (self.prog, message))
        raise SystemExit(EXIT_INPUT)


def _range_pair(text):
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected lo:hi, got %r" % text) from None
    if not 0 < lo < hi:
        raise argparse.ArgumentTypeError("need 0 < lo < hi, got %r" % text)
    return lo, hi


def parse_lambdas(text):
    """``lo:hi:count`` (geometric) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError("lambda range must be lo:hi:count, got %r" % text)
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise InputError("lambda range must be lo:hi:count, got %r" % text) from None
        if count < 0 or not (0 < lo <= hi):
            raise InputError("need 0 < lo <= hi and count >= 0, got %r" % text)
        if count == 0:
            return []
        if count == 1:
            return [lo]
        return [float(x) for x in np.geomspace(lo, hi, count)]
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError("bad lambda list %r" % text) from None
    if any(not v > 0 for v in vals):
        raise InputError("lambda values must be positive")
    return vals


def build_parser():
    p = _Parser(prog="varalg", description="Thresholds and multiple solutions of A u = lambda f(u).")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, formats=("json", "table")):
        sp.add_argument("--problem", required=True, help="problem JSON file, or a bundled problem name")
        sp.add_argument("--format", choices=formats, default=formats[0])
        sp.add_argument("--out", help="write the report here instead of standard output")
        sp.add_argument("--seed", type=int, default=0, help="seed for randomized starting points")

    a = sub.add_parser("analyze", help="spectral data, thresholds and hypothesis probes")
    common(a)
    a.add_argument("--gamma", type=float)
    a.add_argument("--delta", type=float)
    a.add_argument("--h", type=float, default=2.0)
    a.add_argument("--epsilon", type=float, help="also compute the upper bound abar for this epsilon")
    a.add_argument("--t-range", type=_range_pair, default=None)
    a.add_argument("--grid-per-decade", type=int, default=None)
    a.add_argument("--tol", type=float, default=None, help="relative tolerance of the maximizer search")
    a.add_argument("--no-probe", action="store_true", help="skip the hypothesis probes")

    s = sub.add_parser("solve", help="global minimizer and mountain-pass solution")
    common(s)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--tol-residual", type=float, default=1e-8)
    s.add_argument("--three", action="store_true", help="also search for three critical points")
    s.add_argument("--gamma", type=float)
    s.add_argument("--delta", type=float)
    s.add_argument("--h", type=float, default=2.0)

    w = sub.add_parser("sweep", help="two-solution search over a lambda range")
    common(w, ("csv", "json", "table"))
    w.add_argument("--lambdas", required=True, help="lo:hi:count (geometric) or a comma list")

    o = sub.add_parser("oracle", help="brute-force grid search for critical points")
    common(o)
    o.add_argument("--lambda", dest="lam", type=float, required=True)
    o.add_argument("--radius", type=float, default=None)
    o.add_argument("--steps", type=int, default=None)
    o.add_argument("--threshold", type=float, default=0.1, help="residual dip threshold (inf: every local min)")
    o.add_argument("--tol-residual", type=float, default=1e-8)

    v = sub.add_parser("verify", help="run the headless property checks")
    v.add_argument("--quick", action="store_true")
    v.add_argument("--out")
    return p


# ---------------------------------------------------------------- formatting

def _fmt(x):
    if x is None:
        return "-"
    if isinstance(x, (bool, np.bool_)):
        return "yes" if x else "no"
    if isinstance(x, (float, np.floating)):
        return "%.10g" % x
    return str(x)


def _table(rows):
    width = max(len(k) for k, _ in rows) if rows else 0
    return "".join("%-*s  %s\n" % (width, k, _fmt(v)) for k, v in rows)


def _point_rows(points):
    out = []
    for i, p in enumerate(points, 1):
        u = ", ".join("%.8g" % x for x in p["u"])
        out.append(("#%d" % i, "%s  J=%.8g  res=%.2e  [%s]" % (
            p["classification"], p["energy"], p["residual"], u)))
    return out


# ---------------------------------------------------------------- commands

def run_analyze(args):
    from varalg.thresholds import analyze

    problem, meta = load_problem(args.problem)
    search = {}
    if args.t_range is not None:
        search["t_range"] = args.t_range
    if args.grid_per_decade is not None:
        search["per_decade"] = args.grid_per_decade
    if args.tol is not None:
        search["rtol"] = args.tol
    if (args.gamma is None) != (args.delta is None):
        raise InputError("--gamma and --delta go together")
    code = EXIT_OK
    try:
        rep = analyze(problem, args.gamma, args.delta, args.h if args.gamma is not None else None,
                      args.epsilon, probe=not args.no_probe, search=search)
    except Infeasible as exc:
        rep = exc.report
        rep.notes.append("%s: %s" % (type(exc).__name__, exc))
        code = EXIT_INFEASIBLE
    doc = {"command": "analyze", "problem": meta, "report": rep.to_dict()}
    if args.format == "json":
        return dumps(doc), code
    d = rep.to_dict()
    rows = [("problem", meta["name"] or meta["source"]), ("n", d["n"])]
    rows += [(k, d[k]) for k in ("lambda1", "lambda_n", "ones_form", "rho_max", "t_star", "lambda_star", "abar")]
    if d["gamma"] is not None:
        rows += [(k, d[k]) for k in ("eta", "g1_holds", "g2_holds", "lambda1_star", "lambda2_star",
                                     "lambda3h_star")]
    if d["hypothesis_verdicts"]:
        rows += [("probe " + k, v["status"]) for k, v in d["hypothesis_verdicts"].items()]
    rows += [("note", n) for n in d["notes"]]
    return _table(rows), code


def _solution_doc(points, tol):
    kept = [p for p in points if p.residual <= tol * (1.0 + p.norm)]
    return [p.to_dict() for p in kept], len(points) - len(kept)


def run_solve(args):
    from varalg.solver import MultistartConfig, check_positivity, critical_set, find_two_solutions
    from varalg.linalg import check_sign_conditions
    from varalg.thresholds import lambda_star, three_solution_report

    problem, meta = load_problem(args.problem)
    if not args.lam > 0:
        raise InputError("--lambda must be positive")
    ms = MultistartConfig(seed=args.seed)
    doc = {"command": "solve", "problem": meta, "lambda": args.lam, "seed": args.seed,
           "residual_tolerance": args.tol_residual}
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            doc["lambda_star"] = lambda_star(problem)
    except NonpositiveSup:
        doc["lambda_star"] = None
    sign = check_sign_conditions(problem.matrix)
    doc["sign_conditions"] = {"a1": sign.a1_holds, "a2": sign.a2_holds,
                              "f_nonnegative": problem.nonlinearity.nonnegative}
    code = EXIT_OK
    points = []
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            points = list(find_two_solutions(problem, args.lam, ms))
        doc["status"] = "ok"
    except OnlyTrivialFound as exc:
        doc["status"] = "OnlyTrivialFound: %s" % exc
        code = EXIT_NO_SOLUTION
    except SolverError as exc:
        doc["status"] = "%s: %s" % (type(exc).__name__, exc)
        code = EXIT_NO_SOLUTION
    doc["solutions"], dropped = _solution_doc(points, args.tol_residual)
    if dropped:
        doc["status"] += "; %d solution(s) above the residual tolerance dropped" % dropped
        if not any(p["nontrivial"] for p in doc["solutions"]):
            code = EXIT_NO_SOLUTION
    if args.three:
        if args.gamma is None or args.delta is None:
            raise InputError("--three needs --gamma and --delta")
        three = {"gamma": args.gamma, "delta": args.delta, "h": args.h}
        try:
            rep = three_solution_report(problem, args.gamma, args.delta, args.h, probe=False)
            three["interval"] = [rep.lambda1_star, rep.lambda2_star]
            three["lambda_in_interval"] = rep.lambda1_star < args.lam < rep.lambda2_star
        except Infeasible as exc:
            three["interval"] = None
            three["lambda_in_interval"] = False
            three["note"] = "%s: %s" % (type(exc).__name__, exc)
        crit = critical_set(problem, args.lam, MultistartConfig(seed=args.seed,
                            lattice_per_axis=9 if problem.n <= 2 else (5 if problem.n == 3 else 0)))
        three["critical_points"], _ = _solution_doc(crit, args.tol_residual)
        three["distinct"] = len(three["critical_points"])
        three["nontrivial"] = sum(1 for p in three["critical_points"] if p["nontrivial"])
        three["located_three"] = three["distinct"] >= 3 and three["nontrivial"] >= 2
        doc["three"] = three
    if args.format == "json":
        return dumps(doc), code
    rows = [("problem", meta["name"] or meta["source"]), ("lambda", args.lam), ("lambda_star", doc["lambda_star"]),
            ("status", doc["status"])] + _point_rows(doc["solutions"])
    if "three" in doc:
        rows += [("three: interval", doc["three"]["interval"]), ("three: located", doc["three"]["located_three"])]
        rows += _point_rows(doc["three"]["critical_points"])
    return _table(rows), code


def run_sweep(args):
    from varalg.solver import MultistartConfig, lambda_sweep

    problem, meta = load_problem(args.problem)
    lams = parse_lambdas(args.lambdas)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        records, fit = lambda_sweep(problem, lams, fit=True, multistart=MultistartConfig(seed=args.seed))
    if args.format == "json":
        doc = {
            "command": "sweep",
            "problem": meta,
            "records": [{"lambda": r.lam, "min_norm": r.min_norm, "mp_energy": r.mp_energy,
                         "n_solutions": len(r.solutions), "status": r.status,
                         "solutions": [c.to_dict() for c in r.solutions]} for r in records],
            "fit": None if fit is None else fit.__dict__,
        }
        return dumps(doc), EXIT_OK
    slope = "" if fit is None else "%.12g" % fit.slope
    buf = io.StringIO()
    if args.format == "table":
        buf.write("%-14s %-14s %-14s %-4s %s\n" % ("lambda", "min_norm", "mp_energy", "sols", "status"))
        for r in records:
            buf.write("%-14.8g %-14.8g %-14.8g %-4d %s\n" % (r.lam, r.min_norm, r.mp_energy, len(r.solutions), r.status))
    else:
        buf.write(CSV_HEADER + "\n")
        for r in records:
            status = r.status.replace(",", ";").replace("\n", " ")
            buf.write("%.12g,%.12g,%.12g,%d,%s,%s\n" % (r.lam, r.min_norm, r.mp_energy, len(r.solutions), slope, status))
    if fit is not None:
        buf.write("# slope_fit=%.6f r2=%.6f q=%s upper_bound=%s upper_ok=%s nonvanishing_ok=%s\n" % (
            fit.slope, fit.r2, _fmt(fit.q), _fmt(fit.upper_bound), _fmt(fit.upper_ok), _fmt(fit.nonvanishing_ok)))
    return buf.getvalue(), EXIT_OK


def _default_grid(problem, lam):
    from varalg.verify import oracle_radius

    steps = {1: 20001, 2: 401, 3: 101}.get(problem.n)
    if steps is None:
        raise BudgetExceeded("grid oracle supports n <= 3, got n=%d" % problem.n)
    return oracle_radius(problem, lam), steps


def run_oracle(args):
    from varalg.oracle import GridSpec, grid_critical_points

    problem, meta = load_problem(args.problem)
    if not args.lam > 0:
        raise InputError("--lambda must be positive")
    radius, steps = _default_grid(problem, args.lam) if problem.n <= 3 else (None, None)
    if args.radius is not None:
        radius = args.radius
    if args.steps is not None:
        steps = args.steps
    if radius is None or steps is None:
        raise BudgetExceeded("grid oracle supports n <= 3, got n=%d" % problem.n)
    spec = GridSpec(radius, steps)
    pts = grid_critical_points(problem, args.lam, spec, threshold=args.threshold)
    sols = [p.to_dict() for p in pts if p.residual <= args.tol_residual * (1.0 + np.linalg.norm(p.u))]
    for s in sols:
        nrm = math.sqrt(sum(x * x for x in s["u"]))
        s["nontrivial"] = nrm > 1e-8
        s["norm"] = nrm
    doc = {"command": "oracle", "problem": meta, "lambda": args.lam, "seed": args.seed,
           "residual_tolerance": args.tol_residual,
           "grid": {"radius": radius, "steps": steps, "threshold": args.threshold},
           "status": "ok", "solutions": sols}
    if args.format == "json":
        return dumps(doc), EXIT_OK
    rows = [("problem", meta["name"] or meta["source"]), ("lambda", args.lam), ("radius", radius),
            ("steps", steps)] + _point_rows(sols)
    return _table(rows), EXIT_OK


def run_verify(args):
    from varalg.verify import run_all

    results = run_all(quick=args.quick)
    text = "".join("%s %s: %s\n" % ("PASS" if r.passed else "FAIL", r.name, r.detail) for r in results)
    return text, EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {"analyze": run_analyze, "solve": run_solve, "sweep": run_sweep, "oracle": run_oracle,
            "verify": run_verify}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text, code = COMMANDS[args.command](args)
    except (InputError, ProblemFileError, BudgetExceeded) as exc:
        sys.stderr.write("varalg: error: %s\n" % exc)
        return EXIT_INPUT
    except Infeasible as exc:
        sys.stderr.write("varalg: infeasible: %s\n" % exc)
        return EXIT_INFEASIBLE
    except VarAlgError as exc:
        sys.stderr.write("varalg: error: %s: %s\n" % (type(exc).__name__, exc))
        return EXIT_INPUT
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
