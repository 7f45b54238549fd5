"""Acceptance criteria, one test each.

Every test records a one-line verdict in RESULTS; the conftest hook prints
them at the end of the session, and running this file directly prints them
too.
"""
import math
import time
import warnings

import numpy as np
import pytest

from varalg.linalg import jacobi_eigh, make_spd, verify_norm_bounds
from varalg.nonlin import LargeDerivative, catalog_make
from varalg.problems import (
    build_generic,
    build_lattice,
    build_tridiagonal,
    fourth_difference,
    fourth_order_matrix,
    lattice_matrix,
    rectangle_net,
    tridiagonal_matrix,
)
from varalg.solver import EnergyModel, critical_set, find_two_solutions, lambda_sweep
from varalg.thresholds import lambda_star, max_rho, sublevel_ratio_scan, abar_details, three_solution_report
from varalg.verify import check_oracle_equivalence, equivalence_problems, random_spd

RESULTS = {}

REF_RATIO = 0.3787311542  # max_t F(t)/t^2 for a single log(1+s^2) component


def record(key, ok, detail):
    RESULTS[key] = "%s criterion %s: %s" % ("PASS" if ok else "FAIL", key, detail)
    assert ok, detail


def ex42_problem():
    return build_lattice(rectangle_net(2, 2), catalog_make("ex42_logistic_log", {"n": 4}))


def ex37_problem():
    return build_tridiagonal(2, -1.0, 2.0, catalog_make("ex37_sqrt", {"n": 2}))


def test_c01_lattice_threshold():
    p = ex42_problem()
    start = time.perf_counter()
    res = max_rho(p)
    ls = p.matrix.ones_form / (2.0 * res.rho_max)
    elapsed = time.perf_counter() - start
    e_rho = abs(res.rho_max / (4.0 * REF_RATIO) - 1.0)
    e_ls = abs(ls * REF_RATIO - 1.0)
    ok = e_rho < 1e-6 and e_ls < 1e-5 and elapsed < 1.0
    record("1", ok, "max rho = %.10f (rel err %.1e), lambda* = %.7f (rel err %.1e), %.3f s"
           % (res.rho_max, e_rho, ls, e_ls, elapsed))


def test_c02_lattice_solutions():
    p = ex42_problem()
    start = time.perf_counter()
    u1, u2 = find_two_solutions(p, 3.0)
    elapsed = time.perf_counter() - start
    ok = (
        u1.nontrivial and u2.nontrivial
        and np.linalg.norm(u1.u - u2.u) > 1e-6
        and max(u1.residual, u2.residual) < 1e-8
        and u1.energy < 0.0 < u2.energy
        and u1.positive_flags[1] and u2.positive_flags[1]
        and elapsed < 5.0
    )
    record("2", ok, "J(u1) = %.6f, J(u2) = %.6f, residuals %.1e/%.1e, min components %.4f/%.4f, %.2f s"
           % (u1.energy, u2.energy, u1.residual, u2.residual, u1.u.min(), u2.u.min(), elapsed))


def test_c03_lattice_matrix():
    B = build_lattice(rectangle_net(2, 2), catalog_make("zero", {"n": 4})).A
    expected = np.array([[4, -1, -1, 0], [-1, 4, 0, -1], [-1, 0, 4, -1], [0, -1, -1, 4]], dtype=float)
    ok = np.array_equal(B, expected) and np.array_equal(lattice_matrix(rectangle_net(2, 2)), expected)
    record("3", ok, "B matches entry for entry" if ok else "B = %s" % B.tolist())


def test_c04_tridiagonal_spectrum():
    worst = 0.0
    cases = 0
    for n in range(2, 51):
        c = math.cos(math.pi / (n + 1))
        for a in (-1.0, -2.0):
            for b in (-2.0 * a * c + 0.05, -2.0 * a, -5.0 * a):
                w, _ = jacobi_eigh(tridiagonal_matrix(n, a, b))
                k = np.arange(1, n + 1)
                ref = np.sort(b + 2.0 * a * np.cos(k * math.pi / (n + 1)))
                worst = max(worst, float(np.max(np.abs(w - ref))))
                cases += 1
    record("4", worst < 1e-10, "%d matrices, max eigenvalue error %.2e" % (cases, worst))


def test_c05_fourth_order_stencil():
    rng = np.random.default_rng(5)
    worst = 0.0
    for n in range(1, 11):
        A = fourth_order_matrix(n)
        for _ in range(100):
            u = rng.standard_normal(n)
            worst = max(worst, float(np.max(np.abs(A @ u - fourth_difference(u)))))
    record("5", worst < 1e-12, "1000 vectors, max deviation %.2e" % worst)


def test_c06_inequalities():
    rng = np.random.default_rng(6)
    violations = 0
    eig_gap = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 11))
        A = make_spd(random_spd(rng, n))
        u = rng.standard_normal(n) * 10.0 ** rng.uniform(-3, 3)
        if not all(verify_norm_bounds(A, u)):
            violations += 1
        v1, vn = A.eigenvectors[:, 0], A.eigenvectors[:, -1]
        eig_gap = max(eig_gap, abs(A.quad(v1) - A.lambda1 * float(v1 @ v1)),
                      abs(A.quad(vn) - A.lambda_n * float(vn @ vn)))
    record("6", violations == 0 and eig_gap < 1e-10,
           "1000 pairs, %d violations, eigenvector equality gap %.2e" % (violations, eig_gap))


def test_c07_oracle_equivalence():
    results = [check_oracle_equivalence(name, p) for name, p in equivalence_problems().items()]
    record("7", all(r.passed for r in results), "; ".join("%s %s" % (r.name, r.detail) for r in results))


def test_c08_scalar_closed_form():
    p = build_generic([[2.0]], catalog_make("rational_sq", {"n": 1}))
    pts = sorted(critical_set(p, 5.0), key=lambda c: float(c.u[0]))
    us = [float(c.u[0]) for c in pts]
    classes = [c.classification for c in pts]
    energies = [c.energy for c in pts]
    # J(u) = u^2 - 5 (u - atan u) at the roots of 2u(1 + u^2) = 5u^2
    closed = [0.0, 0.25 - 5.0 * (0.5 - math.atan(0.5)), 4.0 - 5.0 * (2.0 - math.atan(2.0))]
    ok = (
        len(pts) == 3
        and max(abs(a - b) for a, b in zip(us, (0.0, 0.5, 2.0))) < 1e-8
        and classes == ["local_min", "saddle", "local_min"]
        and max(abs(a - b) for a, b in zip(energies, closed)) < 1e-5
    )
    record("8", ok, "u = %s, %s, J = %s (closed forms %s)"
           % (["%.10f" % x for x in us], classes, ["%.7f" % e for e in energies], ["%.7f" % e for e in closed]))


def test_c09_three_solution_instance():
    p = ex37_problem()
    rep = three_solution_report(p, 2.0, 3.0, 3.0)
    thresholds_ok = (
        rep.g1_holds and rep.g2_holds
        and abs(rep.lambda1_star - 0.5) < 1e-12
        and rep.lambda2_star == math.inf
        and all(abs(three_solution_report(p, 2.0, 3.0, h, probe=False).lambda3h_star - 0.5 * h) < 1e-12
                for h in (1.5, 2.0, 3.0, 10.0))
    )
    pts = [c for c in critical_set(p, 1.0) if c.residual < 1e-8]
    nontrivial = sum(c.nontrivial for c in pts)
    search_ok = len(pts) >= 3 and nontrivial >= 2
    record("9", thresholds_ok and search_ok,
           "g1/g2 hold, lambda1* = %.6g, lambda2* = %s, lambda3h* = 0.5h: %s; at lambda = 1: %d critical point(s), "
           "%d nontrivial" % (rep.lambda1_star, rep.lambda2_star, thresholds_ok, len(pts), nontrivial))


def test_c10_sublevel_ratio_scan():
    scan = sublevel_ratio_scan(ex42_problem(), 8)
    ratios = [r for _, r in scan]
    tail = ratios[-5:]
    mono = all(b < a for a, b in zip(tail, tail[1:]))
    ok = ratios[-1] < 1e-3 * ratios[0] and mono
    record("10", ok, "ratio(1) = %.4g, ratio(1e-8) = %.4g, last four decades decreasing: %s"
           % (ratios[0], ratios[-1], mono))


def test_c11_scaling_law():
    power = build_generic([[1.0]], catalog_make("power", {"n": 1, "q": 0.5, "mode": "positive"}))
    _, fit = lambda_sweep(power, [2.0 ** k for k in range(7)])
    lattice, _ = lambda_sweep(ex42_problem(), list(np.geomspace(3.0, 48.0, 5)), fit=False)
    norms = [r.min_norm for r in lattice]
    nondecreasing = all(np.isfinite(norms)) and all(b >= a for a, b in zip(norms, norms[1:]))
    ok = abs(fit.slope - 2.0) <= 0.05 and nondecreasing
    record("11", ok, "power q=1/2 slope %.6f; lattice min_norm %s nondecreasing: %s"
           % (fit.slope, ["%.4g" % x for x in norms], nondecreasing))


def _catalog_problems():
    # ex41_log is left out: its middle branch is singular at s = 1 and the
    # entry is flagged non-validated
    out = {
        "rational_sq": build_tridiagonal(2, -1.0, 2.0, catalog_make("rational_sq", {"n": 2})),
        "ex42_logistic_log": ex42_problem(),
        "ex37_sqrt": ex37_problem(),
        "power": build_tridiagonal(3, -1.0, 2.5, catalog_make("power", {"n": 3, "q": 0.5})),
        "linear": build_generic([[3.0, 1.0], [1.0, 2.0]], catalog_make("linear", {"n": 2, "c": 0.7})),
        "zero": build_generic([[2.0]], catalog_make("zero", {"n": 1})),
        "expr": build_generic(np.diag([2.0, 3.0]), catalog_make(
            "expr", {"per_component": ["s^2/(1+s^2)", "piece{ s < 0 => 0, else => log(1+s) }"]})),
    }
    return out


def _away_from_kinks(problem, u, gap):
    for f, x in zip(problem.nonlinearity.components, u):
        if any(abs(x - k) < gap for k in f.kinks):
            return False
    return True


def test_c12_derivative_checks():
    rng = np.random.default_rng(12)
    worst_g = 0.0
    worst_h = 0.0
    for name, p in _catalog_problems().items():
        gap = 1e-2
        done = 0
        while done < 100:
            u = rng.uniform(-5.0, 5.0, p.n)
            if not _away_from_kinks(p, u, gap):
                continue
            m = EnergyModel(p, float(rng.uniform(0.5, 10.0)))
            g = m.gradient(u)
            h = 1e-6
            fd = np.array([(m.energy(u + e) - m.energy(u - e)) / (2 * h) for e in h * np.eye(p.n)])
            worst_g = max(worst_g, float(np.max(np.abs(g - fd))) / (1.0 + np.linalg.norm(g)))
            H = m.hessian(u)
            if H is not None:
                hh = 1e-6
                cols = [(m.gradient(u + e) - m.gradient(u - e)) / (2 * hh) for e in hh * np.eye(p.n)]
                Hfd = np.stack(cols, axis=1)
                closed = [f.derivative is not None for f in p.nonlinearity.components]
                for i in range(p.n):
                    for j in range(p.n):
                        if i == j and not closed[i]:
                            continue
                        rel = abs(H[i, j] - Hfd[i, j]) / max(1.0, abs(H[i, j]))
                        worst_h = max(worst_h, rel)
            done += 1
    ok = worst_g < 1e-6 and worst_h < 1e-5
    record("12", ok, "%d catalog problems x 100 samples, gradient err %.1e (< 1e-6), Hessian rel err %.1e (< 1e-5)"
           % (len(_catalog_problems()), worst_g, worst_h))


def test_s01_two_solutions_below_abar():
    p = ex42_problem()
    details = abar_details(p, 0.5)
    lams = [3.0, 5.0, 7.0]
    found = []
    for lam in lams:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            u1, u2 = find_two_solutions(p, lam)
        found.append(u1.nontrivial and u2.nontrivial and math.isfinite(u1.norm) and math.isfinite(u2.norm))
    ok = details.abar > max(lams) and all(found)
    record("S1", ok, "abar(eps=0.5) = %.4f; two bounded nontrivial solutions at lambda in %s: %s"
           % (details.abar, lams, found))


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    for key in sorted(RESULTS, key=lambda k: (k[0] == "S", int(k.lstrip("S")))):
        print(RESULTS[key])
    sys.exit(1 if failed else 0)
