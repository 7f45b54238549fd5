"""Headless property checks, shared by ``varalg verify`` and the tests."""
import math
from typing import NamedTuple

import numpy as np

from varalg.linalg import make_spd, verify_norm_bounds
from varalg.nonlin import catalog_make
from varalg.oracle import GridSpec, grid_critical_points, hausdorff
from varalg.problems import build_generic, build_lattice, build_tridiagonal, rectangle_net
from varalg.solver import critical_set
from varalg.thresholds import lambda_star, sublevel_ratio_scan


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def random_spd(rng, n):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    w = np.exp(rng.uniform(-2.0, 2.0, n))
    return (Q * w) @ Q.T


def check_norm_bounds(pairs=1000, seed=0):
    """Two-sided Rayleigh bounds and the sup-norm bound on random pairs, with
    equality in the lower bound at the first eigenvector."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        n = int(rng.integers(1, 9))
        A = make_spd(random_spd(rng, n))
        nb = verify_norm_bounds(A, rng.standard_normal(n) * 10.0 ** rng.uniform(-3, 3))
        if not all(nb):
            return CheckResult("norm_bounds", False, "violated for n=%d" % n)
        v = A.eigenvectors[:, 0]
        worst = max(worst, abs(A.quad(v) - A.lambda1 * float(v @ v)))
    ok = worst < 1e-10
    return CheckResult("norm_bounds", ok, "%d pairs, eigenvector gap %.2e" % (pairs, worst))


def oracle_radius(problem, lam):
    """A priori box holding every solution of Au = lam f(u): grow R until
    |A^{-1} lam f(u)|_inf < R for all |u|_inf <= R."""
    Ainv = np.linalg.inv(problem.A)
    row = float(np.max(np.sum(np.abs(Ainv), axis=1)))
    comps = problem.nonlinearity.components
    R = 1.0
    for _ in range(60):
        s = np.linspace(-R, R, 2001)
        fmax = max(float(np.max(np.abs(f.values(s)))) for f in comps)
        if lam * row * fmax < 0.95 * R:
            return R
        R *= 1.5
    return R


def equivalence_problems():
    rs = build_tridiagonal(2, -1.0, 2.0, catalog_make("rational_sq", {"n": 2}))
    ex = build_generic([[2.0]], catalog_make("ex42_logistic_log", {"n": 1}))
    return {"rational_sq_tensor": rs, "ex42_reduced": ex}


LAMBDA_MULTIPLES = (0.5, 1.5, 2.0, 3.0, 4.0)


def check_oracle_equivalence(name, problem, multiples=LAMBDA_MULTIPLES, tol=1e-4):
    ls = lambda_star(problem)
    worst = 0.0
    counts = []
    for m in multiples:
        lam = m * ls
        steps = 401 if problem.n == 2 else 20001
        spec = GridSpec(oracle_radius(problem, lam), steps)
        ref = grid_critical_points(problem, lam, spec, threshold=math.inf)
        got = critical_set(problem, lam)
        d = hausdorff([c.u for c in got], [p.u for p in ref])
        worst = max(worst, d)
        counts.append(len(ref))
    return CheckResult("oracle_equivalence[%s]" % name, worst < tol,
                       "Hausdorff max %.2e over lambda/lambda* in %s, set sizes %s" % (worst, multiples, counts))


def check_ratio_scan():
    problem = build_lattice(rectangle_net(2, 2), catalog_make("ex42_logistic_log", {"n": 4}))
    scan = sublevel_ratio_scan(problem, 8)
    ratios = [r for _, r in scan]
    first, last = ratios[0], ratios[-1]
    tail = ratios[-5:]
    mono = all(b < a for a, b in zip(tail, tail[1:]))
    ok = last < 1e-3 * first and mono
    return CheckResult("ratio_scan", ok, "ratio(1e-8)/ratio(1) = %.3e, last four decades decreasing: %s"
                       % (last / first, mono))


def run_all(quick=False):
    out = [check_norm_bounds(100 if quick else 1000)]
    for name, prob in equivalence_problems().items():
        out.append(check_oracle_equivalence(name, prob, LAMBDA_MULTIPLES[:2] if quick else LAMBDA_MULTIPLES))
    out.append(check_ratio_scan())
    return out
