"""Parameter thresholds and intervals: lambda*, the sublevel-set bound and
its ratio scan, the abar constant, and the three-solution interval report."""
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from varalg.errors import Infeasible, InfeasibleG1, InfeasibleG2, NonpositiveSup
from varalg.nonlin import FAIL, probe_hypotheses
from varalg.numerics import golden_max

T_RANGE = (1e-6, 1e6)
GRID_PER_DECADE = 64
T_RTOL = 1e-10
SCAN_POINTS = 1024


class RangeSuspect(UserWarning):
    """The maximizer of rho sits at the edge of the searched range."""


@dataclass(frozen=True)
class RhoMaxResult:
    t_star: float
    rho_max: float
    bracket: Tuple[float, float]
    grid_evaluations: int
    range_suspect: bool = False


def _signed_log_grid(t_range, per_decade):
    lo, hi = t_range
    decades = math.log10(hi) - math.log10(lo)
    pos = np.logspace(math.log10(lo), math.log10(hi), max(int(round(decades * per_decade)), 1) + 1)
    return np.concatenate([-pos[::-1], pos])


def rho_values(problem, ts):
    ts = np.asarray(ts, dtype=np.float64)
    return problem.nonlinearity.sum_primitive(ts) / (ts * ts)


def max_rho(problem, t_range=T_RANGE, per_decade=GRID_PER_DECADE, rtol=T_RTOL):
    """Maximize rho(t) = sum_k F_k(t) / t^2 over t != 0.

    Scans a signed log grid, then golden-section refines the three best
    non-adjacent grid brackets and keeps the overall best.
    """
    grid = _signed_log_grid(t_range, per_decade)
    rho = rho_values(problem, grid)
    evals = grid.size
    half = grid.size // 2  # grid[:half] negative, grid[half:] positive
    order = np.argsort(-np.where(np.isfinite(rho), rho, -np.inf), kind="stable")
    chosen = []
    for i in order:
        if all(abs(int(i) - c) > 1 for c in chosen):
            chosen.append(int(i))
        if len(chosen) == 3:
            break

    def rho1(t):
        return float(rho_values(problem, np.array([t]))[0])

    best_t, best_rho, best_bracket = float(grid[order[0]]), float(rho[order[0]]), None
    for i in chosen:
        lo_i = max(i - 1, 0 if i < half else half)
        hi_i = min(i + 1, half - 1 if i < half else grid.size - 1)
        a, b = float(grid[lo_i]), float(grid[hi_i])
        if a == b:
            t, r = a, float(rho[i])
        else:
            counter = [0]

            def fn(t):
                counter[0] += 1
                return rho1(t)

            t, r = golden_max(fn, a, b, rtol=rtol)
            evals += counter[0] + 2
            if rho[i] > r:
                t, r = float(grid[i]), float(rho[i])
        if r > best_rho or best_bracket is None and r >= best_rho:
            best_t, best_rho, best_bracket = t, r, (a, b)
    if best_bracket is None:
        best_bracket = (best_t, best_t)
    if not best_rho > 0.0:
        raise NonpositiveSup(
            "sum_k F_k(t) <= 0 on the probed range (max rho = %.3g); lambda* is undefined" % best_rho
        )
    top = int(order[0])
    suspect = top in (0, half - 1, half, grid.size - 1)
    if suspect:
        warnings.warn("maximizer of rho at the edge of the searched t-range (t = %g)" % best_t, RangeSuspect)
    return RhoMaxResult(best_t, best_rho, best_bracket, evals, suspect)


def lambda_star(problem, **search):
    """(1^t A 1 / 2) / max_{t != 0} sum_k F_k(t)/t^2."""
    res = max_rho(problem, **search)
    return problem.matrix.ones_form / (2.0 * res.rho_max)


def component_max_primitive(f, radius, points=SCAN_POINTS):
    """max_{|xi| <= radius} F(xi): dense scan plus golden refinement."""
    from varalg.nonlin import primitive_array

    if radius <= 0:
        return 0.0
    xs = np.linspace(-radius, radius, points)
    vals = primitive_array(f, xs)
    i = int(np.argmax(vals))
    best = max(float(vals[i]), 0.0)  # xi = 0 gives F = 0
    a, b = float(xs[max(i - 1, 0)]), float(xs[min(i + 1, points - 1)])
    if a < b:
        _, r = golden_max(lambda x: float(primitive_array(f, np.array([x]))[0]), a, b, rtol=1e-12, atol=1e-14)
        best = max(best, r)
    return best


def sum_max_primitive(problem, radius):
    cache = {}
    total = 0.0
    for fk in problem.nonlinearity.components:
        if id(fk) not in cache:
            cache[id(fk)] = component_max_primitive(fk, radius)
        total += cache[id(fk)]
    return total


def sublevel_sup_bound(problem, rho):
    """Upper bound for sup Psi over {u : u'Au < 2 rho}: that set lies in the
    cube |u|_inf <= sqrt(2 rho / lambda_1), so the sup is at most
    sum_k max_{|xi| <= sqrt(2 rho/lambda_1)} F_k(xi)."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    return sum_max_primitive(problem, math.sqrt(2.0 * rho / problem.matrix.lambda1))


def sublevel_ratio_scan(problem, decades, verdicts=None):
    """[(rho, bound(rho)/rho)] for rho = 1, 1e-1, ..., 10**-decades."""
    if verdicts is None:
        verdicts = probe_hypotheses(problem.nonlinearity, problem.matrix.lambda1)
    if verdicts.h1.status == FAIL or verdicts.h2_prime.status == FAIL:
        warnings.warn("h1 or h2' fails for this nonlinearity; the ratio need not tend to 0", RuntimeWarning)
    out = []
    for d in range(int(decades) + 1):
        rho = 10.0 ** (-d)
        out.append((rho, sublevel_sup_bound(problem, rho) / rho))
    return out


@dataclass(frozen=True)
class AbarResult:
    abar: float
    epsilon: float
    varrho: float
    sup_ratio: float
    lambda_star: float
    t_star: float


def abar_for(problem, epsilon, varrho, lam_star=None):
    """(1 + eps) / (1/lambda* - bound(varrho)/varrho) for a fixed varrho."""
    if lam_star is None:
        lam_star = lambda_star(problem)
    ratio = sublevel_sup_bound(problem, varrho) / varrho
    denom = 1.0 / lam_star - ratio
    return (1.0 + epsilon) / denom if denom > 0 else math.inf


def abar_details(problem, epsilon, bisect_steps=60):
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    res = max_rho(problem)
    ones = problem.matrix.ones_form
    lam_star = ones / (2.0 * res.rho_max)
    target = epsilon / lam_star
    cap = ones * res.t_star ** 2 / 2.0

    def ratio(v):
        return sublevel_sup_bound(problem, v) / v

    ok = None
    prev = math.log(cap)
    for k in range(1, 4 * 24 + 1):
        lv = math.log(cap) - k * math.log(10.0) / 4.0
        if ratio(math.exp(lv)) < target:
            ok = lv
            break
        prev = lv
    if ok is None:
        raise ValueError("no varrho below %.3g satisfies bound/varrho < eps/lambda*" % cap)
    bad = prev
    for _ in range(bisect_steps):
        mid = 0.5 * (ok + bad)
        if mid >= math.log(cap):
            bad = mid
            continue
        if ratio(math.exp(mid)) < target:
            ok = mid
        else:
            bad = mid
    varrho = math.exp(ok)
    r = ratio(varrho)
    abar = (1.0 + epsilon) / (1.0 / lam_star - r)
    return AbarResult(abar, float(epsilon), varrho, r, lam_star, res.t_star)


def abar_threshold(problem, epsilon):
    """abar = (1 + eps)/(Psi(u1)/Phi(u1) - sup/varrho) with the largest probed
    varrho satisfying sup/varrho < eps/lambda* and varrho < 1'A1 t*^2/2."""
    return abar_details(problem, epsilon).abar


@dataclass
class ThresholdReport:
    n: int
    lambda1: float
    lambda_n: float
    ones_form: float
    lambda_star: Optional[float] = None
    t_star: Optional[float] = None
    rho_max: Optional[float] = None
    abar: Optional[float] = None
    epsilon: Optional[float] = None
    gamma: Optional[float] = None
    delta: Optional[float] = None
    h: Optional[float] = None
    r: Optional[float] = None
    phi_ustar: Optional[float] = None
    eta: Optional[float] = None
    sum_max_gamma: Optional[float] = None
    sum_f_delta: Optional[float] = None
    g1_holds: Optional[bool] = None
    g2_holds: Optional[bool] = None
    lambda1_star: Optional[float] = None
    lambda2_star: Optional[float] = None
    lambda3h_star: Optional[float] = None
    interval_Lambda1: Optional[Tuple[float, float]] = None
    proof_quotients: dict = field(default_factory=dict)
    hypothesis_verdicts: object = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        out = {}
        for k, v in self.__dict__.items():
            if k == "hypothesis_verdicts":
                out[k] = None if v is None else v.to_dict()
            elif isinstance(v, tuple):
                out[k] = list(v)
            else:
                out[k] = v
        return out


def eta(lambda1, ones_form, gamma, delta):
    x = lambda1 * gamma * gamma
    return x / (x + ones_form * delta * delta)


def base_report(problem, probe=True, search=None):
    mat = problem.matrix
    rep = ThresholdReport(n=mat.n, lambda1=mat.lambda1, lambda_n=mat.lambda_n, ones_form=mat.ones_form)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = max_rho(problem, **(search or {}))
        for w in caught:
            rep.notes.append("RangeSuspect: %s" % w.message)
        rep.rho_max, rep.t_star = res.rho_max, res.t_star
        rep.lambda_star = mat.ones_form / (2.0 * res.rho_max)
    except NonpositiveSup as exc:
        rep.notes.append("NonpositiveSup: %s" % exc)
    if probe:
        rep.hypothesis_verdicts = probe_hypotheses(problem.nonlinearity, mat.lambda1)
    if not problem.nonlinearity.validated:
        rep.notes.append("nonlinearity contains non-validated catalog entries")
    return rep


def three_solution_report(problem, gamma, delta, h, probe=True, report=None):
    """Three-solution thresholds for given gamma, delta > 0 and h > 1.

    Raises InfeasibleG1/InfeasibleG2 (carrying the partial report) when a
    hypothesis fails, and Infeasible when lambda1* >= lambda2*.
    """
    if not (gamma > 0 and delta > 0):
        raise ValueError("gamma and delta must be positive")
    if not h > 1:
        raise ValueError("h must exceed 1")
    rep = report if report is not None else base_report(problem, probe=probe)
    lam1, ones = problem.matrix.lambda1, problem.matrix.ones_form
    rep.gamma, rep.delta, rep.h = float(gamma), float(delta), float(h)
    rep.r = lam1 * gamma * gamma / 2.0
    rep.phi_ustar = ones * delta * delta / 2.0
    rep.eta = eta(lam1, ones, gamma, delta)
    M = sum_max_primitive(problem, gamma)
    S = float(problem.nonlinearity.sum_primitive(np.array([float(delta)]))[0])
    rep.sum_max_gamma, rep.sum_f_delta = M, S

    g1_margin = delta - math.sqrt(lam1 / ones) * gamma
    rep.g1_holds = g1_margin > 0
    g2_margin = rep.eta * S - M
    rep.g2_holds = g2_margin > 0
    if not rep.g1_holds:
        raise InfeasibleG1("g1 fails: delta - sqrt(lambda1/1'A1) gamma = %.6g <= 0" % g1_margin, g1_margin, rep)
    if not rep.g2_holds:
        raise InfeasibleG2("g2 fails: eta * sum F(delta) - sum max F = %.6g <= 0" % g2_margin, g2_margin, rep)

    rep.lambda1_star = ones / (2.0 * (S - M))
    rep.lambda2_star = math.inf if M == 0.0 else lam1 * gamma * gamma / (2.0 * M)
    rep.lambda3h_star = lam1 * h * gamma * gamma / (2.0 * (lam1 * gamma * gamma * S / ones - M))
    rep.interval_Lambda1 = (rep.lambda1_star, rep.lambda2_star)
    rep.proof_quotients = {
        "phi_ustar_over_gap": rep.phi_ustar / (S - M),
        "r_over_sup": math.inf if M == 0.0 else rep.r / M,
        "h_r_over_gap": h * rep.r / (rep.r * S / rep.phi_ustar - M),
    }
    if not rep.lambda1_star < rep.lambda2_star:
        raise Infeasible(
            "empty interval: lambda1* = %.6g >= lambda2* = %.6g" % (rep.lambda1_star, rep.lambda2_star), None, rep
        )
    return rep


def analyze(problem, gamma=None, delta=None, h=None, epsilon=None, probe=True, search=None):
    rep = base_report(problem, probe=probe, search=search)
    if epsilon is not None and rep.lambda_star is not None:
        rep.abar = abar_threshold(problem, epsilon)
        rep.epsilon = float(epsilon)
    if gamma is not None and delta is not None:
        three_solution_report(problem, gamma, delta, h if h is not None else 2.0, report=rep)
    return rep


# interface names
prop33_ratio_scan = sublevel_ratio_scan
theorem34_abar = abar_threshold
theorem35_report = three_solution_report
