"""Energy model, critical-point search and lambda sweeps.

The energy is J(u) = u'Au/2 - lambda * sum_k F_k(u_k); its gradient is
Au - lambda f(u), so critical points are exactly the solutions of
Au = lambda f(u).
"""
import math
import warnings
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from varalg.errors import (
    DimensionMismatch,
    DistinctnessFailed,
    Diverged,
    GeometryViolated,
    MaxDeformationIterations,
    NoDescentProgress,
    NonpositiveSup,
    OnlyTrivialFound,
    PositivityViolated,
    SolverError,
    StalledAtNonCritical,
)
from varalg.linalg import check_sign_conditions, jacobi_eigh
from varalg.nonlin import LargeDerivative, PASS

NONTRIVIAL_TOL = 1e-8
RESIDUAL_TOL = 1e-9
NEWTON_TOL = 1e-11
DEGENERATE_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class EnergyModel:
    problem: object
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive, got %r" % self.lam)

    @property
    def n(self):
        return self.problem.n

    @property
    def A(self):
        return self.problem.matrix.entries

    def _check(self, u):
        u = np.asarray(u, dtype=np.float64)
        if u.shape[-1] != self.n:
            raise DimensionMismatch("vector of length %d for an n=%d problem" % (u.shape[-1], self.n))
        return u

    def energy(self, u):
        u = self._check(u)
        return float(0.5 * u @ self.A @ u - self.lam * np.sum(self.problem.nonlinearity.primitives(u)))

    def energy_batch(self, U):
        U = self._check(U)
        quad = np.einsum("ij,jk,ik->i", U, self.A, U)
        return 0.5 * quad - self.lam * np.sum(self.problem.nonlinearity.primitives(U), axis=-1)

    def gradient(self, u):
        u = self._check(u)
        return self.A @ u - self.lam * self.problem.nonlinearity.values(u)

    def gradient_batch(self, U):
        U = self._check(U)
        return U @ self.A.T - self.lam * self.problem.nonlinearity.values(U)

    def residual(self, u):
        return float(np.linalg.norm(self.gradient(u)))

    def hessian(self, u):
        """A - lambda diag(f'(u)), or None when some f_k' is unbounded."""
        d = self.problem.nonlinearity.derivatives(self._check(u))
        if any(x is LargeDerivative for x in d):
            return None
        return self.A - self.lam * np.diag(np.asarray(d, dtype=np.float64))


class ModelEvaluation(NamedTuple):
    phi: float
    psi: float
    j: float
    gradient: np.ndarray
    hessian: Optional[np.ndarray]


def evaluate_model(model, u):
    u = model._check(u)
    if u.ndim != 1:
        raise DimensionMismatch("evaluate_model expects a single vector")
    phi = 0.5 * float(u @ model.A @ u)
    psi = float(np.sum(model.problem.nonlinearity.primitives(u)))
    return ModelEvaluation(phi, psi, phi - model.lam * psi, model.gradient(u), model.hessian(u))


@dataclass(eq=False)
class CriticalPoint:
    u: np.ndarray
    lam: float
    residual: float
    energy: float
    classification: str
    index: Optional[int]
    nontrivial: bool
    positive_flags: Tuple[bool, bool]
    hessian_eigs: Optional[np.ndarray] = None
    iterations: int = 0
    flags: Tuple[str, ...] = ()

    @property
    def norm(self):
        return float(np.linalg.norm(self.u))

    def to_dict(self):
        return {
            "u": [float(x) for x in self.u],
            "lambda": float(self.lam),
            "residual": float(self.residual),
            "energy": float(self.energy),
            "classification": self.classification,
            "index": self.index,
            "nontrivial": bool(self.nontrivial),
            "nonnegative": bool(self.positive_flags[0]),
            "strictly_positive": bool(self.positive_flags[1]),
            "norm": self.norm,
            "flags": list(self.flags),
        }


def classify(model, u):
    """(classification, index, eigenvalues) from the Hessian inertia.

    For n = 1 an index-1 point is reported as a saddle, the mountain-pass
    convention; local_max is kept for index n with n >= 2.
    """
    H = model.hessian(u)
    if H is None:
        return "degenerate", None, None
    w, _ = jacobi_eigh(H)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    index = int(np.sum(w < 0.0))
    if scale == 0.0 or float(np.min(np.abs(w))) < DEGENERATE_RTOL * scale:
        return "degenerate", int(np.sum(w < -DEGENERATE_RTOL * scale)), w
    if index == 0:
        return "local_min", 0, w
    if index == model.n and model.n > 1:
        return "local_max", index, w
    return "saddle", index, w


def make_critical_point(model, u, iterations=0, flags=()):
    u = np.asarray(u, dtype=np.float64).copy()
    res = model.residual(u)
    if 0.0 < np.linalg.norm(u) < NONTRIVIAL_TOL and model.residual(np.zeros_like(u)) <= res:
        u, res = np.zeros_like(u), model.residual(np.zeros_like(u))
    if res > RESIDUAL_TOL * (1.0 + np.linalg.norm(u)):
        raise StalledAtNonCritical("residual %.3e is above tolerance at u=%s" % (res, u))
    cls, idx, w = classify(model, u)
    nrm = float(np.linalg.norm(u))
    tiny = 1e-10 * (1.0 + nrm)
    return CriticalPoint(
        u=u,
        lam=model.lam,
        residual=res,
        energy=model.energy(u),
        classification=cls,
        index=idx,
        nontrivial=nrm > NONTRIVIAL_TOL,
        positive_flags=(bool(np.all(u >= -tiny)), bool(np.all(u > tiny))),
        hessian_eigs=w,
        iterations=iterations,
        flags=tuple(flags),
    )


# ---------------------------------------------------------------- descent

def gradient_descent(model, u0, max_iter=300, gtol=1e-6, c1=1e-4, step0=1.0):
    """Steepest descent on J with Armijo backtracking (halving).

    Returns (u, iterations, converged).
    """
    u = np.asarray(u0, dtype=np.float64).copy()
    J = model.energy(u)
    step = step0
    for it in range(1, max_iter + 1):
        g = model.gradient(u)
        gg = float(g @ g)
        if math.sqrt(gg) < gtol * (1.0 + np.linalg.norm(u)):
            return u, it, True
        while True:
            trial = u - step * g
            Jt = model.energy(trial)
            if Jt <= J - c1 * step * gg:
                break
            step *= 0.5
            if step < 1e-16:
                return u, it, False
        u, J = trial, Jt
        step *= 2.0
        if np.linalg.norm(u) > 1e8:
            raise Diverged("descent left the ball |u| <= 1e8")
    return u, max_iter, False


def newton_refine_and_classify(model, u0, tol=NEWTON_TOL, max_iter=100):
    """Damped Newton on G(u) = Au - lambda f(u), then Hessian classification.

    Steps are halved until |G| decreases.  When a derivative is unbounded the
    iteration takes a few descent steps on J instead.
    """
    u = np.asarray(u0, dtype=np.float64).copy()
    if not np.all(np.isfinite(u)):
        raise ValueError("non-finite starting point")
    G = model.gradient(u)
    g = float(np.linalg.norm(G))
    it = 0
    flags = []
    for it in range(1, max_iter + 1):
        if g < tol * (1.0 + np.linalg.norm(u)):
            break
        J = model.hessian(u)
        if J is None:
            flags.append("descent_fallback")
            u, _, _ = gradient_descent(model, u, max_iter=20, gtol=tol)
            G = model.gradient(u)
            g = float(np.linalg.norm(G))
            continue
        try:
            step = np.linalg.solve(J, G)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, G, rcond=None)[0]
        t = 1.0
        accepted = False
        while t > 1e-12:
            trial = u - t * step
            Gt = model.gradient(trial)
            gt = float(np.linalg.norm(Gt))
            if gt < g:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            if g <= RESIDUAL_TOL * (1.0 + np.linalg.norm(u)):
                break  # at the rounding floor
            raise StalledAtNonCritical("Newton made no progress at |G| = %.3e" % g)
        u, G, g = trial, Gt, gt
        if np.linalg.norm(u) > 1e8:
            raise Diverged("Newton iterate left the ball |u| <= 1e8")
    else:
        if g > RESIDUAL_TOL * (1.0 + np.linalg.norm(u)):
            raise StalledAtNonCritical("Newton did not converge in %d iterations (|G| = %.3e)" % (max_iter, g))
    return make_critical_point(model, u, iterations=it, flags=flags)


# ---------------------------------------------------------------- multistart

@dataclass
class MultistartConfig:
    n_random: int = 16
    seed: int = 0
    t_star: Optional[float] = None
    radius_factor: float = 4.0
    lattice_per_axis: int = 0  # extra uniform starts for small n
    gd_max_iter: int = 200
    gd_tol: float = 1e-5


def _t_star(problem, cfg):
    if cfg.t_star is not None:
        return float(cfg.t_star)
    from varalg.thresholds import max_rho

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return max_rho(problem).t_star
    except NonpositiveSup:
        return 1.0


def start_points(model, cfg):
    n = model.n
    ts = _t_star(model.problem, cfg)
    rng = np.random.default_rng(cfg.seed)
    ones = np.ones(n)
    starts = [np.zeros(n), 1e-3 * ones, -1e-3 * ones, ts * ones, -ts * ones]
    for k in range(n):
        e = np.zeros(n)
        e[k] = ts
        starts += [e, -e]
    radius = cfg.radius_factor * math.sqrt(n) * abs(ts)
    for _ in range(cfg.n_random):
        d = rng.standard_normal(n)
        d /= np.linalg.norm(d)
        starts.append(radius * rng.random() ** (1.0 / n) * d)
    if cfg.lattice_per_axis > 1:
        # nested lattices, so small-scale structure near the origin is seeded too
        for r in (radius, radius / 4.0, radius / 16.0):
            axis = np.linspace(-r, r, cfg.lattice_per_axis)
            starts.extend(np.stack(np.meshgrid(*([axis] * n), indexing="ij"), -1).reshape(-1, n))
    return starts


def _sort_key(cp):
    return (round(cp.energy, 12),) + tuple(round(float(x), 12) for x in cp.u)


def dedupe(points, sep=1e-6):
    out = []
    for cp in sorted(points, key=_sort_key):
        if all(np.linalg.norm(cp.u - q.u) > sep * (1.0 + np.linalg.norm(q.u)) for q in out):
            out.append(cp)
    return out


def find_global_min(model, multistart=None):
    """Lowest-energy critical point over the multistart set.

    Each start runs Armijo descent, then a Newton polish.  The result carries
    the flag "BestIsTrivial" when the winner is the origin.
    """
    cfg = multistart or MultistartConfig()
    found = []
    for u0 in start_points(model, cfg):
        try:
            u, _, _ = gradient_descent(model, u0, max_iter=cfg.gd_max_iter, gtol=cfg.gd_tol)
            found.append(newton_refine_and_classify(model, u))
        except SolverError:
            continue
    if not found:
        raise NoDescentProgress("no start produced a critical point")
    best = min(found, key=_sort_key)
    if not best.nontrivial:
        best.flags = best.flags + ("BestIsTrivial",)
    return best


# ---------------------------------------------------------------- mountain pass

@dataclass
class MountainPassConfig:
    points: int = 41
    step: Optional[float] = None  # defaults to 0.5 / (curvature bound)
    gtol: float = 1e-7
    newton_try: float = 1e-3  # attempt an early Newton polish below this |g|
    max_updates: int = 100_000


def _reparametrize(path):
    """Redistribute points uniformly by arclength, endpoints fixed."""
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0.0:
        return path
    target = np.linspace(0.0, s[-1], path.shape[0])
    return np.stack([np.interp(target, s, path[:, k]) for k in range(path.shape[1])], axis=1)


def _curvature_bound(model, path):
    bound = float(np.max(np.abs(model.problem.matrix.spectrum)))
    fp = 0.0
    for p in path:
        for d in model.problem.nonlinearity.derivatives(p):
            if d is not LargeDerivative:
                fp = max(fp, abs(d))
    return bound + model.lam * fp


def _initial_path(model, end, P):
    """Segment from 0 to ``end`` with one node on the highest point of the
    segment, so barriers much narrower than the node spacing are resolved."""
    ts = np.unique(np.concatenate([np.logspace(-10.0, 0.0, 201), np.linspace(0.0, 1.0, 201)]))
    Js = model.energy_batch(ts[:, None] * end[None, :])
    k = int(np.argmax(Js[1:-1])) + 1
    if not Js[k] > 0.0:
        raise GeometryViolated("J stays nonpositive on the segment from 0 to the endpoint")
    tk = ts[k]
    left = max(2, min(P - 2, int(round(P * tk))))
    t = np.concatenate([np.linspace(0.0, tk, left), np.linspace(tk, 1.0, P - left + 1)[1:]])
    return t[:, None] * end[None, :]


def _accept_saddle(cp, endpoint):
    return (
        cp.nontrivial
        and cp.energy > 0.0
        and (cp.index is None or cp.index >= 1 or cp.classification == "degenerate")
        and np.linalg.norm(cp.u - endpoint) > 1e-6 * (1.0 + np.linalg.norm(endpoint))
    )


def mountain_pass(model, endpoint, config=None):
    """Mountain-pass critical point between 0 and ``endpoint``.

    A polyline from 0 to ``endpoint`` is deformed: interior points descend
    along the gradient component normal to the path, the current path
    maximum climbs along the path and descends across it, and the two
    sub-paths on either side of the maximum are re-spaced by arclength.
    The maximum converges to a saddle, which is then Newton-polished.
    """
    cfg = config or MountainPassConfig()
    end = np.asarray(endpoint, dtype=np.float64)
    if model.energy(end) >= 0.0:
        raise GeometryViolated("J(endpoint) = %.6g is not below J(0) = 0" % model.energy(end))
    P = cfg.points
    path = _initial_path(model, end, P)
    step = cfg.step if cfg.step is not None else 0.5 / max(_curvature_bound(model, path), 1e-12)
    tried_at = math.inf
    for update in range(1, cfg.max_updates + 1):
        Jp = model.energy_batch(path)
        m = 1 + int(np.argmax(Jp[1:-1]))
        G = model.gradient_batch(path)
        tau = np.zeros_like(path)
        tau[1:-1] = path[2:] - path[:-2]
        tn = np.linalg.norm(tau, axis=1, keepdims=True)
        tau = np.divide(tau, tn, out=np.zeros_like(tau), where=tn > 0)
        proj = np.sum(G * tau, axis=1, keepdims=True)
        gm = float(np.linalg.norm(G[m]))
        if gm < cfg.gtol or (gm < cfg.newton_try and gm < 0.5 * tried_at):
            tried_at = gm
            try:
                cp = newton_refine_and_classify(model, path[m])
                if _accept_saddle(cp, end):
                    cp.iterations = update
                    return cp
            except SolverError:
                pass
            if gm < cfg.gtol:
                raise GeometryViolated("path maximum converged to a point that is not a mountain pass")
        move = G - proj * tau
        move[m] = G[m] - 2.0 * proj[m] * tau[m]
        move[0] = 0.0
        move[-1] = 0.0
        path = path - step * move
        left = _reparametrize(path[: m + 1])
        right = _reparametrize(path[m:])
        path = np.concatenate([left, right[1:]])
        if not np.all(np.isfinite(path)):
            step *= 0.5
            path = _initial_path(model, end, P)
    raise MaxDeformationIterations("path deformation used %d updates" % cfg.max_updates)


# ---------------------------------------------------------------- orchestration

def _separated(a, b):
    return np.linalg.norm(a.u - b.u) > 1e-6 * (1.0 + np.linalg.norm(a.u))


def check_positivity(problem, points):
    verdict = check_sign_conditions(problem.matrix)
    if not (verdict.a1_holds and problem.nonlinearity.nonnegative):
        return None
    for cp in points:
        if not cp.nontrivial:
            continue
        if not cp.positive_flags[0]:
            raise PositivityViolated("solution has a negative component although (A1) holds and f >= 0")
        if verdict.a2_holds and not cp.positive_flags[1]:
            raise PositivityViolated("solution is not strictly positive although (A1)+(A2) hold and f >= 0")
    return verdict


def find_two_solutions(problem, lam, multistart=None, mp_config=None):
    """Global minimizer and mountain-pass point at this lambda."""
    from varalg.thresholds import lambda_star

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ls = lambda_star(problem)
        if lam <= ls:
            warnings.warn("lambda = %g is not above lambda* = %g" % (lam, ls), RuntimeWarning)
    except NonpositiveSup:
        pass
    model = EnergyModel(problem, float(lam))
    u1 = find_global_min(model, multistart)
    if not u1.nontrivial or u1.energy >= 0.0:
        raise OnlyTrivialFound("only the trivial solution has J <= 0 at lambda = %g" % lam)
    u2 = mountain_pass(model, u1.u, mp_config)
    if not _separated(u1, u2):
        raise DistinctnessFailed("minimizer and mountain-pass point coincide")
    if not (u2.nontrivial and u1.energy < 0.0 < u2.energy):
        raise DistinctnessFailed("energy ordering J(u1) < 0 < J(u2) violated")
    check_positivity(problem, (u1, u2))
    return u1, u2


def critical_set(problem, lam, multistart=None, mp_config=None, include_mountain_pass=True):
    """All distinct critical points reached from the multistart set (Newton
    from every start, plus the mountain-pass point when one exists)."""
    cfg = multistart or MultistartConfig(lattice_per_axis=9 if problem.n <= 2 else (5 if problem.n == 3 else 0))
    model = EnergyModel(problem, float(lam))
    found = []
    for u0 in start_points(model, cfg):
        for seed_u in (u0, None):
            try:
                if seed_u is None:
                    seed_u, _, _ = gradient_descent(model, u0, max_iter=cfg.gd_max_iter, gtol=cfg.gd_tol)
                found.append(newton_refine_and_classify(model, seed_u))
            except SolverError:
                continue
    if include_mountain_pass and found:
        best = min(found, key=_sort_key)
        if best.energy < 0.0:
            try:
                found.append(mountain_pass(model, best.u, mp_config))
            except SolverError:
                pass
    return dedupe(found)


# ---------------------------------------------------------------- sweeps

@dataclass
class SweepRecord:
    lam: float
    solutions: List[CriticalPoint] = field(default_factory=list)
    min_norm: float = math.nan
    mp_energy: float = math.nan
    status: str = "ok"


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    r2: float
    q: Optional[float]
    upper_bound: Optional[float]
    upper_ok: Optional[bool]
    nonvanishing_ok: bool


def fit_loglog(lams, norms):
    x, y = np.log(np.asarray(lams)), np.log(np.asarray(norms))
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 1.0
    return float(slope), r2


def lambda_sweep(problem, lambdas, fit=True, multistart=None, verdicts=None):
    """Two-solution search for each lambda, then a log-log slope fit of the
    minimizer norm over the upper half of the lambda range."""
    records = []
    for lam in sorted(float(x) for x in lambdas):
        rec = SweepRecord(lam=lam)
        try:
            u1, u2 = find_two_solutions(problem, lam, multistart)
            rec.solutions = [u1, u2]
            rec.min_norm, rec.mp_energy = u1.norm, u2.energy
        except SolverError as exc:
            rec.status = "%s: %s" % (type(exc).__name__, exc)
            try:
                u1 = find_global_min(EnergyModel(problem, lam), multistart)
                rec.solutions = [u1]
                rec.min_norm = u1.norm
            except SolverError:
                pass
        records.append(rec)
    if not fit or not records:
        return records, None
    usable = [r for r in records if math.isfinite(r.min_norm) and r.min_norm > NONTRIVIAL_TOL]
    top = usable[len(usable) // 2:] if len(usable) >= 4 else usable
    if len(top) < 2:
        return records, None
    slope, r2 = fit_loglog([r.lam for r in top], [r.min_norm for r in top])
    if verdicts is None:
        from varalg.nonlin import probe_hypotheses

        verdicts = probe_hypotheses(problem.nonlinearity, problem.matrix.lambda1)
    q = verdicts.h1_star.data.get("q") if verdicts.h1_star.status == PASS else None
    bound = None if q is None else 1.0 / (1.0 - q) + 0.1
    return records, SlopeFit(
        slope=slope,
        r2=r2,
        q=q,
        upper_bound=bound,
        upper_ok=None if bound is None else slope <= bound,
        nonvanishing_ok=slope >= 0.0,
    )
