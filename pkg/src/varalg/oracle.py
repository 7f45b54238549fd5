"""Brute-force reference computations, independent of the main solver.

Critical points come from a uniform grid: strict-or-flat local minima of
the sup-norm residual |Au - lambda f(u)|_inf are refined by a Newton
iteration with a finite-difference Jacobian.  Primitives use composite
5-point Gauss-Legendre rather than adaptive Simpson.
"""
import math
from dataclasses import dataclass
from typing import List, NamedTuple

import numpy as np

from varalg import _kernels
from varalg.errors import BudgetExceeded

GRID_CAP = {1: 100_001, 2: 401, 3: 101}
TOTAL_CAP = 10_000_000
GRID_THRESHOLD = 0.1
DEDUPE_SEP = 1e-6

_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class GridSpec:
    radius: float
    steps: int

    def __post_init__(self):
        if not (self.radius > 0 and self.steps >= 3):
            raise ValueError("grid needs radius > 0 and at least 3 steps per axis")

    def check_budget(self, n):
        cap = GRID_CAP.get(n, int(TOTAL_CAP ** (1.0 / n)))
        if self.steps > cap:
            raise BudgetExceeded("%d steps per axis exceeds the cap of %d for n=%d" % (self.steps, cap, n))
        if self.steps ** n > TOTAL_CAP:
            raise BudgetExceeded("%d^%d grid points exceed the total cap %d" % (self.steps, n, TOTAL_CAP))


class OraclePoint(NamedTuple):
    u: np.ndarray
    residual: float
    energy: float
    classification: str
    index: int

    def to_dict(self):
        return {
            "u": [float(x) for x in self.u],
            "residual": float(self.residual),
            "energy": float(self.energy),
            "classification": self.classification,
            "index": int(self.index),
        }


def _graded_gl(f, a, b, panels):
    """int_a^b f with x = a + (b - a) w(s), w(s) = 3s^2 - 2s^3, so that
    square-root type endpoint singularities become smooth in s."""
    edges = np.linspace(0.0, 1.0, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    s = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    x = a + (b - a) * s * s * (3.0 - 2.0 * s)
    jac = (b - a) * 6.0 * s * (1.0 - s)
    vals = np.array([f(v) for v in x]) * jac
    return float(np.sum(half * (vals.reshape(panels, 5) @ _GL_W)))


def reference_primitive(f, t, panels=4096, breakpoints=()):
    """F(t) = int_0^t f by composite 5-point Gauss-Legendre, split at the
    breakpoints strictly between 0 and t."""
    t = float(t)
    if t == 0.0:
        return 0.0
    lo, hi = min(0.0, t), max(0.0, t)
    cuts = [lo] + sorted(float(k) for k in breakpoints if lo < k < hi) + [hi]
    total = sum(_graded_gl(f, a, b, max(1, panels // (len(cuts) - 1))) for a, b in zip(cuts, cuts[1:]))
    return total if t > 0 else -total


def _chained_primitives(f, ts, panels_per_gap=8):
    """F at sorted points ts (ts[0] == 0) by summing Gauss-Legendre panels."""
    out = np.zeros(len(ts))
    for i in range(1, len(ts)):
        a, b = ts[i - 1], ts[i]
        edges = np.linspace(a, b, panels_per_gap + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
        vals = np.array([f(x) for x in nodes]).reshape(panels_per_gap, 5)
        out[i] = out[i - 1] + float(np.sum(half * (vals @ _GL_W)))
    return out


def dense_rho_scan(problem, t_range=(1e-6, 1e6), per_decade=400):
    """(t_star, rho_max) of sum_k F_k(t) / t^2 on a dense log grid, both signs."""
    lo, hi = t_range
    m = int(math.ceil(per_decade * math.log10(hi / lo))) + 1
    pos = np.concatenate([[0.0], np.logspace(math.log10(lo), math.log10(hi), m)])
    best = (None, -math.inf)
    comps = problem.nonlinearity.components
    for sign in (1.0, -1.0):
        ts = sign * pos
        total = np.zeros(len(ts))
        cache = {}
        for f in comps:
            if id(f) not in cache:
                # sample the component, not a closed form, to stay independent
                cache[id(f)] = _chained_primitives(f.eval, ts, panels_per_gap=2)
            total += cache[id(f)]
        rho = total[1:] / ts[1:] ** 2
        k = int(np.argmax(rho))
        if rho[k] > best[1]:
            best = (float(ts[1 + k]), float(rho[k]))
    return best


def _residual_grid(problem, lam, axes):
    n = problem.n
    A = problem.A
    comps = problem.nonlinearity.components
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)
    fvals = np.empty_like(mesh)
    axis = axes[0]
    table = {}
    for k, f in enumerate(comps):
        if id(f) not in table:
            table[id(f)] = np.array([f.eval(x) for x in axis])
        # every axis is the same 1-D grid, so look the values up by index
        idx = np.unravel_index(np.arange(mesh.shape[0]), [len(a) for a in axes])[k]
        fvals[:, k] = table[id(f)][idx]
    res = np.max(np.abs(mesh @ A.T - lam * fvals), axis=1)
    return mesh, res.reshape([len(a) for a in axes])


def _residual_fn(problem, lam):
    A = problem.A
    comps = problem.nonlinearity.components

    def G(v):
        return A @ v - lam * np.array([f.eval(x) for f, x in zip(comps, v)])

    return G


def _fd_jacobian(G, u):
    n = u.shape[0]
    J = np.empty((n, n))
    for j in range(n):
        h = 1e-7 * max(1.0, abs(u[j]))
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (G(u + e) - G(u - e)) / (2.0 * h)
    return J


def _fd_classify(problem, lam, u):
    J = _fd_jacobian(_residual_fn(problem, lam), u)
    w = np.linalg.eigvalsh(0.5 * (J + J.T))
    if not np.all(np.isfinite(w)):
        return "degenerate", int(np.sum(w < 0))
    scale = float(np.max(np.abs(w)))
    index = int(np.sum(w < 0.0))
    if scale == 0.0 or float(np.min(np.abs(w))) < 1e-6 * scale:
        return "degenerate", index
    if index == 0:
        return "local_min", 0
    if index == len(w) and len(w) > 1:
        return "local_max", index
    return "saddle", index


def _fd_newton(problem, lam, u, tol=1e-11, max_iter=80):
    G = _residual_fn(problem, lam)
    g = G(u)
    for _ in range(max_iter):
        gn = np.linalg.norm(g)
        if not np.isfinite(gn):
            return None
        if gn < tol * (1.0 + np.linalg.norm(u)):
            return u
        J = _fd_jacobian(G, u)
        try:
            step = np.linalg.solve(J, g)
        except np.linalg.LinAlgError:
            return None
        t = 1.0
        while t > 1e-10:
            trial = u - t * step
            gt = G(trial)
            if np.linalg.norm(gt) < gn:
                break
            t *= 0.5
        else:
            return u if gn < 1e-9 * (1.0 + np.linalg.norm(u)) else None
        u, g = trial, gt
    return u if np.linalg.norm(g) < 1e-9 * (1.0 + np.linalg.norm(u)) else None


def oracle_energy(problem, lam, u):
    comps = problem.nonlinearity.components
    psi = sum(reference_primitive(f.eval, x, panels=512, breakpoints=f.kinks) for f, x in zip(comps, u))
    return 0.5 * float(u @ problem.A @ u) - lam * psi


def grid_critical_points(problem, lam, spec, threshold=GRID_THRESHOLD) -> List[OraclePoint]:
    """All critical points whose grid neighbourhood shows a residual dip."""
    n = problem.n
    spec.check_budget(n)
    axis = np.linspace(-spec.radius, spec.radius, spec.steps)
    axes = [axis] * n
    mesh, res = _residual_grid(problem, float(lam), axes)
    cand = _kernels.grid_local_minima(res, threshold)
    found = []
    for flat in cand:
        u = _fd_newton(problem, float(lam), mesh[int(flat)].copy())
        if u is None:
            continue
        if np.linalg.norm(u) < 1e-8:
            u = np.zeros(n)
        if any(np.linalg.norm(u - q) <= DEDUPE_SEP * (1.0 + np.linalg.norm(q)) for q in found):
            continue
        found.append(u)
    out = []
    for u in found:
        r = float(np.linalg.norm(problem.A @ u - lam * problem.nonlinearity.values(u)))
        cls, idx = _fd_classify(problem, lam, u)
        out.append(OraclePoint(u, r, oracle_energy(problem, lam, u), cls, idx))
    out.sort(key=lambda p: (round(p.energy, 10), tuple(np.round(p.u, 10))))
    return out


def hausdorff(a, b):
    """Hausdorff distance between two finite point sets (inf if exactly one is empty)."""
    a = [np.asarray(x, dtype=np.float64) for x in a]
    b = [np.asarray(x, dtype=np.float64) for x in b]
    if not a and not b:
        return 0.0
    if not a or not b:
        return math.inf
    d = np.array([[np.linalg.norm(x - y) for y in b] for x in a])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
