"""Componentwise nonlinearities f_k, their primitives F_k(t) = int_0^t f_k,
the built-in catalog, and sampling diagnostics for the growth hypotheses."""
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple

import numpy as np

from varalg.errors import BadParams, QuadratureBudgetExceeded, UnknownCatalogName
from varalg.numerics import adaptive_simpson

QUAD_TOL = 1e-10
QUAD_MAX_INTERVALS = 2 ** 20

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


class _LargeDerivative:
    """Sentinel for derivatives that are unbounded or non-finite."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "LargeDerivative"

    def __bool__(self):
        return False


LargeDerivative = _LargeDerivative()


@dataclass(frozen=True, eq=False)
class ScalarFunction:
    """One component f_k.

    When ``vectorized`` is true, ``eval``/``primitive``/``derivative`` accept
    numpy arrays.  ``kinks`` lists points where f or f' is not smooth; they
    are used as quadrature breakpoints and to pick one-sided differences.
    """

    eval: Callable
    primitive: Optional[Callable] = None
    derivative: Optional[Callable] = None
    label: str = ""
    vectorized: bool = False
    kinks: Tuple[float, ...] = ()
    nonnegative: Optional[bool] = None
    validated: bool = True
    source: Optional[str] = None

    def __call__(self, s):
        return float(self.eval(s))

    def values(self, s):
        s = np.asarray(s, dtype=np.float64)
        if self.vectorized:
            return np.asarray(self.eval(s), dtype=np.float64) * np.ones_like(s)
        return np.vectorize(lambda x: float(self.eval(float(x))), otypes=[np.float64])(s)

    def scaled(self, c):
        c = float(c)
        f, F, df = self.eval, self.primitive, self.derivative
        nonneg = self.nonnegative if c > 0 else (None if c < 0 else True)
        return replace(
            self,
            eval=lambda s: c * f(s),
            primitive=None if F is None else (lambda t: c * F(t)),
            derivative=None if df is None else (lambda s: c * df(s)),
            label="%r*(%s)" % (c, self.label),
            nonnegative=nonneg,
        )


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    components: Tuple[ScalarFunction, ...]
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.components) < 1:
            raise BadParams("a nonlinearity needs at least one component")
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def n(self):
        return len(self.components)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, k):
        return self.components[k]

    def values(self, u):
        """f(u) for a vector u, or row-wise for a (m, n) batch."""
        u = np.asarray(u, dtype=np.float64)
        out = np.empty_like(u)
        for k, fk in enumerate(self.components):
            out[..., k] = fk.values(u[..., k])
        return out

    def primitives(self, u):
        u = np.asarray(u, dtype=np.float64)
        out = np.empty_like(u)
        for k, fk in enumerate(self.components):
            out[..., k] = primitive_array(fk, u[..., k])
        return out

    def derivatives(self, u):
        """List of f_k'(u_k); entries may be the LargeDerivative sentinel."""
        return [derivative_value(fk, float(x)) for fk, x in zip(self.components, np.asarray(u, dtype=float))]

    def sum_primitive(self, ts):
        """sum_k F_k(t) evaluated at every t in ``ts`` (the all-equal vector)."""
        ts = np.asarray(ts, dtype=np.float64)
        total = np.zeros_like(ts)
        cache = {}
        for fk in self.components:
            key = id(fk)
            if key not in cache:
                cache[key] = primitive_array(fk, ts)
            total += cache[key]
        return total

    @property
    def nonnegative(self):
        return all(fk.nonnegative for fk in self.components)

    @property
    def validated(self):
        return all(fk.validated for fk in self.components)

    def scaled(self, c):
        return Nonlinearity(tuple(fk.scaled(c) for fk in self.components), name=self.name, params=dict(self.params))


# ---------------------------------------------------------------- primitives

def primitive_value(f, t, tol=QUAD_TOL, max_intervals=QUAD_MAX_INTERVALS):
    """F(t) = int_0^t f(s) ds, closed form when available, else adaptive
    Simpson on [0, t] split at the function's kinks."""
    t = float(t)
    if t == 0.0:
        return 0.0
    if f.primitive is not None:
        return float(f.primitive(t))
    return adaptive_simpson(
        lambda s: float(f.eval(s)), 0.0, t, tol=tol, max_intervals=max_intervals, breakpoints=f.kinks
    )


def primitive_array(f, ts, tol=QUAD_TOL):
    """Vectorized F at many points.

    Without a closed form, integrates along the sorted points and chains the
    pieces, so each quadrature only covers the gap between neighbours.
    """
    ts = np.asarray(ts, dtype=np.float64)
    if f.primitive is not None:
        if f.vectorized:
            return np.asarray(f.primitive(ts), dtype=np.float64) * np.ones_like(ts)
        return np.vectorize(lambda x: float(f.primitive(float(x))), otypes=[np.float64])(ts)
    flat = ts.ravel()
    out = np.zeros_like(flat)
    for sign in (1.0, -1.0):
        idx = np.flatnonzero(sign * flat > 0)
        if idx.size == 0:
            continue
        order = idx[np.argsort(sign * flat[idx], kind="stable")]
        prev, acc = 0.0, 0.0
        for i in order:
            t = float(flat[i])
            if t != prev:
                acc += adaptive_simpson(lambda s: float(f.eval(s)), prev, t, tol=tol, breakpoints=f.kinks)
            out[i] = acc
            prev = t
    return out.reshape(ts.shape)


def derivative_value(f, s):
    """f'(s), closed form when present, else central differences.

    Next to a declared kink the difference is one-sided, taken on the side of
    ``s`` away from the kink.  Unbounded or non-finite results return the
    LargeDerivative sentinel.
    """
    s = float(s)
    if f.derivative is not None:
        d = float(f.derivative(s))
        return d if math.isfinite(d) else LargeDerivative
    h = max(1e-6, 1e-6 * abs(s))

    def diff(step):
        near = [k for k in f.kinks if abs(s - k) <= step]
        if near:
            k = near[0]
            if s >= k:
                return (f(s + step) - f(s)) / step
            return (f(s) - f(s - step)) / step
        return (f(s + step) - f(s - step)) / (2.0 * step)

    d = diff(h)
    if not math.isfinite(d):
        return LargeDerivative
    # a difference quotient that keeps growing as the step shrinks is unbounded
    d_fine = diff(h * 1e-2)
    if not math.isfinite(d_fine) or (abs(d_fine) > 1e3 and abs(d_fine) > 5.0 * abs(d)):
        return LargeDerivative
    return d


# ---------------------------------------------------------------- catalog

def _rational_sq():
    return ScalarFunction(
        eval=lambda s: s * s / (1.0 + s * s),
        primitive=lambda t: t - np.arctan(t),
        derivative=lambda s: 2.0 * s / (1.0 + s * s) ** 2,
        label="s^2/(1+s^2)",
        vectorized=True,
        nonnegative=True,
    )


def _log_positive():
    def a(s):
        s = np.asarray(s, dtype=np.float64)
        return np.where(s > 0, np.log1p(np.where(s > 0, s, 0.0) ** 2), 0.0)

    def A(t):
        t = np.asarray(t, dtype=np.float64)
        tp = np.where(t > 0, t, 0.0)
        return np.where(t > 0, tp * np.log1p(tp * tp) - 2.0 * tp + 2.0 * np.arctan(tp), 0.0)

    def da(s):
        s = np.asarray(s, dtype=np.float64)
        return np.where(s > 0, 2.0 * s / (1.0 + s * s), 0.0)

    return ScalarFunction(eval=a, primitive=A, derivative=da, label="log(1+s^2) for s>0, else 0",
                          vectorized=True, nonnegative=True)


def _sqrt_shift(k):
    def g(s):
        s = np.asarray(s, dtype=np.float64)
        return np.where(s >= 2.0, k * np.sqrt(np.maximum(s - 2.0, 0.0)), 0.0)

    def G(t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(t >= 2.0, (2.0 * k / 3.0) * np.maximum(t - 2.0, 0.0) ** 1.5, 0.0)

    def dg(s):
        s = float(s)
        if s > 2.0:
            return k / (2.0 * math.sqrt(s - 2.0))
        if s == 2.0:
            return math.inf
        return 0.0

    return ScalarFunction(eval=g, primitive=G, derivative=dg, label="%d*sqrt(s-2) for s>=2, else 0" % k,
                          vectorized=True, kinks=(2.0,), nonnegative=True)


EX41_GUARD = 1e-6


def _ex41(i):
    ei = math.exp(i)
    lo, hi = 1.0 - EX41_GUARD, 1.0 + EX41_GUARD

    def middle(u):
        return i * u / math.log(u)

    g_lo, g_hi = middle(lo), middle(hi)

    def g(u):
        u = float(u)
        if u <= 0.0:
            return -i * u * u
        if u > ei:
            return i / math.e
        if lo <= u <= hi:
            return g_lo + (g_hi - g_lo) * (u - lo) / (hi - lo)
        return middle(u)

    def dg(u):
        u = float(u)
        if u <= 0.0:
            return -2.0 * i * u
        if u > ei:
            return 0.0
        if lo <= u <= hi:
            return (g_hi - g_lo) / (hi - lo)
        L = math.log(u)
        return i * (L - 1.0) / (L * L)

    # extra breakpoints approaching the guard band keep adaptive quadrature
    # of the logarithmic spike within budget
    approach = tuple(1.0 + sgn * 10.0 ** -k for k in range(1, 6) for sgn in (-1.0, 1.0))
    return ScalarFunction(eval=g, derivative=dg, label="ex41 g_%d" % i,
                          kinks=tuple(sorted((0.0, lo, hi, ei) + approach)), validated=False)


def _power(q, mode):
    if mode == "odd":
        def f(s):
            s = np.asarray(s, dtype=np.float64)
            return np.sign(s) * np.abs(s) ** q

        def F(t):
            return np.abs(np.asarray(t, dtype=np.float64)) ** (q + 1.0) / (q + 1.0)

        def df(s):
            s = abs(float(s))
            if s == 0.0:
                return math.inf if q < 1 else (1.0 if q == 1 else 0.0)
            return q * s ** (q - 1.0)

        return ScalarFunction(eval=f, primitive=F, derivative=df, label="sign(s)|s|^%g" % q,
                              vectorized=True, kinks=(0.0,) if q < 1 else ())

    def fp(s):
        s = np.asarray(s, dtype=np.float64)
        return np.maximum(s, 0.0) ** q

    def Fp(t):
        return np.maximum(np.asarray(t, dtype=np.float64), 0.0) ** (q + 1.0) / (q + 1.0)

    def dfp(s):
        s = float(s)
        if s < 0.0:
            return 0.0
        if s == 0.0:
            return math.inf if q < 1 else (1.0 if q == 1 else 0.0)
        return q * s ** (q - 1.0)

    return ScalarFunction(eval=fp, primitive=Fp, derivative=dfp, label="max(s,0)^%g" % q,
                          vectorized=True, kinks=(0.0,), nonnegative=True)


def _linear(c):
    return ScalarFunction(
        eval=lambda s: c * np.asarray(s, dtype=np.float64),
        primitive=lambda t: 0.5 * c * np.asarray(t, dtype=np.float64) ** 2,
        derivative=lambda s: c,
        label="%g*s" % c,
        vectorized=True,
        nonnegative=None,
    )


def _zero():
    return ScalarFunction(
        eval=lambda s: np.zeros_like(np.asarray(s, dtype=np.float64)),
        primitive=lambda t: np.zeros_like(np.asarray(t, dtype=np.float64)),
        derivative=lambda s: 0.0,
        label="0",
        vectorized=True,
        nonnegative=True,
    )


CATALOG = ("ex37_sqrt", "ex41_log", "ex42_logistic_log", "power", "rational_sq", "linear", "zero",
           "custom_expr", "expr")


def _int_param(params, key):
    if key not in params:
        raise BadParams("missing parameter %r" % key)
    try:
        v = int(params[key])
    except (TypeError, ValueError):
        raise BadParams("parameter %r must be an integer" % key) from None
    if v != params[key] or v < 1:
        raise BadParams("parameter %r must be a positive integer, got %r" % (key, params[key]))
    return v


def catalog_make(name, params=None):
    """Build a catalog nonlinearity.

    ``params`` always carries ``n``; ``power`` also takes ``q`` and
    ``mode`` ("odd" or "positive"), ``linear`` takes ``c``, and
    ``custom_expr``/``expr`` take ``per_component`` (list of expressions) or a
    single ``expr`` replicated n times.  Any entry accepts ``scale``.
    """
    params = dict(params or {})
    if name not in CATALOG:
        raise UnknownCatalogName("unknown nonlinearity %r (known: %s)" % (name, ", ".join(CATALOG)))

    if name in ("custom_expr", "expr"):
        from varalg import exprfn

        if "per_component" in params:
            srcs = list(params["per_component"])
            if "n" in params and _int_param(params, "n") != len(srcs):
                raise BadParams("n=%r but %d expressions given" % (params["n"], len(srcs)))
        elif "expr" in params:
            srcs = [params["expr"]] * _int_param(params, "n")
        else:
            raise BadParams("expression nonlinearity needs 'per_component' or 'expr'")
        if not srcs:
            raise BadParams("empty expression list")
        cache = {}
        comps = []
        for src in srcs:
            if src not in cache:
                cache[src] = exprfn.compile_source(src)
            comps.append(cache[src])
        nl = Nonlinearity(tuple(comps), name="expr", params=params)
    else:
        n = _int_param(params, "n")
        if name == "ex37_sqrt":
            comps = tuple(_sqrt_shift(k) for k in range(1, n + 1))
        elif name == "ex41_log":
            comps = tuple(_ex41(i) for i in range(1, n + 1))
        elif name == "ex42_logistic_log":
            comps = (_log_positive(),) * n
        elif name == "rational_sq":
            comps = (_rational_sq(),) * n
        elif name == "zero":
            comps = (_zero(),) * n
        elif name == "linear":
            comps = (_linear(float(params.get("c", 1.0))),) * n
        else:  # power
            try:
                q = float(params.get("q"))
            except (TypeError, ValueError):
                raise BadParams("power needs a numeric 'q'") from None
            if not q > 0:
                raise BadParams("power exponent q must be positive, got %r" % q)
            mode = params.get("mode", "odd")
            if mode not in ("odd", "positive"):
                raise BadParams("power mode must be 'odd' or 'positive', got %r" % mode)
            comps = (_power(q, mode),) * n
        nl = Nonlinearity(comps, name=name, params=params)

    scale = params.get("scale")
    if scale is not None:
        nl = nl.scaled(float(scale))
        nl = Nonlinearity(nl.components, name=name, params=params)
    return nl


# ---------------------------------------------------------------- diagnostics

@dataclass(frozen=True)
class Verdict:
    status: str
    data: dict = field(default_factory=dict)

    def to_dict(self):
        return {"status": self.status, **self.data}


@dataclass(frozen=True)
class HypothesisVerdict:
    h1: Verdict
    h1_star: Verdict
    h2: Verdict
    h2_prime: Verdict
    g3: Verdict

    def to_dict(self):
        return {k: getattr(self, k).to_dict() for k in ("h1", "h1_star", "h2", "h2_prime", "g3")}


PROBE_DECADES = (-8, 8)
PROBE_PER_DECADE = 64
PASS_MARGIN = 1e-3
FAIL_MARGIN = 1e-1
NU0_CANDIDATES = (1.1, 1.5, 2.0, 3.0)


def _probe_grid():
    lo, hi = PROBE_DECADES
    return np.logspace(lo, hi, (hi - lo) * PROBE_PER_DECADE + 1)


def _decade_maxima(s, r, toward):
    lo, hi = PROBE_DECADES
    if toward == "inf":
        edges = [(10.0 ** (hi - 3 + j), 10.0 ** (hi - 2 + j)) for j in range(3)]
    else:
        edges = [(10.0 ** (lo + 2 - j), 10.0 ** (lo + 3 - j)) for j in range(3)]
    return [float(np.max(r[(s >= a) & (s <= b)])) for a, b in edges]


def _aitken(m1, m2, m3):
    d1, d2 = m2 - m1, m3 - m2
    denom = d2 - d1
    if denom == 0.0:
        return m3
    return m3 - d2 * d2 / denom


def _limit_verdict(s, r, toward):
    """Three-valued verdict for lim r(s) = 0 as s -> inf (or 0+).

    Uses the maxima m1, m2, m3 of r over the three decades closest to the
    limit point.  Pass: the last two decades sit below 1e-3 without growing,
    or the maxima decrease strictly and their Aitken extrapolation lies well
    under the last maximum (decay to zero, even logarithmic).  Fail: above
    1e-1 with no such decay.
    """
    r = np.where(np.isfinite(r), r, np.inf)
    m1, m2, m3 = _decade_maxima(s, r, toward)
    tail = max(m2, m3)
    data = {"decade_maxima": [m1, m2, m3], "tail_max": tail}
    if not math.isfinite(tail):
        return Verdict(FAIL, data)
    strictly = m1 > m2 > m3
    limit = _aitken(m1, m2, m3) if strictly else m3
    data["extrapolated_limit"] = limit
    if tail < PASS_MARGIN and m1 >= m2 >= m3:
        return Verdict(PASS, data)
    if strictly and limit < 0.75 * m3:
        return Verdict(PASS, data)
    if tail > FAIL_MARGIN and (not strictly or limit > FAIL_MARGIN):
        return Verdict(FAIL, data)
    return Verdict(INCONCLUSIVE, data)


def _combine(verdicts):
    statuses = [v.status for v in verdicts]
    if FAIL in statuses:
        return FAIL
    if all(st == PASS for st in statuses):
        return PASS
    return INCONCLUSIVE


def _absmax_both_signs(fk, s):
    with np.errstate(all="ignore"):
        return np.maximum(np.abs(fk.values(s)), np.abs(fk.values(-s)))


def probe_hypotheses(F, lambda1):
    """Sample each f_k on a log grid over 1e-8 <= |s| <= 1e8 and report
    three-valued verdicts for h1, h1*, h2, h2' and g3.  Diagnostics only."""
    s = _probe_grid()
    h1, h2p, h1s, g3 = [], [], [], []
    h2_by_nu = {nu: [] for nu in NU0_CANDIDATES}
    seen = {}
    for fk in F.components:
        if id(fk) in seen:
            res = seen[id(fk)]
        else:
            res = _probe_component(fk, s, lambda1)
            seen[id(fk)] = res
        h1.append(res["h1"])
        h2p.append(res["h2_prime"])
        h1s.append(res["h1_star"])
        g3.append(res["g3"])
        for nu in NU0_CANDIDATES:
            h2_by_nu[nu].append(res["h2"][nu])

    per_nu = {nu: _combine(v) for nu, v in h2_by_nu.items()}
    passing = [nu for nu in NU0_CANDIDATES if per_nu[nu] == PASS]
    if passing:
        h2_status = PASS
    elif all(st == FAIL for st in per_nu.values()):
        h2_status = FAIL
    else:
        h2_status = INCONCLUSIVE
    h2 = Verdict(h2_status, {"nu0": passing[0] if passing else None,
                             "by_nu0": {repr(nu): st for nu, st in per_nu.items()}})

    qs = [v.data.get("q") for v in h1s]
    cs = [v.data.get("c") for v in h1s]
    q = max(qs) if all(x is not None for x in qs) else None
    h1_star = Verdict(_combine(h1s), {"q": q, "c": max(cs) if q is not None else None})

    ests = [v.data["estimate"] for v in g3]
    g3v = Verdict(_combine(g3), {"estimate": max(ests), "bound": lambda1 / 2.0})

    return HypothesisVerdict(
        h1=Verdict(_combine(h1), {"components": [v.data for v in h1]}),
        h1_star=h1_star,
        h2=h2,
        h2_prime=Verdict(_combine(h2p), {"components": [v.data for v in h2p]}),
        g3=g3v,
    )


def _probe_component(fk, s, lambda1):
    fa = _absmax_both_signs(fk, s)
    with np.errstate(all="ignore"):
        ratio1 = fa / s
    out = {"h1": _limit_verdict(s, ratio1, "inf"), "h2_prime": _limit_verdict(s, ratio1, "zero")}
    out["h2"] = {}
    for nu in NU0_CANDIDATES:
        with np.errstate(all="ignore"):
            out["h2"][nu] = _limit_verdict(s, fa / s ** nu, "zero")

    # h1*: growth exponent from the top two decades
    top = s >= 10.0 ** (PROBE_DECADES[1] - 2)
    with np.errstate(all="ignore"):
        logf = np.log(fa[top])
    if np.all(np.isfinite(logf)):
        slope = float(np.polyfit(np.log(s[top]), logf, 1)[0])
    else:
        slope = math.nan
    q = min(max(slope, 1e-3), 1.0) if math.isfinite(slope) else None
    if q is None:
        out["h1_star"] = Verdict(INCONCLUSIVE, {"q": None, "c": None, "slope": slope})
    else:
        f0 = abs(float(fk(0.0)))
        with np.errstate(all="ignore"):
            c = float(np.max(fa / s ** q)) if f0 == 0.0 else math.inf
        if slope >= 0.98:
            status = FAIL
        elif math.isfinite(c) and q < 0.98:
            status = PASS
        else:
            status = INCONCLUSIVE
        out["h1_star"] = Verdict(status, {"q": q, "c": c, "slope": slope})

    # g3: limsup F(xi)/xi^2 over the top two decades, both signs
    hi = PROBE_DECADES[1]
    xs = np.logspace(hi - 2, hi, 17)
    ests = []
    try:
        for x in np.concatenate([xs, -xs]):
            Fx = primitive_value(fk, x, tol=1e-10 * x * x, max_intervals=2 ** 16)
            ests.append(Fx / (x * x))
    except QuadratureBudgetExceeded:
        ests.append(math.nan)
    est = max(ests)
    bound = lambda1 / 2.0
    if not math.isfinite(est):
        st = INCONCLUSIVE
    elif est < 0.9 * bound:
        st = PASS
    elif est > 1.1 * bound:
        st = FAIL
    else:
        st = INCONCLUSIVE
    out["g3"] = Verdict(st, {"estimate": est, "bound": bound})
    return out
