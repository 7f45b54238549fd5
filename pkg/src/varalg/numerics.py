"""Small 1-D numerical building blocks: adaptive Simpson quadrature and
golden-section maximization."""
import math

from varalg.errors import QuadratureBudgetExceeded

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def adaptive_simpson(f, a, b, tol=1e-10, max_intervals=2 ** 20, breakpoints=()):
    """Integrate ``f`` over [a, b] by adaptive Simpson with Richardson
    correction.

    ``breakpoints`` inside (a, b) are used as forced panel edges, which helps
    with piecewise integrands.  Raises QuadratureBudgetExceeded when more than
    ``max_intervals`` subintervals would be needed.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0
    lo, hi = a, b
    edges = [lo] + sorted(x for x in breakpoints if lo < x < hi) + [hi]
    total = 0.0
    used = 0
    for x0, x1 in zip(edges[:-1], edges[1:]):
        fa, fm, fb = f(x0), f(0.5 * (x0 + x1)), f(x1)
        whole = (x1 - x0) / 6.0 * (fa + 4.0 * fm + fb)
        # equal shares: width-proportional shares starve short segments
        seg_tol = tol / (len(edges) - 1)
        stack = [(x0, x1, fa, fm, fb, whole, seg_tol, 0)]
        while stack:
            l, r, fl, fmid, fr, s_whole, eps, depth = stack.pop()
            m = 0.5 * (l + r)
            lm, rm = 0.5 * (l + m), 0.5 * (m + r)
            flm, frm = f(lm), f(rm)
            left = (m - l) / 6.0 * (fl + 4.0 * flm + fmid)
            right = (r - m) / 6.0 * (fmid + 4.0 * frm + fr)
            delta = left + right - s_whole
            # depth cap guards against non-integrable spikes; the budget is the real limit
            if abs(delta) <= 15.0 * eps or depth >= 60 or m <= l or m >= r:
                total += left + right + delta / 15.0
                used += 1
                continue
            if used + len(stack) + 2 > max_intervals:
                raise QuadratureBudgetExceeded(
                    "adaptive Simpson needs more than %d subintervals on [%g, %g]" % (max_intervals, a, b)
                )
            stack.append((m, r, fmid, frm, fr, right, 0.5 * eps, depth + 1))
            stack.append((l, m, fl, flm, fmid, left, 0.5 * eps, depth + 1))
    if not math.isfinite(total):
        raise QuadratureBudgetExceeded("non-finite integrand on [%g, %g]" % (a, b))
    return sign * total


def golden_max(fn, a, b, rtol=1e-10, atol=1e-300, max_iter=500):
    """Golden-section search for a maximizer of ``fn`` on [a, b].

    Returns ``(x, fn(x))``.  Stops when the bracket width is below
    ``rtol * max(|a|, |b|) + atol``.
    """
    if b < a:
        a, b = b, a
    c = a + INV_PHI2 * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a <= rtol * max(abs(a), abs(b)) + atol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = a + INV_PHI2 * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
    if fc >= fd:
        return c, fc
    return d, fd
