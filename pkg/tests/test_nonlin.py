import math

import numpy as np
import pytest

from varalg.errors import BadParams, UnknownCatalogName
from varalg.nonlin import (
    CATALOG,
    FAIL,
    PASS,
    LargeDerivative,
    catalog_make,
    derivative_value,
    primitive_array,
    primitive_value,
    probe_hypotheses,
)
from varalg.numerics import adaptive_simpson

CLOSED = [
    ("rational_sq", {}),
    ("ex42_logistic_log", {}),
    ("ex37_sqrt", {}),
    ("power", {"q": 0.5}),
    ("power", {"q": 0.3, "mode": "positive"}),
    ("linear", {"c": 2.5}),
]


@pytest.mark.parametrize("name,params", CLOSED)
def test_closed_primitives_match_quadrature(name, params):
    nl = catalog_make(name, dict(params, n=2))
    for f in nl.components:
        for t in (-7.3, -1.0, 0.4, 2.0, 3.7, 12.0):
            quad = adaptive_simpson(f, 0.0, t, tol=1e-12, breakpoints=f.kinks)
            assert float(f.primitive(t)) == pytest.approx(quad, abs=1e-8 * (1 + abs(quad)))


def test_primitive_without_closed_form():
    f = catalog_make("expr", {"expr": "s^2/(1+s^2)", "n": 1})[0]
    for t in (-3.0, 0.0, 0.5, 2.0):
        assert primitive_value(f, t) == pytest.approx(t - math.atan(t), abs=1e-10)
    ts = np.array([-2.0, 0.0, 1.0, 4.0])
    assert np.allclose(primitive_array(f, ts), ts - np.arctan(ts), atol=1e-10)


def test_ex41_components():
    nl = catalog_make("ex41_log", {"n": 3})
    g2 = nl[1]
    assert g2(-2.0) == pytest.approx(-8.0)
    assert g2(math.e) == pytest.approx(2.0 * math.e)
    assert g2(100.0) == pytest.approx(2.0 / math.e)
    assert not nl.validated


def test_derivatives():
    f = catalog_make("rational_sq", {"n": 1})[0]
    assert derivative_value(f, 0.5) == pytest.approx(0.64)
    g = catalog_make("ex37_sqrt", {"n": 1})[0]
    assert derivative_value(g, 2.0) is LargeDerivative
    h = catalog_make("expr", {"expr": "piece{ s < 0 => 0, else => sqrt(s) }", "n": 1})[0]
    assert derivative_value(h, 0.0) is LargeDerivative
    k = catalog_make("expr", {"expr": "s^3", "n": 1})[0]
    assert derivative_value(k, 2.0) == pytest.approx(12.0, rel=1e-8)


def test_catalog_errors():
    with pytest.raises(UnknownCatalogName):
        catalog_make("nope", {"n": 1})
    with pytest.raises(BadParams):
        catalog_make("rational_sq", {})
    with pytest.raises(BadParams):
        catalog_make("power", {"n": 1, "q": -1})
    with pytest.raises(BadParams):
        catalog_make("expr", {"n": 2, "per_component": ["s"]})
    assert set(CATALOG) >= {"ex37_sqrt", "ex41_log", "ex42_logistic_log", "power", "rational_sq", "custom_expr"}


def test_scaled_and_batch_values():
    nl = catalog_make("rational_sq", {"n": 2, "scale": 3.0})
    U = np.array([[1.0, 0.0], [2.0, -1.0]])
    assert np.allclose(nl.values(U), 3.0 * U ** 2 / (1 + U ** 2))
    assert np.allclose(nl.primitives(U), 3.0 * (U - np.arctan(U)))


def test_probe_rational_sq():
    v = probe_hypotheses(catalog_make("rational_sq", {"n": 1}), 2.0)
    assert (v.h1.status, v.h2.status, v.h2_prime.status, v.g3.status) == (PASS, PASS, PASS, PASS)


def test_probe_linear_fails():
    v = probe_hypotheses(catalog_make("linear", {"n": 1}), 1.0)
    assert v.h1.status == FAIL and v.h2_prime.status == FAIL


@pytest.mark.parametrize("q", [0.1, 0.5, 0.9])
def test_probe_power_q(q):
    v = probe_hypotheses(catalog_make("power", {"n": 1, "q": q}), 1.0)
    assert v.h1.status == PASS
    assert v.h1_star.status == PASS
    assert v.h1_star.data["q"] == pytest.approx(q, abs=1e-6)


def test_probe_ex41_sublinear_positive_side():
    v = probe_hypotheses(catalog_make("ex41_log", {"n": 2}), 1.0)
    assert v.h2_prime.status == PASS
    assert v.h2.status == FAIL


def test_primitive_additive():
    f = catalog_make("expr", {"expr": "piece{ s < 1 => s, else => sqrt(s) }", "n": 1})[0]
    whole = primitive_value(f, 4.0)
    split = primitive_value(f, 1.5) + adaptive_simpson(f, 1.5, 4.0, tol=1e-12)
    assert whole == pytest.approx(split, abs=1e-9)
    assert whole == pytest.approx(0.5 + (2.0 / 3.0) * (8.0 - 1.0), abs=1e-9)


def test_ex41_primitive_is_finite_across_guard_band():
    f = catalog_make("ex41_log", {"n": 2})[1]
    assert math.isfinite(primitive_value(f, 10.0))
