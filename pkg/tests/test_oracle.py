import math

import numpy as np
import pytest

from varalg.errors import BudgetExceeded
from varalg.nonlin import catalog_make, primitive_value
from varalg.oracle import GridSpec, grid_critical_points, hausdorff, reference_primitive


def test_budget_caps():
    GridSpec(1.0, 401).check_budget(2)
    with pytest.raises(BudgetExceeded):
        GridSpec(1.0, 402).check_budget(2)
    with pytest.raises(BudgetExceeded):
        GridSpec(1.0, 102).check_budget(3)
    with pytest.raises(BudgetExceeded):
        GridSpec(1.0, 60).check_budget(4)


@pytest.mark.parametrize("name,params", [("rational_sq", {}), ("ex42_logistic_log", {}), ("ex37_sqrt", {}),
                                         ("power", {"q": 0.5})])
def test_quadratures_agree(name, params):
    f = catalog_make(name, dict(params, n=1))[0]
    g = catalog_make("expr", {"expr": "s^2/(1+s^2)", "n": 1})[0] if name == "rational_sq" else f
    for t in np.linspace(-10.0, 10.0, 9):
        assert abs(reference_primitive(g.eval, t, breakpoints=g.kinks) - primitive_value(g, t)) < 1e-8


def test_scalar_grid(scalar_rational):
    pts = grid_critical_points(scalar_rational, 5.0, GridSpec(3.0, 3001))
    assert sorted(float(p.u[0]) for p in pts) == pytest.approx([0.0, 0.5, 2.0], abs=1e-10)
    saddle = [p for p in pts if abs(p.u[0] - 0.5) < 1e-6][0]
    assert saddle.classification == "saddle"
    assert saddle.energy == pytest.approx(2.0 * 0.25 / 2.0 - 5.0 * (0.5 - math.atan(0.5)), abs=1e-10)


def test_hausdorff():
    a = [np.array([0.0, 0.0]), np.array([1.0, 0.0])]
    b = [np.array([0.0, 0.0])]
    assert hausdorff(a, b) == 1.0
    assert hausdorff(a, a) == 0.0
    assert hausdorff([], []) == 0.0
    assert hausdorff(a, []) == math.inf
