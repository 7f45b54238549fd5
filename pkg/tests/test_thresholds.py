import math
import warnings

import pytest

from varalg.errors import InfeasibleG1, InfeasibleG2, NonpositiveSup
from varalg.nonlin import catalog_make
from varalg.oracle import dense_rho_scan
from varalg.problems import build_generic, build_tridiagonal
from varalg.thresholds import (
    analyze,
    eta,
    lambda_star,
    max_rho,
    sublevel_ratio_scan,
    abar_threshold,
    three_solution_report,
)


def test_rational_sq_lambda_star_against_dense_scan():
    p = build_tridiagonal(2, -1.0, 2.0, catalog_make("rational_sq", {"n": 2}))
    t_ref, rho_ref = dense_rho_scan(p)
    res = max_rho(p)
    assert res.rho_max == pytest.approx(rho_ref, rel=1e-4)
    assert res.t_star == pytest.approx(t_ref, rel=1e-2)
    assert lambda_star(p) == pytest.approx(p.matrix.ones_form / (2.0 * rho_ref), rel=1e-4)


def test_scalar_lambda_star_closed_form():
    # n=1, A=(2): lambda* = 1 / max (t - atan t)/t^2
    p = build_generic([[2.0]], catalog_make("rational_sq", {"n": 1}))
    t, rho = dense_rho_scan(p)
    assert lambda_star(p) == pytest.approx(1.0 / rho, rel=1e-6)


def test_nonpositive_sup():
    p = build_generic([[1.0]], catalog_make("zero", {"n": 1}))
    with pytest.raises(NonpositiveSup):
        max_rho(p)
    rep = analyze(p, probe=False)
    assert rep.lambda_star is None and any("NonpositiveSup" in n for n in rep.notes)


def test_three_solution_thresholds(ex37):
    rep = three_solution_report(ex37, 2.0, 3.0, 3.0)
    assert rep.g1_holds and rep.g2_holds
    assert rep.lambda1_star == pytest.approx(0.5)
    assert rep.lambda2_star == math.inf
    assert rep.lambda3h_star == pytest.approx(1.5)
    assert rep.eta == pytest.approx(eta(1.0, 2.0, 2.0, 3.0)) == pytest.approx(4.0 / 22.0)


@pytest.mark.parametrize("h", [1.5, 2.0, 7.0])
def test_third_threshold_scales_with_h(ex37, h):
    assert three_solution_report(ex37, 2.0, 3.0, h, probe=False).lambda3h_star == pytest.approx(0.5 * h)


def test_three_solution_infeasible(ex37):
    with pytest.raises(InfeasibleG1) as g1:
        three_solution_report(ex37, 2.0, 1.0, 2.0, probe=False)
    assert g1.value.margin < 0 and g1.value.report.g1_holds is False
    with pytest.raises(InfeasibleG2):
        three_solution_report(ex37, 3.0, 3.0, 2.0, probe=False)


def test_abar_exceeds_lambda_star(ex42):
    ls = lambda_star(ex42)
    assert abar_threshold(ex42, 0.5) > ls
    assert abar_threshold(ex42, 0.9) > abar_threshold(ex42, 0.1)


def test_ratio_scan_warns_without_hypotheses():
    p = build_generic([[2.0]], catalog_make("linear", {"n": 1}))
    with pytest.warns(RuntimeWarning):
        sublevel_ratio_scan(p, 2)


def test_report_serializes(ex42):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        d = analyze(ex42, epsilon=0.5).to_dict()
    assert d["lambda_star"] == pytest.approx(2.640398, rel=1e-5)
    assert d["hypothesis_verdicts"]["h1"]["status"] == "pass"
