import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varalg.errors import DimensionMismatch, NotPositiveDefinite, NotSymmetric
from varalg.linalg import (
    check_sign_conditions,
    jacobi_eigh,
    make_spd,
    ones_form_of,
    solve_spd,
    verify_norm_bounds,
)
from varalg.problems import fourth_order_matrix, lattice_matrix, rectangle_net, tridiagonal_matrix
from varalg.verify import random_spd


def test_make_spd_rejects_asymmetric():
    with pytest.raises(NotSymmetric):
        make_spd([[2.0, 1.0], [0.0, 2.0]])


def test_make_spd_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite) as info:
        make_spd([[1.0, 2.0], [2.0, 1.0]])
    assert info.value.lambda1 == pytest.approx(-1.0)


def test_spd_is_read_only():
    A = make_spd([[2.0, -1.0], [-1.0, 2.0]])
    with pytest.raises(ValueError):
        A.entries[0, 0] = 5.0


def test_sorted_spectrum():
    w, V = jacobi_eigh(np.diag([3.0, 1.0, 2.0]))
    assert list(w) == [1.0, 2.0, 3.0]
    assert np.allclose(np.abs(V), np.eye(3)[:, [1, 2, 0]])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2 ** 31))
def test_ones_form_identity(n, seed):
    a = random_spd(np.random.default_rng(seed), n)
    iu = np.triu_indices(n, 1)
    expected = np.trace(a) + 2.0 * a[iu].sum()
    assert ones_form_of(a) == pytest.approx(expected, rel=1e-12, abs=1e-12)
    assert make_spd(a).ones_form == pytest.approx(np.ones(n) @ a @ np.ones(n), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("n", [2, 7, 30])
def test_tridiagonal_closed_form(n):
    A = make_spd(tridiagonal_matrix(n, -1.0, 2.0))
    k = np.arange(1, n + 1)
    assert np.allclose(A.spectrum, np.sort(2.0 - 2.0 * np.cos(k * math.pi / (n + 1))), atol=1e-12)


def test_norm_bounds_and_eigenvector_equality():
    A = make_spd([[4.0, 1.0], [1.0, 3.0]])
    for v, lam in ((A.eigenvectors[:, 0], A.lambda1), (A.eigenvectors[:, 1], A.lambda_n)):
        assert A.quad(v) == pytest.approx(lam * float(v @ v), abs=1e-12)
    assert all(verify_norm_bounds(A, [1.0, -2.0]))
    with pytest.raises(DimensionMismatch):
        verify_norm_bounds(A, [1.0, 2.0, 3.0])


def test_sign_conditions():
    lat = check_sign_conditions(lattice_matrix(rectangle_net(2, 2)))
    assert lat.a1_holds and lat.a2_holds
    assert lat.a2_witnesses == {2: 1, 3: 1, 4: 2}
    four = check_sign_conditions(fourth_order_matrix(5))
    assert not four.a1_holds and not four.a2_holds
    diag = check_sign_conditions(np.eye(3))
    assert diag.a1_holds and not diag.a2_holds


def test_solve_spd():
    A = make_spd(tridiagonal_matrix(6, -1.0, 3.0))
    b = np.arange(6.0)
    assert np.allclose(A @ solve_spd(A, b), b, atol=1e-12)
