import numpy as np
import pytest

from varalg import _kernels, _pykernels

BACKENDS = sorted(_kernels.available_backends().items())


def test_selected_backend_is_known():
    assert _kernels.BACKEND in ("cython", "python")
    assert "python" in dict(BACKENDS)


@pytest.mark.parametrize("name,mod", BACKENDS)
@pytest.mark.parametrize("n", [1, 2, 5, 17, 40])
def test_jacobi_matches_lapack(name, mod, n):
    rng = np.random.default_rng(n)
    M = rng.standard_normal((n, n))
    A = M + M.T
    w, V, sweeps = mod.jacobi_eigh(A.copy())
    order = np.argsort(w)
    assert np.allclose(np.sort(w), np.linalg.eigvalsh(A), atol=1e-11 * max(1.0, np.abs(A).max()))
    V = V[:, order]
    assert np.allclose(V.T @ V, np.eye(n), atol=1e-12)
    assert np.allclose(A @ V, V * np.sort(w), atol=1e-10)


@pytest.mark.parametrize("shape", [(50,), (30, 40), (9, 11, 13)])
def test_grid_minima_backends_agree(shape):
    rng = np.random.default_rng(len(shape))
    values = rng.random(shape)
    values.flat[::7] = np.nan
    ref = np.sort(_pykernels.grid_local_minima(values, 0.5))
    for _, mod in BACKENDS:
        got = np.sort(np.asarray(mod.grid_local_minima(values, 0.5)))
        assert np.array_equal(got, ref)


def test_grid_minima_finds_wells():
    x = np.linspace(-2, 2, 81)
    X, Y = np.meshgrid(x, x, indexing="ij")
    vals = np.minimum((X - 1) ** 2 + Y ** 2, (X + 1) ** 2 + (Y - 0.5) ** 2)
    for _, mod in BACKENDS:
        idx = np.asarray(mod.grid_local_minima(vals, 0.1))
        pts = sorted((round(X.flat[i], 6), round(Y.flat[i], 6)) for i in idx)
        assert pts == [(-1.0, 0.5), (1.0, 0.0)]


def test_pure_python_fallback_selected_by_env():
    import os
    import subprocess
    import sys

    code = (
        "from varalg import _kernels; from varalg.linalg import make_spd;"
        "print(_kernels.BACKEND, round(make_spd([[2.0, -1.0], [-1.0, 2.0]]).lambda1, 12))"
    )
    env = dict(os.environ, VARALG_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "1.0"]
