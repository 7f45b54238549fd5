"""Pure-Python/numpy reference versions of the hot kernels.

These are always importable; ``varalg._kernels`` prefers the compiled
``_ckernels`` module when it has been built.
"""
import itertools
import math

import numpy as np


def jacobi_eigh(a, tol=1e-14, max_sweeps=60):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns ``(w, V, sweeps)`` with unsorted eigenvalues ``w`` and the
    accumulated rotations ``V`` (columns are eigenvectors).  Sweeps stop once
    the off-diagonal Frobenius norm drops below ``tol * ||A||_F``.
    """
    A = np.array(a, dtype=np.float64, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    fro = math.sqrt(float(np.sum(A * A)))
    if n < 2 or fro == 0.0:
        return np.diag(A).copy(), V, 0
    target = tol * fro
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(1.0 + theta * theta))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q]
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :]
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = 0.0
                A[q, p] = 0.0
                v_p = V[:, p].copy()
                v_q = V[:, q]
                V[:, p] = c * v_p - s * v_q
                V[:, q] = s * v_p + c * v_q
        off = math.sqrt(max(float(np.sum(A * A) - np.sum(np.diag(A) ** 2)), 0.0))
        if off < target:
            break
    return np.diag(A).copy(), V, sweeps


def grid_local_minima(values, threshold):
    """Flat indices of grid points that are <= every in-bounds neighbour
    (full 3**d - 1 stencil) and below ``threshold``."""
    vals = np.asarray(values, dtype=np.float64)
    vals = np.where(np.isnan(vals), np.inf, vals)
    d = vals.ndim
    padded = np.pad(vals, 1, mode="constant", constant_values=np.inf)
    mask = vals < threshold
    for offset in itertools.product((-1, 0, 1), repeat=d):
        if not any(offset):
            continue
        shifted = tuple(slice(1 + o, padded.shape[i] - 1 + o) for i, o in enumerate(offset))
        mask &= vals <= padded[shifted]
    return np.flatnonzero(mask)
