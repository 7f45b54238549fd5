# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_pykernels``.

Same signatures and results; see that module for the contracts.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt, isnan, INFINITY

cnp.import_array()


def jacobi_eigh(a, double tol=1e-14, int max_sweeps=60):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A_arr = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = A_arr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] V_arr = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] A = A_arr
    cdef double[:, ::1] V = V_arr
    cdef Py_ssize_t p, q, k
    cdef double fro = 0.0, off, target, apq, theta, t, c, s, x, y
    cdef int sweeps = 0

    for p in range(n):
        for q in range(n):
            fro += A[p, q] * A[p, q]
    fro = sqrt(fro)
    if n < 2 or fro == 0.0:
        return np.diag(A_arr).copy(), V_arr, 0
    target = tol * fro

    for sweeps in range(1, max_sweeps + 1):
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 / (fabs(theta) + sqrt(1.0 + theta * theta))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    x = A[k, p]
                    y = A[k, q]
                    A[k, p] = c * x - s * y
                    A[k, q] = s * x + c * y
                for k in range(n):
                    x = A[p, k]
                    y = A[q, k]
                    A[p, k] = c * x - s * y
                    A[q, k] = s * x + c * y
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    x = V[k, p]
                    y = V[k, q]
                    V[k, p] = c * x - s * y
                    V[k, q] = s * x + c * y
        off = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off += A[p, q] * A[p, q]
        if sqrt(off) < target:
            break
    return np.diag(A_arr).copy(), V_arr, sweeps


cdef inline double _clean(double v):
    if isnan(v):
        return INFINITY
    return v


def grid_local_minima(values, double threshold):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = np.ascontiguousarray(values, dtype=np.float64).ravel()
    cdef tuple shape = np.shape(values)
    cdef int d = len(shape)
    if d < 1 or d > 3:
        raise ValueError("grid_local_minima supports 1 to 3 dimensions")
    cdef Py_ssize_t n0 = shape[0]
    cdef Py_ssize_t n1 = shape[1] if d > 1 else 1
    cdef Py_ssize_t n2 = shape[2] if d > 2 else 1
    cdef double[::1] v = flat
    cdef Py_ssize_t i, j, k, di, dj, dk, ii, jj, kk
    cdef Py_ssize_t r1 = 1 if d > 1 else 0
    cdef Py_ssize_t r2 = 1 if d > 2 else 0
    cdef double val
    cdef bint ok
    out = []
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                val = _clean(v[(i * n1 + j) * n2 + k])
                if not val < threshold:
                    continue
                ok = True
                for di in range(-1, 2):
                    ii = i + di
                    if ii < 0 or ii >= n0:
                        continue
                    for dj in range(-r1, r1 + 1):
                        jj = j + dj
                        if jj < 0 or jj >= n1:
                            continue
                        for dk in range(-r2, r2 + 1):
                            kk = k + dk
                            if kk < 0 or kk >= n2:
                                continue
                            if di == 0 and dj == 0 and dk == 0:
                                continue
                            if val > _clean(v[(ii * n1 + jj) * n2 + kk]):
                                ok = False
                                break
                        if not ok:
                            break
                    if not ok:
                        break
                if ok:
                    out.append((i * n1 + j) * n2 + k)
    return np.asarray(out, dtype=np.intp)
