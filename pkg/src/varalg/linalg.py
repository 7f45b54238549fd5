"""Dense symmetric linear algebra for small systems."""
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from varalg import _kernels
from varalg.errors import DimensionMismatch, NotPositiveDefinite, NotSymmetric

SYMMETRY_RTOL = 1e-9
PD_RTOL = 1e-12


def jacobi_eigh(a, tol=1e-14, max_sweeps=60):
    """Full spectrum of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with ``w`` ascending and ``V[:, k]`` the eigenvector
    of ``w[k]``.
    """
    w, V, _ = _kernels.jacobi_eigh(np.asarray(a, dtype=np.float64), tol, max_sweeps)
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


@dataclass(frozen=True, eq=False)
class SpdMatrix:
    """Immutable symmetric positive definite matrix with cached spectrum."""

    entries: np.ndarray
    spectrum: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    ones_form: float

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def lambda1(self):
        return float(self.spectrum[0])

    @property
    def lambda_n(self):
        return float(self.spectrum[-1])

    def quad(self, u):
        u = np.asarray(u, dtype=np.float64)
        return float(u @ self.entries @ u)

    def __matmul__(self, other):
        return self.entries @ other

    def scaled(self, c):
        return make_spd(c * self.entries)

    def to_list(self):
        return self.entries.tolist()


def ones_form_of(a):
    """1^t A 1 computed as Tr(A) + 2 * sum_{i<j} a_ij."""
    a = np.asarray(a, dtype=np.float64)
    return float(np.trace(a) + 2.0 * np.sum(np.triu(a, k=1)))


def make_spd(raw):
    a = np.array(raw, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionMismatch("matrix must be square and nonempty, got shape %s" % (a.shape,))
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = float(np.max(np.abs(a)))
    asym = float(np.max(np.abs(a - a.T)))
    if asym > SYMMETRY_RTOL * scale:
        raise NotSymmetric("max |a_ij - a_ji| = %.3e exceeds %.1e * max|a|" % (asym, SYMMETRY_RTOL))
    a = 0.5 * (a + a.T)
    a.setflags(write=False)
    w, V = jacobi_eigh(a)
    if not w[0] > PD_RTOL * w[-1] or w[-1] <= 0:
        raise NotPositiveDefinite(
            "smallest eigenvalue %.6g is not positive (largest %.6g)" % (w[0], w[-1]), lambda1=float(w[0])
        )
    w.setflags(write=False)
    V.setflags(write=False)
    return SpdMatrix(entries=a, spectrum=w, eigenvectors=V, ones_form=ones_form_of(a))


class NormBounds(NamedTuple):
    lower_ok: bool
    upper_ok: bool
    infnorm_ok: bool


def verify_norm_bounds(A, u):
    """Check lambda_1 |u|^2 <= u'Au <= lambda_n |u|^2 and
    |u|_inf <= sqrt(u'Au / lambda_1), each with slack 1e-10 (1 + |u'Au|)."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (A.n,):
        raise DimensionMismatch("vector has shape %s, matrix is %d x %d" % (u.shape, A.n, A.n))
    q = A.quad(u)
    slack = 1e-10 * (1.0 + abs(q))
    nrm2 = float(u @ u)
    lower_ok = A.lambda1 * nrm2 <= q + slack
    upper_ok = q <= A.lambda_n * nrm2 + slack
    infnorm_ok = float(np.max(np.abs(u))) <= np.sqrt(max(q, 0.0) / A.lambda1) + slack
    return NormBounds(bool(lower_ok), bool(upper_ok), bool(infnorm_ok))


@dataclass(frozen=True)
class SignConditionVerdict:
    a1_holds: bool
    a2_holds: bool
    a2_witnesses: dict  # row i (1-based) -> first j < i with a_ij < 0


def check_sign_conditions(A):
    a = A.entries if isinstance(A, SpdMatrix) else np.asarray(A, dtype=np.float64)
    n = a.shape[0]
    off = a[~np.eye(n, dtype=bool)]
    a1 = bool(np.all(off <= 0.0))
    witnesses = {}
    for i in range(1, n):
        neg = np.flatnonzero(a[i, :i] < 0.0)
        if neg.size:
            witnesses[i + 1] = int(neg[0]) + 1
    a2 = a1 and len(witnesses) == n - 1
    return SignConditionVerdict(a1_holds=a1, a2_holds=a2, a2_witnesses=witnesses)


def solve_spd(A, b):
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != A.n:
        raise DimensionMismatch("rhs has length %d, matrix is %d x %d" % (b.shape[0], A.n, A.n))
    return cho_solve(cho_factor(A.entries), b)
