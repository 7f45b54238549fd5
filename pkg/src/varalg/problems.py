"""Problem assembly: generic (A, f) pairs, second-order tridiagonal,
fourth-order pentadiagonal and discrete-Laplacian lattice problems."""
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from varalg.errors import DimensionMismatch, Disconnected, EmptyNet, NotPositiveDefinite
from varalg.linalg import SpdMatrix, check_sign_conditions, make_spd

TRID_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Problem:
    """The system A u = lambda f(u) without a fixed lambda."""

    matrix: SpdMatrix
    nonlinearity: object  # varalg.nonlin.Nonlinearity
    origin: Tuple = ("generic",)
    labels: Tuple = ()
    net: Optional["Net"] = None

    def __post_init__(self):
        if self.matrix.n != self.nonlinearity.n:
            raise DimensionMismatch(
                "matrix is %d x %d but the nonlinearity has %d components"
                % (self.matrix.n, self.matrix.n, self.nonlinearity.n)
            )
        if not self.labels:
            object.__setattr__(self, "labels", tuple("k=%d" % (k + 1) for k in range(self.n)))

    @property
    def n(self):
        return self.matrix.n

    @property
    def A(self):
        return self.matrix.entries

    def with_nonlinearity(self, f):
        return Problem(self.matrix, f, self.origin, self.labels, self.net)

    def scaled(self, matrix_factor=1.0, f_factor=1.0):
        """(cA, d f) variant, used by the homogeneity checks."""
        mat = self.matrix if matrix_factor == 1.0 else self.matrix.scaled(matrix_factor)
        f = self.nonlinearity if f_factor == 1.0 else self.nonlinearity.scaled(f_factor)
        return Problem(mat, f, ("generic",), self.labels, self.net)


def build_generic(matrix, f):
    mat = matrix if isinstance(matrix, SpdMatrix) else make_spd(matrix)
    return Problem(mat, f, ("generic",))


# ---------------------------------------------------------------- 1-D problems

def tridiagonal_matrix(n, a, b):
    return np.diag(np.full(n, float(b))) + np.diag(np.full(n - 1, float(a)), 1) + np.diag(np.full(n - 1, float(a)), -1)


def build_tridiagonal(n, a, b, f):
    """Trid_n(a, b, a) with a < 0 < b; positive definite exactly when
    cos(pi/(n+1)) < -b/(2a)."""
    n = int(n)
    if n < 2:
        raise ValueError("tridiagonal problems need n >= 2")
    if not (a < 0 < b):
        raise ValueError("need a < 0 < b, got a=%r, b=%r" % (a, b))
    lam1 = b + 2.0 * a * math.cos(math.pi / (n + 1))
    if not math.cos(math.pi / (n + 1)) < -b / (2.0 * a):
        raise NotPositiveDefinite(
            "cos(pi/(n+1)) = %.6f >= -b/(2a) = %.6f; first eigenvalue %.6g" % (
                math.cos(math.pi / (n + 1)), -b / (2.0 * a), lam1),
            lambda1=lam1,
        )
    mat = make_spd(tridiagonal_matrix(n, a, b))
    if abs(mat.lambda1 - lam1) > TRID_TOL * max(1.0, abs(lam1)):
        raise AssertionError("Jacobi lambda_1 %.17g disagrees with closed form %.17g" % (mat.lambda1, lam1))
    return Problem(mat, f, ("second_order", n, float(a), float(b)))


def fourth_order_matrix(n):
    """Matrix of Delta^4 u_{k-2} with u_{-2..0} = u_{n+1..n+3} = 0 removed.

    The zero boundary values drop the stencil entries that fall outside
    1..n, leaving the pentadiagonal (1, -4, 6, -4, 1) band.
    """
    A = np.zeros((n, n))
    for k in range(n):
        for off, w in ((-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)):
            j = k + off
            if 0 <= j < n:
                A[k, j] = w
    return A


def build_fourth_order(n, f):
    n = int(n)
    if n < 1:
        raise ValueError("fourth-order problems need n >= 1")
    A = fourth_order_matrix(n)
    mat = make_spd(A)
    rng = np.random.default_rng(n)
    u = rng.standard_normal(n)
    if np.max(np.abs(A @ u - fourth_difference(u))) > 1e-12 * (1.0 + np.max(np.abs(u))):
        raise AssertionError("fourth-order matrix does not reproduce the difference stencil")
    return Problem(mat, f, ("fourth_order", n))


def fourth_difference(u):
    """(Delta^4 u)_{k-2} for k = 1..n on the zero-padded sequence."""
    u = np.asarray(u, dtype=np.float64)
    n = u.shape[0]
    pad = np.concatenate([np.zeros(3), u, np.zeros(3)])  # u_{-2}..u_{n+3}
    k = np.arange(n) + 3
    return pad[k + 2] - 4.0 * pad[k + 1] + 6.0 * pad[k] - 4.0 * pad[k - 1] + pad[k - 2]


# ---------------------------------------------------------------- lattice nets

NEIGHBOR_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


@dataclass(frozen=True, eq=False)
class Net:
    """Finite connected set of lattice points with an index bijection."""

    points: Tuple[Tuple[int, int], ...]
    index_map: dict = field(repr=False)
    boundary: frozenset = field(repr=False)

    @property
    def n(self):
        return len(self.points)

    def h(self, i, j):
        return self.index_map[(i, j)]

    def neighbors(self, z):
        i, j = z
        return [(i + di, j + dj) for di, dj in NEIGHBOR_STEPS]


def _exterior_boundary(pts):
    out = set()
    for i, j in pts:
        for di, dj in NEIGHBOR_STEPS:
            z = (i + di, j + dj)
            if z not in pts:
                out.add(z)
    return frozenset(out)


def _check_connected(pts):
    start = next(iter(pts))
    seen = {start}
    stack = [start]
    while stack:
        i, j = stack.pop()
        for di, dj in NEIGHBOR_STEPS:
            z = (i + di, j + dj)
            if z in pts and z not in seen:
                seen.add(z)
                stack.append(z)
    if len(seen) != len(pts):
        raise Disconnected("net is not connected: %d of %d points reachable" % (len(seen), len(pts)))


def make_net(points, index_map=None):
    """Net from integer points.  Default ordering is row-major over sorted
    (j, i), which reproduces h(i, j) = i + m1 (j - 1) on rectangles."""
    pts = [(int(p[0]), int(p[1])) for p in points]
    if not pts:
        raise EmptyNet("a net needs at least one point")
    pset = set(pts)
    if len(pset) != len(pts):
        raise ValueError("duplicate lattice points in net")
    _check_connected(pset)
    if index_map is None:
        ordered = sorted(pset, key=lambda z: (z[1], z[0]))
        index_map = {z: k + 1 for k, z in enumerate(ordered)}
    else:
        index_map = {(int(z[0]), int(z[1])): int(k) for z, k in dict(index_map).items()}
        if set(index_map) != pset or sorted(index_map.values()) != list(range(1, len(pset) + 1)):
            raise ValueError("index_map must be a bijection from the points onto 1..n")
        ordered = sorted(pset, key=lambda z: index_map[z])
    return Net(points=tuple(ordered), index_map=index_map, boundary=_exterior_boundary(pset))


def rectangle_net(m1, m2):
    m1, m2 = int(m1), int(m2)
    if m1 < 1 or m2 < 1:
        raise EmptyNet("rectangle dimensions must be positive")
    pts = [(i, j) for j in range(1, m2 + 1) for i in range(1, m1 + 1)]
    index_map = {(i, j): i + m1 * (j - 1) for i, j in pts}
    return make_net(pts, index_map)


def lattice_matrix(net):
    """B = -(discrete Laplacian) with zero Dirichlet data on the exterior
    boundary: 4 on the diagonal, -1 between neighbouring net points."""
    n = net.n
    B = np.zeros((n, n))
    for z in net.points:
        r = net.index_map[z] - 1
        B[r, r] = 4.0
        for w in net.neighbors(z):
            if w in net.index_map:
                B[r, net.index_map[w] - 1] = -1.0
    return B


def build_lattice(net, f):
    mat = make_spd(lattice_matrix(net))
    verdict = check_sign_conditions(mat)
    if not verdict.a1_holds:
        raise AssertionError("lattice matrix must have nonpositive off-diagonal entries")
    labels = tuple("(%d,%d)" % z for z in net.points)
    return Problem(mat, f, ("lattice", net.n), labels, net)
