r"""Summation-by-parts (SBP) spatial operators on uniform 1D grids.

Provides four operator families sharing a common container:

* Fourier collocation (periodic, transform-based application),
* periodic central finite differences of order 2/4/6/8,
* bounded diagonal-norm FD SBP operators with homogeneous Neumann
  boundary data (orders 2/4/6),
* periodic upwind FD pairs ``(D_plus, D_minus)`` of order 2/4/6.

Every constructed set satisfies the algebraic SBP identities

    M D1 + D1^T M = t_R t_R^T - t_L t_L^T,
    M D2 = t_R d_R^T - t_L d_L^T - A2   (A2 symmetric positive semidefinite),
    M D_plus + D_minus^T M = t_R t_R^T - t_L t_L^T,

which :func:`sbp_conformance` verifies numerically on the dense
materializations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp


class OperatorConstructionError(ValueError):
    """Raised for invalid grid sizes or unsupported accuracy orders."""


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [x_left, x_right].

    For periodic grids the right endpoint is excluded (nodes[-1] =
    x_right - dx); bounded grids include both endpoints.
    """

    x_left: float
    x_right: float
    n_nodes: int
    periodic: bool
    nodes: np.ndarray
    dx: float

    @property
    def length(self) -> float:
        return self.x_right - self.x_left


def make_grid(x_left: float, x_right: float, n: int, periodic: bool) -> Grid:
    if n < 2:
        raise OperatorConstructionError(f"need at least 2 nodes, got {n}")
    if x_right <= x_left:
        raise OperatorConstructionError("x_right must exceed x_left")
    if periodic:
        dx = (x_right - x_left) / n
        nodes = x_left + dx * np.arange(n)
    else:
        dx = (x_right - x_left) / (n - 1)
        nodes = np.linspace(x_left, x_right, n)
    return Grid(x_left, x_right, n, periodic, nodes, dx)


# {{{ linear operator wrappers


class MatrixOperator:
    """Sparse-matrix-backed linear operator."""

    def __init__(self, mat: sp.spmatrix):
        self.mat = sp.csr_matrix(mat)

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return self.mat @ z

    def to_dense(self) -> np.ndarray:
        return self.mat.toarray()

    def to_sparse(self) -> sp.csr_matrix:
        return self.mat


class FourierOperator:
    """Diagonal-in-frequency operator applied through the real FFT.

    ``multiplier`` holds the per-mode factors for the rfft layout; real
    input yields real output as long as the multiplier respects the
    conjugate symmetry (purely real or purely imaginary entries).
    """

    def __init__(self, n: int, multiplier: np.ndarray):
        self.n = n
        self.multiplier = multiplier

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return np.fft.irfft(self.multiplier * np.fft.rfft(z), self.n)

    def to_dense(self) -> np.ndarray:
        # rows of self(eye) are the operator's columns
        return self(np.eye(self.n)).T

    def to_sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.to_dense())


class ComposedOperator:
    """Lazy composition A(B(z)), dense-materializable for conformance."""

    def __init__(self, outer, inner):
        self.outer = outer
        self.inner = inner

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return self.outer(self.inner(z))

    def to_dense(self) -> np.ndarray:
        return self.outer.to_dense() @ self.inner.to_dense()

    def to_sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.outer.to_sparse() @ self.inner.to_sparse())


# }}}


@dataclass(frozen=True)
class OperatorSet:
    """All operators Definitions 1-3 style SBP discretizations need.

    Immutable after construction; applications share no mutable state and
    are safe to call from multiple threads.
    """

    grid: Grid
    kind: str  # fourier | central_fd | bounded_fd_sbp | upwind_fd
    accuracy_order: int
    mass_diag: np.ndarray
    d1: object
    d2: object
    a2: object
    t_left: np.ndarray
    t_right: np.ndarray
    d_left: np.ndarray
    d_right: np.ndarray
    d_plus: object | None = None
    d_minus: object | None = None

    @property
    def n(self) -> int:
        return self.grid.n_nodes


def _zero_boundary_vectors(n: int):
    z = np.zeros(n)
    return z, z.copy(), z.copy(), z.copy()


# {{{ Fourier collocation


def make_fourier(n: int, x_left: float, x_right: float) -> OperatorSet:
    """Fourier collocation operators with M = dx*I.

    The first derivative zeroes the Nyquist mode for even n (odd-ball
    mode); the second derivative keeps the full -k^2 multiplier there, so
    d2 == d1 o d1 holds iff n is odd.
    """
    if n < 4:
        raise OperatorConstructionError(f"Fourier operators need n >= 4, got {n}")
    grid = make_grid(x_left, x_right, n, periodic=True)
    length = grid.length
    k = 2.0 * np.pi * np.arange(n // 2 + 1) / length

    d1_mult = 1j * k
    if n % 2 == 0:
        d1_mult = d1_mult.copy()
        d1_mult[-1] = 0.0
    d2_mult = -(k**2)

    d1 = FourierOperator(n, d1_mult)
    d2 = FourierOperator(n, d2_mult)
    a2 = FourierOperator(n, grid.dx * k**2)  # A2 = -M D2

    tl, tr, dl, dr = _zero_boundary_vectors(n)
    return OperatorSet(
        grid=grid,
        kind="fourier",
        accuracy_order=n,
        mass_diag=np.full(n, grid.dx),
        d1=d1,
        d2=d2,
        a2=a2,
        t_left=tl,
        t_right=tr,
        d_left=dl,
        d_right=dr,
    )


# }}}


# {{{ periodic central finite differences

_CENTRAL_D1 = {
    2: [Fraction(-1, 2), Fraction(0), Fraction(1, 2)],
    4: [Fraction(1, 12), Fraction(-2, 3), Fraction(0), Fraction(2, 3), Fraction(-1, 12)],
    6: [
        Fraction(-1, 60),
        Fraction(3, 20),
        Fraction(-3, 4),
        Fraction(0),
        Fraction(3, 4),
        Fraction(-3, 20),
        Fraction(1, 60),
    ],
    8: [
        Fraction(1, 280),
        Fraction(-4, 105),
        Fraction(1, 5),
        Fraction(-4, 5),
        Fraction(0),
        Fraction(4, 5),
        Fraction(-1, 5),
        Fraction(4, 105),
        Fraction(-1, 280),
    ],
}

_CENTRAL_D2 = {
    2: [Fraction(1), Fraction(-2), Fraction(1)],
    4: [
        Fraction(-1, 12),
        Fraction(4, 3),
        Fraction(-5, 2),
        Fraction(4, 3),
        Fraction(-1, 12),
    ],
    6: [
        Fraction(1, 90),
        Fraction(-3, 20),
        Fraction(3, 2),
        Fraction(-49, 18),
        Fraction(3, 2),
        Fraction(-3, 20),
        Fraction(1, 90),
    ],
    8: [
        Fraction(-1, 560),
        Fraction(8, 315),
        Fraction(-1, 5),
        Fraction(8, 5),
        Fraction(-205, 72),
        Fraction(8, 5),
        Fraction(-1, 5),
        Fraction(8, 315),
        Fraction(-1, 560),
    ],
}


def _circulant(n: int, offsets, coeffs, scale: float) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    idx = np.arange(n)
    for off, c in zip(offsets, coeffs):
        if c == 0:
            continue
        rows.append(idx)
        cols.append((idx + off) % n)
        vals.append(np.full(n, float(c) * scale))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )


def make_central_fd(order: int, n: int, x_left: float, x_right: float) -> OperatorSet:
    """Periodic central-difference operators with M = dx*I."""
    if order not in _CENTRAL_D1:
        raise OperatorConstructionError(f"unsupported central FD order {order}")
    if n <= 2 * order:
        raise OperatorConstructionError(f"n = {n} too small for order {order}")
    grid = make_grid(x_left, x_right, n, periodic=True)
    dx = grid.dx

    c1 = _CENTRAL_D1[order]
    half = len(c1) // 2
    offsets = range(-half, half + 1)
    d1 = MatrixOperator(_circulant(n, offsets, c1, 1.0 / dx))
    c2 = _CENTRAL_D2[order]
    d2 = MatrixOperator(_circulant(n, offsets, c2, 1.0 / dx**2))
    a2 = MatrixOperator(-dx * d2.mat)

    tl, tr, dl, dr = _zero_boundary_vectors(n)
    return OperatorSet(
        grid=grid,
        kind="central_fd",
        accuracy_order=order,
        mass_diag=np.full(n, dx),
        d1=d1,
        d2=d2,
        a2=a2,
        t_left=tl,
        t_right=tr,
        d_left=dl,
        d_right=dr,
    )


# }}}


# {{{ bounded diagonal-norm FD SBP with Neumann data

# Diagonal norm weights (units of dx) for the classical boundary closures.
_BOUNDED_NORM = {
    2: [Fraction(1, 2)],
    4: [Fraction(17, 48), Fraction(59, 48), Fraction(43, 48), Fraction(49, 48)],
    6: [
        Fraction(13649, 43200),
        Fraction(12013, 8640),
        Fraction(2711, 4320),
        Fraction(5359, 4320),
        Fraction(7877, 8640),
        Fraction(43801, 43200),
    ],
}

# Boundary blocks of Q = M D1 (dimensionless).  Rows are boundary rows,
# columns start at the boundary node.  Interior rows use the central
# stencil of the matching order.
_Q_BLOCK_4 = [
    [Fraction(-1, 2), Fraction(59, 96), Fraction(-1, 12), Fraction(-1, 32), 0, 0],
    [Fraction(-59, 96), 0, Fraction(59, 96), 0, 0, 0],
    [Fraction(1, 12), Fraction(-59, 96), 0, Fraction(59, 96), Fraction(-1, 12), 0],
    [Fraction(1, 32), 0, Fraction(-59, 96), 0, Fraction(2, 3), Fraction(-1, 12)],
]


def _q_block_6():
    # Upper triangle of the 6x6 corner block, solved from the SBP and
    # boundary-accuracy constraints with the free parameter fixed to the
    # minimum-Frobenius-norm member of the family.
    x = Fraction(26492783, 38102400)
    upper = {
        (0, 1): x - Fraction(953, 16200),
        (0, 2): Fraction(715489, 259200) - 4 * x,
        (0, 3): 6 * x - Fraction(62639, 14400),
        (0, 4): Fraction(147127, 51840) - 4 * x,
        (0, 5): x - Fraction(89387, 129600),
        (1, 2): 10 * x - Fraction(57139, 8640),
        (1, 3): Fraction(745733, 51840) - 20 * x,
        (1, 4): 15 * x - Fraction(18343, 1728),
        (1, 5): Fraction(240569, 86400) - 4 * x,
        (2, 3): 20 * x - Fraction(176839, 12960),
        (2, 4): Fraction(242111, 17280) - 20 * x,
        (2, 5): 6 * x - Fraction(182261, 43200),
        (3, 4): 10 * x - Fraction(165041, 25920),
        (3, 5): Fraction(710473, 259200) - 4 * x,
        (4, 5): x,
    }
    block = [[Fraction(0)] * 9 for _ in range(6)]
    block[0][0] = Fraction(-1, 2)
    for (i, j), val in upper.items():
        block[i][j] = val
        block[j][i] = -val
    # Columns 6..8 mirror the interior central stencil reaching in.
    cint = {1: Fraction(3, 4), 2: Fraction(-3, 20), 3: Fraction(1, 60)}
    for i in range(6):
        for j in range(6, 9):
            d = j - i
            if 1 <= d <= 3:
                block[i][j] = cint[d]
    return block


_Q_BLOCKS = {4: _Q_BLOCK_4, 6: None}  # order 6 built lazily


def _bounded_d1(order: int, n: int, dx: float, norm: np.ndarray) -> sp.csr_matrix:
    """First-derivative SBP operator D1 = M^{-1} Q."""
    if order == 2:
        q = sp.lil_matrix((n, n))
        for i in range(1, n - 1):
            q[i, i - 1] = -0.5
            q[i, i + 1] = 0.5
        q[0, 0], q[0, 1] = -0.5, 0.5
        q[n - 1, n - 2], q[n - 1, n - 1] = -0.5, 0.5
    else:
        block = _Q_BLOCKS[order]
        if block is None:
            block = _q_block_6()
            _Q_BLOCKS[order] = block
        c1 = _CENTRAL_D1[order]
        half = len(c1) // 2
        rows_b = len(block)
        q = sp.lil_matrix((n, n))
        for i in range(rows_b, n - rows_b):
            for off, c in zip(range(-half, half + 1), c1):
                if c:
                    q[i, i + off] = float(c)
        for i, row in enumerate(block):
            for j, c in enumerate(row):
                if c:
                    q[i, j] = float(c)
                    q[n - 1 - i, n - 1 - j] = -float(c)
    return sp.csr_matrix(sp.diags(1.0 / norm) @ q.tocsr())


def make_bounded_fd_sbp(
    interior_order: int, n: int, x_left: float, x_right: float
) -> OperatorSet:
    """Bounded diagonal-norm SBP operators for homogeneous Neumann data.

    interior_order=2 reproduces the lumped P1 finite element pair
    (M = dx*diag(1/2, 1, ..., 1, 1/2), tridiagonal stiffness A2) exactly.
    Orders 4 and 6 use the classical first-derivative boundary closures
    with the wide-stencil second derivative D2 = D1 D1, for which
    A2 = D1^T M D1 is symmetric positive semidefinite by construction.
    """
    if interior_order not in _BOUNDED_NORM:
        raise OperatorConstructionError(
            f"unsupported bounded SBP order {interior_order}"
        )
    if n < {2: 4, 4: 9, 6: 13}[interior_order]:
        raise OperatorConstructionError(f"n = {n} too small for order {interior_order}")
    grid = make_grid(x_left, x_right, n, periodic=False)
    dx = grid.dx

    weights = [float(w) for w in _BOUNDED_NORM[interior_order]]
    mass = np.full(n, dx)
    mass[: len(weights)] = dx * np.asarray(weights)
    mass[n - len(weights):] = dx * np.asarray(weights[::-1])

    d1_mat = _bounded_d1(interior_order, n, dx, mass / dx) / dx
    d1 = MatrixOperator(d1_mat)

    t_left = np.zeros(n)
    t_left[0] = 1.0
    t_right = np.zeros(n)
    t_right[-1] = 1.0

    if interior_order == 2:
        d2_mat = sp.lil_matrix((n, n))
        for i in range(n):
            j = min(max(i, 1), n - 2)
            d2_mat[i, j - 1], d2_mat[i, j], d2_mat[i, j + 1] = 1.0, -2.0, 1.0
        d2_mat = sp.csr_matrix(d2_mat / dx**2)
        d_left = np.zeros(n)
        d_left[:3] = np.array([-1.5, 2.0, -0.5]) / dx
        d_right = np.zeros(n)
        d_right[-3:] = np.array([0.5, -2.0, 1.5]) / dx
        d2 = MatrixOperator(d2_mat)
        # A2 = t_R d_R^T - t_L d_L^T - M D2 (the FEM stiffness matrix)
        a2_mat = (
            sp.csr_matrix(np.outer(t_right, d_right) - np.outer(t_left, d_left))
            - sp.diags(mass) @ d2_mat
        )
        a2 = MatrixOperator(a2_mat)
    else:
        d2_mat = sp.csr_matrix(d1_mat @ d1_mat)
        d2 = MatrixOperator(d2_mat)
        d_left = d1_mat.getrow(0).toarray().ravel()
        d_right = d1_mat.getrow(n - 1).toarray().ravel()
        a2 = MatrixOperator(d1_mat.T @ sp.diags(mass) @ d1_mat)

    return OperatorSet(
        grid=grid,
        kind="bounded_fd_sbp",
        accuracy_order=interior_order,
        mass_diag=mass,
        d1=d1,
        d2=d2,
        a2=a2,
        t_left=t_left,
        t_right=t_right,
        d_left=d_left,
        d_right=d_right,
    )


# }}}


# {{{ periodic upwind pairs

# Minimal-width biased stencils; offsets are relative node indices for
# D_plus.  Each satisfies the moment conditions of its order and has a
# negative semidefinite symmetric part (Re of the circulant symbol is
# -a (1 - cos theta)^m <= 0).
_UPWIND_DPLUS = {
    2: ([0, 1, 2], [Fraction(-3, 2), Fraction(2), Fraction(-1, 2)]),
    4: (
        [-1, 0, 1, 2, 3],
        [
            Fraction(-1, 4),
            Fraction(-5, 6),
            Fraction(3, 2),
            Fraction(-1, 2),
            Fraction(1, 12),
        ],
    ),
    6: (
        [-2, -1, 0, 1, 2, 3, 4],
        [
            Fraction(1, 30),
            Fraction(-2, 5),
            Fraction(-7, 12),
            Fraction(4, 3),
            Fraction(-1, 2),
            Fraction(2, 15),
            Fraction(-1, 60),
        ],
    ),
}


def make_upwind_fd(order: int, n: int, x_left: float, x_right: float) -> OperatorSet:
    """Periodic upwind pair with M = dx*I and D_minus = -D_plus^T.

    The narrow second derivative D2 = D_minus D_plus gives
    A2 = dx * D_plus^T D_plus, symmetric positive semidefinite.
    """
    if order not in _UPWIND_DPLUS:
        raise OperatorConstructionError(f"unsupported upwind order {order}")
    if n <= 2 * order:
        raise OperatorConstructionError(f"n = {n} too small for order {order}")
    grid = make_grid(x_left, x_right, n, periodic=True)
    dx = grid.dx

    offsets, coeffs = _UPWIND_DPLUS[order]
    dplus_mat = _circulant(n, offsets, coeffs, 1.0 / dx)
    dminus_mat = sp.csr_matrix(-dplus_mat.T)
    d_plus = MatrixOperator(dplus_mat)
    d_minus = MatrixOperator(dminus_mat)
    d1 = MatrixOperator(0.5 * (dplus_mat + dminus_mat))
    d2_mat = sp.csr_matrix(dminus_mat @ dplus_mat)
    d2 = MatrixOperator(d2_mat)
    a2 = MatrixOperator(-dx * d2_mat)

    tl, tr, dl, dr = _zero_boundary_vectors(n)
    return OperatorSet(
        grid=grid,
        kind="upwind_fd",
        accuracy_order=order,
        mass_diag=np.full(n, dx),
        d1=d1,
        d2=d2,
        a2=a2,
        t_left=tl,
        t_right=tr,
        d_left=dl,
        d_right=dr,
        d_plus=d_plus,
        d_minus=d_minus,
    )


# }}}


# {{{ conformance checks


@dataclass
class ConformanceReport:
    """Max-abs residuals of the applicable SBP identities."""

    sbp1_residual: float
    sbp2_residual: float
    a2_symmetry: float
    a2_min_quadratic_form: float
    consistency_d1: float
    consistency_d2: float
    upwind_residual: float | None = None
    upwind_dissipation_max_eig: float | None = None

    def max_identity_residual(self) -> float:
        residuals = [self.sbp1_residual, self.sbp2_residual, self.a2_symmetry]
        if self.upwind_residual is not None:
            residuals.append(self.upwind_residual)
        return max(residuals)


def sbp_conformance(ops: OperatorSet, n_samples: int = 20, seed: int = 0) -> ConformanceReport:
    """Evaluate the SBP identities on dense materializations.

    Residual entries are O(1) after the natural 1/dx scaling of the
    operators themselves, so they are reported unscaled.
    """
    n = ops.n
    m = np.diag(ops.mass_diag)
    d1 = ops.d1.to_dense()
    d2 = ops.d2.to_dense()
    a2 = ops.a2.to_dense()
    boundary = np.outer(ops.t_right, ops.t_right) - np.outer(ops.t_left, ops.t_left)

    sbp1 = np.abs(m @ d1 + d1.T @ m - boundary).max()
    sbp2 = np.abs(
        m @ d2
        - np.outer(ops.t_right, ops.d_right)
        + np.outer(ops.t_left, ops.d_left)
        + a2
    ).max()
    a2_sym = np.abs(a2 - a2.T).max()

    rng = np.random.default_rng(seed)
    min_form = np.inf
    for _ in range(n_samples):
        z = rng.standard_normal(n)
        min_form = min(min_form, float(z @ a2 @ z) / float(z @ z))

    ones = np.ones(n)
    cons_d1 = np.abs(d1 @ ones).max()
    cons_d2 = np.abs(d2 @ ones).max()

    upwind_res = None
    diss_eig = None
    if ops.d_plus is not None:
        dp = ops.d_plus.to_dense()
        dm = ops.d_minus.to_dense()
        upwind_res = np.abs(m @ dp + dm.T @ m - boundary).max()
        diss = m @ (dp - dm)
        diss_eig = float(np.linalg.eigvalsh(0.5 * (diss + diss.T)).max())
        upwind_res = max(upwind_res, np.abs(diss - diss.T).max())

    return ConformanceReport(
        sbp1_residual=float(sbp1),
        sbp2_residual=float(sbp2),
        a2_symmetry=float(a2_sym),
        a2_min_quadratic_form=float(min_form),
        consistency_d1=float(cons_d1),
        consistency_d2=float(cons_d2),
        upwind_residual=None if upwind_res is None else float(upwind_res),
        upwind_dissipation_max_eig=diss_eig,
    )


# }}}
