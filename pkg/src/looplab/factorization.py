"""Block Toeplitz compressions, truncated determinants, and factorization.

Implements the Riemann-Hilbert splitting g = g_minus * g0 * g_plus for
banded loops with zero winding, the 2x2 LDU refinement, and the determinant
route to the positive diagonal a0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, InvalidInput, NotInTopStratum
from .loops import (LaurentLoop, default_grid_size, evaluate, from_coeff_dict,
                    multiply)

__all__ = [
    "ToeplitzBlock",
    "TriangularFactors",
    "toeplitz",
    "log_det_AstarA",
    "birkhoff_factor",
    "ldu_2x2",
    "triangular_factor",
    "a0_from_dets",
]


@dataclass(frozen=True)
class ToeplitzBlock:
    """Compression of multiplication-by-g to the truncated Hardy space.

    Unshifted: basis {z^n e_i : 0 <= n <= M, i = 1..dim}, block (j, k) = c_{j-k}.
    Shifted: the constant e_2 mode is dropped from rows and columns.
    """

    loop: LaurentLoop = field(repr=False)
    cutoff: int
    shifted: bool
    matrix: np.ndarray = field(repr=False)


def toeplitz(g: LaurentLoop, M: int, shifted: bool = False) -> ToeplitzBlock:
    if M < g.band_width:
        raise InvalidInput(
            f"cutoff M={M} below band width {g.band_width}: compression would "
            "lose coefficients")
    d = g.dim
    # vectorized block fill: pad the coefficient family with a zero block and
    # gather by the offset j - k
    padded = np.concatenate([g.coeffs,
                             np.zeros((1, d, d), dtype=complex)], axis=0)
    offs = np.arange(M + 1)[:, None] - np.arange(M + 1)[None, :]
    idx = np.where((offs >= g.n_min) & (offs <= g.n_max),
                   offs - g.n_min, len(padded) - 1)
    A4 = padded[idx]                       # (M+1, M+1, d, d)
    A = A4.transpose(0, 2, 1, 3).reshape(d * (M + 1), d * (M + 1))
    if shifted:
        # drop the (mode 0, e_2) row and column (global index 1)
        keep = np.ones(A.shape[0], dtype=bool)
        keep[1] = False
        A = A[np.ix_(keep, keep)]
    return ToeplitzBlock(g, M, shifted, A)


def log_det_AstarA(T: ToeplitzBlock) -> float:
    """log det(A* A) as twice the sum of log singular values of A.

    Exactly singular truncations return -inf (flagged sentinel value).
    """
    s = np.linalg.svd(T.matrix, compute_uv=False)
    if s[-1] == 0.0:
        return -np.inf
    return float(2.0 * np.sum(np.log(s)))


def _series_inverse(s: np.ndarray, order: int) -> np.ndarray:
    """Inverse of a matrix power series s_0 + s_1 z + ... mod z^(order+1)."""
    d = s.shape[1]
    t = np.zeros((order + 1, d, d), dtype=complex)
    t0 = np.linalg.inv(s[0])
    t[0] = t0
    for n in range(1, order + 1):
        acc = np.zeros((d, d), dtype=complex)
        for k in range(1, min(n, s.shape[0] - 1) + 1):
            acc += s[k] @ t[n - k]
        t[n] = -t0 @ acc
    return t


def _solve_hardy_columns(g: LaurentLoop, M: int) -> np.ndarray:
    """Solve A(g) X = E0 for the (M+1) stacked 2x2 blocks of (g0 g_plus)^-1.

    Returns X of shape (M+1, dim, dim).
    """
    d = g.dim
    A = toeplitz(g, max(M, g.band_width), shifted=False).matrix
    E = np.zeros((A.shape[0], d), dtype=complex)
    E[:d, :d] = np.eye(d)
    try:
        X = np.linalg.solve(A, E)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(
            "block Toeplitz truncation is singular (loop outside the top "
            "stratum or nonzero winding)") from exc
    M_eff = A.shape[0] // d - 1
    return X.reshape(M_eff + 1, d, d)[:M + 1]


def birkhoff_factor(g: LaurentLoop, M: int, tol: float = 1e-8):
    """Riemann-Hilbert splitting g = g_minus * g0 * g_plus.

    g_minus is a series in 1/z with value I at infinity, g_plus a series in z
    with value I at 0, g0 a constant matrix.  Factors are truncated at M modes
    and the max-grid residual of the product is reported.

    Raises ConvergenceFailure if the truncated system is singular or the
    residual exceeds tol.
    """
    d = g.dim
    X = _solve_hardy_columns(g, M)
    # X holds the power-series coefficients of h = (g0 g_plus)^{-1}; g h = g_minus
    h0 = X[0]
    if abs(np.linalg.det(h0)) < 1e-300:
        raise ConvergenceFailure("constant term of the Hardy solve is singular")
    g0 = np.linalg.inv(h0)
    s = X @ g0           # s = h * g0, unit constant term
    gp = _series_inverse(s, M)
    g_plus = LaurentLoop(d, 0, M, gp)
    h_loop = LaurentLoop(d, 0, M, X.copy())
    gm_full = multiply(g, h_loop)
    g_minus = gm_full.with_band(max(gm_full.n_min, -M), 0)
    res = _product_residual(g, g_minus, g0, g_plus)
    if not np.isfinite(res) or res > tol:
        raise ConvergenceFailure(
            f"factorization residual {res:.3e} exceeds tol {tol:.1e} "
            "(not in the top stratum, or cutoff M too small)")
    return g_minus, g0, g_plus, res


def _product_residual(g, g_minus, g0, g_plus) -> float:
    n_grid = default_grid_size(max(g.band_width, g_minus.band_width,
                                   g_plus.band_width))
    vals = evaluate(g_minus, n_grid) @ g0 @ evaluate(g_plus, n_grid)
    return float(np.abs(vals - evaluate(g, n_grid)).max())


def ldu_2x2(g0: np.ndarray, tol: float = 1e-13):
    """Unique decomposition g0 = l * m * a * u of a 2x2 invertible matrix.

    l lower unipotent, u upper unipotent, m = diag of unit modulus,
    a = positive diagonal.  Requires (g0)_11 != 0.
    """
    g0 = np.asarray(g0, dtype=complex)
    a, b = g0[0, 0], g0[0, 1]
    c, d = g0[1, 0], g0[1, 1]
    scale = max(np.abs(g0).max(), 1.0)
    if abs(a) <= tol * scale:
        raise NotInTopStratum("vanishing (1,1) entry: no LDU at this point")
    det = a * d - b * c
    d2 = det / a
    l = np.array([[1.0, 0.0], [c / a, 1.0]], dtype=complex)
    u = np.array([[1.0, b / a], [0.0, 1.0]], dtype=complex)
    m = np.diag([a / abs(a), d2 / abs(d2)]).astype(complex)
    adiag = np.diag([abs(a), abs(d2)]).astype(complex)
    return l, m, adiag, u


@dataclass(frozen=True)
class TriangularFactors:
    """g = l * m * a * u with l(inf) lower unipotent and u(0) upper unipotent."""

    l: LaurentLoop
    m: np.ndarray
    a: np.ndarray
    u: LaurentLoop
    residual: float
    g0: np.ndarray = field(repr=False)

    @property
    def m0(self) -> complex:
        return complex(self.m[0, 0])

    @property
    def a0(self) -> float:
        return float(self.a[0, 0].real)


def triangular_factor(g: LaurentLoop, M: int, tol: float = 1e-8) -> TriangularFactors:
    g_minus, g0, g_plus, res = birkhoff_factor(g, M, tol)
    ldot, m, a, udot = ldu_2x2(g0)
    l = multiply(g_minus, from_coeff_dict({0: ldot}, g.dim))
    u = multiply(from_coeff_dict({0: udot}, g.dim), g_plus)
    return TriangularFactors(l=l, m=m, a=a, u=u, residual=res, g0=g0)


def a0_from_dets(g: LaurentLoop, M: int) -> float:
    """a0 through the determinant ratio a0^2 = det(A1* A1) / det(A* A)."""
    ld = log_det_AstarA(toeplitz(g, M, shifted=False))
    ld1 = log_det_AstarA(toeplitz(g, M, shifted=True))
    if not np.isfinite(ld) or not np.isfinite(ld1):
        raise ConvergenceFailure("singular Toeplitz truncation in a0 ratio")
    return float(np.exp(0.5 * (ld1 - ld)))
