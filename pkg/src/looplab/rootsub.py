"""SU(2) root subgroup coordinates (eta, chi, zeta) on loops.

Synthesis builds the unitary loop g = k1^* . exp(chi) . k2 from finitely
supported coordinate sequences; recovery peels the coordinates back off a
loop through two Hardy-space solves and sparse factor stripping; the product
formulas give the closed-form truncated Toeplitz determinants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, InvalidInput, InvalidLevel, NotInTopStratum
from .factorization import _solve_hardy_columns
from .loops import (LaurentLoop, default_grid_size, evaluate, fourier_project,
                    from_coeff_dict, identity_loop, multiply, star)

__all__ = [
    "RootCoordsSU2",
    "k1_synthesize",
    "k2_synthesize",
    "torus_loop",
    "synthesize",
    "product_formula",
    "log_product_formula",
    "recover_coords",
    "recover_eta0",
    "k2_observables",
    "K2Observables",
    "coords_max_error",
]


@dataclass(frozen=True)
class RootCoordsSU2:
    """Coordinates (eta_i)_{i>=0}, chi_0, (chi_j)_{j>=1}, (zeta_k)_{k>=1}.

    Arrays are finitely supported truncations: eta[i] is eta_i, chi[j-1] is
    chi_j, zeta[k-1] is zeta_k.  chi0 is purely imaginary.
    """

    level: float
    eta: np.ndarray
    chi0: complex
    chi: np.ndarray
    zeta: np.ndarray

    def __post_init__(self):
        if self.level <= -1.0:
            raise InvalidLevel(f"level {self.level} <= -1")
        if abs(complex(self.chi0).real) > 1e-12:
            raise InvalidInput("chi0 must be purely imaginary")
        for name in ("eta", "chi", "zeta"):
            object.__setattr__(self, name,
                               np.asarray(getattr(self, name), dtype=complex))

    @classmethod
    def zero(cls, level: float = 0.0, truncation: int = 0) -> "RootCoordsSU2":
        n = truncation
        return cls(level, np.zeros(n, complex), 0.0,
                   np.zeros(n, complex), np.zeros(n, complex))

    @property
    def truncation(self) -> int:
        return max(len(self.eta), len(self.chi), len(self.zeta))


def _a(c: complex) -> float:
    return 1.0 / np.sqrt(1.0 + abs(c) ** 2)


def _k1_factor(n: int, eta_n: complex) -> LaurentLoop:
    a = _a(eta_n)
    if n == 0:
        return from_coeff_dict({0: a * np.array([[1, -np.conj(eta_n)],
                                                 [eta_n, 1]])})
    return from_coeff_dict({0: a * np.eye(2),
                            n: a * np.array([[0, -np.conj(eta_n)], [0, 0]]),
                            -n: a * np.array([[0, 0], [eta_n, 0]])})


def _k2_factor(n: int, zeta_n: complex) -> LaurentLoop:
    a = _a(zeta_n)
    return from_coeff_dict({0: a * np.eye(2),
                            -n: a * np.array([[0, zeta_n], [0, 0]]),
                            n: a * np.array([[0, 0], [-np.conj(zeta_n), 0]])})


def k1_synthesize(eta, band: int | None = None) -> LaurentLoop:
    """Ordered product of the eta factors, highest index leftmost."""
    eta = np.asarray(eta, dtype=complex)
    g = identity_loop(2)
    for n in range(len(eta) - 1, -1, -1):
        if eta[n] == 0:
            continue
        g = multiply(g, _k1_factor(n, eta[n]), band_cap=band)
    return g


def k2_synthesize(zeta, band: int | None = None) -> LaurentLoop:
    """Ordered product of the zeta factors (indices start at 1), highest leftmost."""
    zeta = np.asarray(zeta, dtype=complex)
    g = identity_loop(2)
    for k in range(len(zeta), 0, -1):
        if zeta[k - 1] == 0:
            continue
        g = multiply(g, _k2_factor(k, zeta[k - 1]), band_cap=band)
    return g


def chi_values(chi0: complex, chi, thetas: np.ndarray) -> np.ndarray:
    """chi(theta) = chi0 + sum_j (chi_j e^{ij theta} - conj(chi_j) e^{-ij theta})."""
    chi = np.asarray(chi, dtype=complex)
    vals = np.full(thetas.shape, complex(chi0), dtype=complex)
    for j, cj in enumerate(chi, start=1):
        e = np.exp(1j * j * thetas)
        vals += cj * e - np.conj(cj) / e
    return vals


def torus_loop(chi0: complex, chi, band: int, alias_tol: float = 1e-9) -> LaurentLoop:
    """Diagonal loop diag(e^chi, e^-chi) projected to the given band.

    The exponential is not band-limited; the projection error is measured on
    a staggered grid and ConvergenceFailure raised when it exceeds alias_tol.
    """
    if abs(complex(chi0).real) > 1e-12:
        raise InvalidInput("chi0 must be purely imaginary")
    n_grid = default_grid_size(band)
    thetas = 2 * np.pi * np.arange(n_grid) / n_grid
    cv = np.exp(chi_values(chi0, chi, thetas))
    samples = np.zeros((n_grid, 2, 2), dtype=complex)
    samples[:, 0, 0] = cv
    samples[:, 1, 1] = 1.0 / cv
    loop = fourier_project(samples, -band, band)
    # staggered-grid aliasing probe
    th2 = thetas + np.pi / n_grid
    direct = np.exp(chi_values(chi0, chi, th2))
    ns = np.arange(-band, band + 1)
    recon = np.exp(1j * np.outer(th2, ns)) @ loop.coeffs[:, 0, 0]
    err = float(np.abs(recon - direct).max())
    if err > alias_tol:
        raise ConvergenceFailure(
            f"torus projection aliasing error {err:.2e} > {alias_tol:.1e}; "
            "increase band")
    return loop


def _torus_band(chi, band: int | None) -> int:
    if band is not None:
        return band
    chi = np.asarray(chi)
    jmax = len(np.trim_zeros(chi, "b"))
    # the spectral width of e^chi is roughly the peak instantaneous
    # frequency, bounded by the total slope of the phase
    slope = float(np.sum(2 * np.arange(1, len(chi) + 1) * np.abs(chi)))
    return max(16, 2 * jmax + 16, jmax + int(2 * slope) + 16)


def synthesize(coords: RootCoordsSU2, band: int | None = None) -> LaurentLoop:
    """g = star(k1) * diag(e^chi, e^-chi) * k2.

    With band=None the polynomial factors are kept exact and only the torus
    loop is truncated (at an automatically grown band); otherwise every
    partial product is capped at the given band.
    """
    k1 = k1_synthesize(coords.eta, band)
    k2 = k2_synthesize(coords.zeta, band)
    tb = _torus_band(coords.chi, band)
    for attempt in range(4):
        try:
            t = torus_loop(coords.chi0, coords.chi, tb)
            break
        except ConvergenceFailure:
            if band is not None or attempt == 3:
                raise
            tb *= 2
    g = multiply(star(k1), t, band_cap=band)
    return multiply(g, k2, band_cap=band)


def log_product_formula(coords: RootCoordsSU2, which: str) -> float:
    """Closed-form log of the truncated-determinant limits det(A*A), det(A1*A1).

    which = 'detA':  -sum_i 2i*log(1+|eta_i|^2) - sum_j 4j|chi_j|^2
                     - sum_k 2k*log(1+|zeta_k|^2)
    which = 'detA1': the eta exponents shift up by one and the zeta exponents
                     down by one.
    which = 'a0sq':  their difference (the chi terms cancel).
    """
    i = np.arange(len(coords.eta))
    k = np.arange(1, len(coords.zeta) + 1)
    j = np.arange(1, len(coords.chi) + 1)
    le = np.log1p(np.abs(coords.eta) ** 2)
    lz = np.log1p(np.abs(coords.zeta) ** 2)
    chi_term = float(np.sum(4 * j * np.abs(coords.chi) ** 2))
    if which == "detA":
        return float(-np.sum(2 * i * le) - chi_term - np.sum(2 * k * lz))
    if which == "detA1":
        return float(-np.sum((2 * i + 1) * le) - chi_term
                     - np.sum((2 * k - 1) * lz))
    if which == "a0sq":
        return float(-np.sum(le) + np.sum(lz))
    raise InvalidInput(f"unknown product formula selector {which!r}")


def product_formula(coords: RootCoordsSU2, which: str) -> float:
    return float(np.exp(log_product_formula(coords, which)))


def random_coords(rng: np.random.Generator, level: float = 0.0,
                  n_nonzero: int = 6, max_modulus: float = 0.5,
                  max_index: int = 8) -> RootCoordsSU2:
    """Random sparse test coordinates: at most n_nonzero entries spread over
    the three families, indices <= max_index, moduli <= max_modulus."""
    eta = np.zeros(max_index + 1, complex)
    chi = np.zeros(max_index, complex)
    zeta = np.zeros(max_index, complex)
    arrays = (eta, chi, zeta)
    offsets = (0, 1, 1)
    for _ in range(n_nonzero):
        fam = rng.integers(0, 3)
        arr, off = arrays[fam], offsets[fam]
        idx = int(rng.integers(0, len(arr)))
        r = max_modulus * (0.2 + 0.8 * rng.random())
        arr[idx] = r * np.exp(2j * np.pi * rng.random())
    chi0 = 1j * 2 * np.pi * rng.random()
    return RootCoordsSU2(level, eta, chi0, chi, zeta)


# -- coordinate recovery -----------------------------------------------------

def _peel_zeta(w1: np.ndarray, w2: np.ndarray, n_max: int) -> np.ndarray:
    """Strip zeta factors from the pair (w1, w2) ~ e^{-chi_+} (d2, -c2).

    The z^k coefficient of c2/d2 at the innermost remaining index k is
    exactly -conj(zeta_k); each extraction updates the pair by the inverse
    factor (overall scalar prefactors are irrelevant).
    """
    zeta = np.zeros(n_max, dtype=complex)
    M = len(w1) - 1
    for k in range(1, n_max + 1):
        if abs(w1[0]) < 1e-300:
            raise NotInTopStratum("vanishing leading coefficient during peel")
        zbar = w2[k] / w1[0]
        zeta[k - 1] = np.conj(zbar)
        z = zeta[k - 1]
        w2_old = w2.copy()
        w2 = w2 - zbar * np.concatenate([np.zeros(k), w1[:M + 1 - k]])
        w1 = w1 + z * np.concatenate([w2_old[k:], np.zeros(k)])
    return zeta


def _peel_eta(v1: np.ndarray, v2: np.ndarray, n_max: int) -> np.ndarray:
    """Strip eta factors from the pair (v1, v2) ~ e^{-chi_+} (-b1, a1)."""
    eta = np.zeros(n_max + 1, dtype=complex)
    M = len(v1) - 1
    for n in range(0, n_max + 1):
        if abs(v2[0]) < 1e-300:
            raise NotInTopStratum("vanishing leading coefficient during peel")
        ebar = v1[n] / v2[0]
        eta[n] = np.conj(ebar)
        e = eta[n]
        v1_old = v1.copy()
        v1 = v1 - ebar * np.concatenate([np.zeros(n), v2[:M + 1 - n]])
        v2 = v2 + e * np.concatenate([v1_old[n:], np.zeros(n)])
    return eta


def _recover_once(g: LaurentLoop, level: float, M: int, n_max: int) -> RootCoordsSU2:
    # zeta side: combine the two Hardy columns of g so the value at z=0 has
    # vanishing second component -- that combination is proportional to
    # e^{-chi_+} (d2, -c2)^T.
    X = _solve_hardy_columns(g, M)
    H = X[0]
    kappa = np.array([H[1, 1], -H[1, 0]])
    if np.abs(kappa).max() < 1e-300:
        raise NotInTopStratum("degenerate constant block in Hardy solve")
    w = X @ kappa                       # shape (M+1, 2)
    zeta = _peel_zeta(w[:, 0], w[:, 1], n_max)
    # eta side: the second Hardy column of star(g) is already proportional
    # to e^{-chi_+} (-b1, a1)^T.
    Xs = _solve_hardy_columns(star(g), M)
    eta = _peel_eta(Xs[:, 0, 1], Xs[:, 1, 1], n_max)
    # chi: conjugate g by the recovered unitary factors and read the diagonal
    k1 = k1_synthesize(eta)
    k2 = k2_synthesize(zeta)
    t = multiply(multiply(k1, g), star(k2))
    n_grid = default_grid_size(max(t.band_width, 2 * n_max + 1))
    diag = evaluate(t, n_grid)[:, 0, 0]
    ang = np.unwrap(np.angle(diag))
    spec = np.fft.fft(1j * ang) / n_grid
    chi0 = 1j * (float(np.mean(ang)) % (2 * np.pi))
    chi = spec[1:n_max + 1]
    return RootCoordsSU2(level, eta, chi0, chi, zeta)


def recover_coords(g: LaurentLoop, l_hint: float = 0.0, tol: float = 1e-8,
                   n_max: int | None = None, M: int | None = None) -> RootCoordsSU2:
    """Invert synthesize: peel (eta, chi, zeta) off a unitary-valued loop.

    Contract: for g = synthesize(c) with support <= 8 and moduli <= 0.5,
    the result matches c to 1e-8 per coordinate.  Raises ConvergenceFailure
    when the resynthesized loop misses g by more than tol on the grid.
    """
    if n_max is None:
        n_max = g.band_width
    if M is None:
        M = max(2 * g.band_width, 32)
    last_res = np.inf
    for M_try in (M, 2 * M):
        coords = _recover_once(g, l_hint, M_try, n_max)
        resynth = synthesize(coords)
        n_grid = default_grid_size(max(g.band_width, resynth.band_width))
        last_res = float(np.abs(evaluate(resynth, n_grid)
                                - evaluate(g, n_grid)).max())
        if last_res <= tol:
            return coords
    raise ConvergenceFailure(
        f"recovery residual {last_res:.3e} exceeds tol {tol:.1e}")


def recover_eta0(g: LaurentLoop, M: int | None = None) -> complex:
    """Fast path for eta_0 alone: one Hardy solve of star(g).

    eta_0 = conj of the (1,2)/(2,2) ratio of the constant block.
    """
    if M is None:
        M = max(g.band_width, 8)
    Xs = _solve_hardy_columns(star(g), M)
    H = Xs[0]
    if abs(H[1, 1]) < 1e-12 * max(abs(H).max(), 1e-300):
        raise NotInTopStratum("vanishing (2,2) entry in constant block")
    return complex(np.conj(H[0, 1] / H[1, 1]))


def coords_max_error(c1: RootCoordsSU2, c2: RootCoordsSU2) -> float:
    """Max per-coordinate deviation, padding shorter arrays with zeros;
    chi0 compared modulo 2 pi i."""
    def pad(a, n):
        return np.concatenate([a, np.zeros(n - len(a), complex)])

    err = 0.0
    for name in ("eta", "chi", "zeta"):
        a, b = getattr(c1, name), getattr(c2, name)
        n = max(len(a), len(b))
        if n:
            err = max(err, float(np.abs(pad(a, n) - pad(b, n)).max()))
    d0 = np.exp(complex(c1.chi0)) - np.exp(complex(c2.chi0))
    return max(err, float(abs(d0)))


# -- k2 observables ----------------------------------------------------------

@dataclass(frozen=True)
class K2Observables:
    x_series: np.ndarray = field(repr=False)   # coefficients of X at z^1..z^Mx
    ratio_samples: np.ndarray = field(repr=False)
    n_grid: int


def k2_observables(zeta, band: int | None = None) -> K2Observables:
    """The holomorphic data attached to k2: X and grid samples of c2/d2.

    c2, d2 are the bottom-row entries of k2 (power series in z; c2(0) = 0).
    x is solved in least squares from the pair of negative-part conditions
    P_-(d2^* - x^* c2) = 0, P_-(-c2^* - x^* d2) = 0, and X = x / prod(1+|zeta_k|^2)^k.
    """
    zeta = np.asarray(zeta, dtype=complex)
    k2 = k2_synthesize(zeta, band)
    B = k2.band_width
    c2 = np.array([k2.coeff(n)[1, 0] for n in range(B + 1)])
    d2 = np.array([k2.coeff(n)[1, 1] for n in range(B + 1)])
    if abs(d2[0]) < 1e-12:
        raise NotInTopStratum("d2(0) vanishes")
    n_grid = default_grid_size(max(B, 1))
    z = np.exp(2j * np.pi * np.arange(n_grid) / n_grid)
    ratio = np.polyval(c2[::-1], z) / np.polyval(d2[::-1], z)
    Mx = max(B, 1)
    # rows: q = 1..Q for each of the two conditions; unknowns xbar_1..xbar_Mx
    Q = Mx + B + 1
    A = np.zeros((2 * Q, Mx), dtype=complex)
    rhs = np.zeros(2 * Q, dtype=complex)

    def coeff(series, idx):
        return series[idx] if 0 <= idx <= B else 0.0

    for q in range(1, Q + 1):
        for m in range(1, Mx + 1):
            A[q - 1, m - 1] = coeff(c2, m - q)
            A[Q + q - 1, m - 1] = coeff(d2, m - q)
        rhs[q - 1] = np.conj(coeff(d2, q))
        rhs[Q + q - 1] = -np.conj(coeff(c2, q))
    xbar, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    ks = np.arange(1, len(zeta) + 1)
    log_a20_sq = float(np.sum(ks * np.log1p(np.abs(zeta) ** 2)))
    x = np.conj(xbar) * np.exp(-log_a20_sq)
    return K2Observables(x_series=x, ratio_samples=ratio, n_grid=n_grid)
