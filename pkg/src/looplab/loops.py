"""Truncated matrix-valued Laurent loops on the unit circle.

A loop is stored as the finite family of Fourier coefficients c_n
(``dim x dim`` complex matrices) for n in a band ``n_min <= 0 <= n_max``.
All operations are pure; instances are immutable after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput

__all__ = [
    "LaurentLoop",
    "identity_loop",
    "multiply",
    "star",
    "evaluate",
    "fourier_project",
    "mobius_reparam",
    "unitarity_defect",
    "default_grid_size",
    "loop_to_json",
    "loop_from_json",
]


@dataclass(frozen=True)
class LaurentLoop:
    """Finite Laurent series z -> sum_n coeffs[n] z^n with matrix coefficients.

    ``coeffs`` has shape (n_max - n_min + 1, dim, dim); index 0 holds the
    coefficient of z^{n_min}.
    """

    dim: int
    n_min: int
    n_max: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_min > 0 or self.n_max < 0:
            raise InvalidInput("band must contain 0: n_min <= 0 <= n_max")
        expected = (self.n_max - self.n_min + 1, self.dim, self.dim)
        if self.coeffs.shape != expected:
            raise InvalidInput(
                f"coefficient array has shape {self.coeffs.shape}, expected {expected}"
            )
        self.coeffs.setflags(write=False)

    def coeff(self, n: int) -> np.ndarray:
        """Coefficient of z^n (zero outside the band)."""
        if n < self.n_min or n > self.n_max:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return self.coeffs[n - self.n_min]

    @property
    def band_width(self) -> int:
        return max(-self.n_min, self.n_max)

    def trimmed(self, tol: float = 0.0) -> "LaurentLoop":
        """Drop outer coefficients whose max-norm is <= tol (band keeps 0)."""
        norms = np.abs(self.coeffs).reshape(self.coeffs.shape[0], -1).max(axis=1)
        lo, hi = self.n_min, self.n_max
        while lo < 0 and norms[lo - self.n_min] <= tol:
            lo += 1
        while hi > 0 and norms[hi - self.n_min] <= tol:
            hi -= 1
        if (lo, hi) == (self.n_min, self.n_max):
            return self
        return LaurentLoop(self.dim, lo, hi,
                           self.coeffs[lo - self.n_min:hi - self.n_min + 1].copy())

    def with_band(self, n_min: int, n_max: int) -> "LaurentLoop":
        """Re-embed into the band [n_min, n_max], truncating or zero-padding."""
        if n_min > 0 or n_max < 0:
            raise InvalidInput("band must contain 0")
        out = np.zeros((n_max - n_min + 1, self.dim, self.dim), dtype=complex)
        lo = max(n_min, self.n_min)
        hi = min(n_max, self.n_max)
        if lo <= hi:
            out[lo - n_min:hi - n_min + 1] = self.coeffs[lo - self.n_min:hi - self.n_min + 1]
        return LaurentLoop(self.dim, n_min, n_max, out)


def identity_loop(dim: int = 2) -> LaurentLoop:
    c = np.eye(dim, dtype=complex)[None, :, :].copy()
    return LaurentLoop(dim, 0, 0, c)


def from_coeff_dict(coeffs: dict, dim: int = 2) -> LaurentLoop:
    """Build a loop from a {mode: matrix} mapping."""
    if not coeffs:
        return LaurentLoop(dim, 0, 0, np.zeros((1, dim, dim), dtype=complex))
    n_min = min(0, min(coeffs))
    n_max = max(0, max(coeffs))
    arr = np.zeros((n_max - n_min + 1, dim, dim), dtype=complex)
    for n, mat in coeffs.items():
        arr[n - n_min] = np.asarray(mat, dtype=complex)
    return LaurentLoop(dim, n_min, n_max, arr)


def multiply(g: LaurentLoop, h: LaurentLoop, band_cap: int | None = None) -> LaurentLoop:
    """Pointwise product gh; coefficients are the convolution of the inputs.

    If ``band_cap`` is given the result is truncated to [-band_cap, band_cap]
    (used when synthesizing long products at fixed resolution).
    """
    if g.dim != h.dim:
        raise InvalidInput(f"dimension mismatch: {g.dim} vs {h.dim}")
    n_min = g.n_min + h.n_min
    n_max = g.n_max + h.n_max
    out = np.zeros((n_max - n_min + 1, g.dim, g.dim), dtype=complex)
    # convolve (out[i+j] += g[i] @ h[j]), looping over the nonzero modes of
    # the sparser factor so long products of subgroup factors stay cheap
    nz_g = np.flatnonzero(np.abs(g.coeffs).reshape(g.coeffs.shape[0], -1).any(axis=1))
    nz_h = np.flatnonzero(np.abs(h.coeffs).reshape(h.coeffs.shape[0], -1).any(axis=1))
    if len(nz_h) <= len(nz_g):
        for j in nz_h:
            out[j:j + g.coeffs.shape[0]] += g.coeffs @ h.coeffs[j]
    else:
        for i in nz_g:
            out[i:i + h.coeffs.shape[0]] += g.coeffs[i] @ h.coeffs
    res = LaurentLoop(g.dim, n_min, n_max, out)
    if band_cap is not None:
        lo = max(n_min, -band_cap)
        hi = min(n_max, band_cap)
        res = res.with_band(lo, hi)
    return res


def star(g: LaurentLoop) -> LaurentLoop:
    """The involution g*(z) = g(z)^dagger on |z|=1, i.e. c_n -> c_{-n}^dagger."""
    out = np.conj(np.transpose(g.coeffs[::-1], (0, 2, 1))).copy()
    return LaurentLoop(g.dim, -g.n_max, -g.n_min, out)


def evaluate(g: LaurentLoop, n_grid: int) -> np.ndarray:
    """Values of g at z = exp(2 pi i k / n_grid), k = 0..n_grid-1.

    Returns an array of shape (n_grid, dim, dim).
    """
    if n_grid < 1:
        raise InvalidInput("n_grid must be >= 1")
    # exact on the grid for any n_grid: z^n and z^(n mod N) coincide there
    spec = np.zeros((n_grid, g.dim, g.dim), dtype=complex)
    for n in range(g.n_min, g.n_max + 1):
        spec[n % n_grid] += g.coeffs[n - g.n_min]
    return n_grid * np.fft.ifft(spec, axis=0)


def evaluate_at(g: LaurentLoop, z: np.ndarray) -> np.ndarray:
    """Values of g at arbitrary points z (Horner in z and 1/z)."""
    z = np.asarray(z, dtype=complex)
    vals = np.zeros(z.shape + (g.dim, g.dim), dtype=complex)
    # positive part including 0, Horner from the top
    for n in range(g.n_max, -1, -1):
        vals *= z[..., None, None]
        vals += g.coeff(n)
    if g.n_min < 0:
        zi = 1.0 / z
        neg = np.zeros_like(vals)
        for n in range(g.n_min, 0):
            neg += g.coeff(n)
            if n < -1:
                neg *= zi[..., None, None]
        neg *= zi[..., None, None]
        vals += neg
    return vals


def fourier_project(samples: np.ndarray, n_min: int, n_max: int) -> LaurentLoop:
    """Recover band-limited coefficients from equispaced grid samples.

    ``samples`` must come from a grid strictly larger than the band width
    (n_max - n_min + 1), else the modes alias and InvalidInput is raised.
    The map is a left inverse of ``evaluate`` on band-limited loops.
    """
    samples = np.asarray(samples, dtype=complex)
    n_grid = samples.shape[0]
    if n_grid < n_max - n_min + 1:
        raise InvalidInput(
            f"grid of {n_grid} points cannot resolve band [{n_min}, {n_max}]")
    dim = samples.shape[1]
    # c_n = (1/N) sum_k samples_k exp(-2 pi i n k / N)
    spec = np.fft.fft(samples, axis=0) / n_grid
    arr = np.zeros((n_max - n_min + 1, dim, dim), dtype=complex)
    for n in range(n_min, n_max + 1):
        arr[n - n_min] = spec[n % n_grid]
    return LaurentLoop(dim, n_min, n_max, arr)


def default_grid_size(band_width: int) -> int:
    """Nyquist-margin grid used for projection/evaluation round trips."""
    return 4 * max(band_width, 1) + 1


def unitarity_defect(g: LaurentLoop, n_grid: int | None = None) -> float:
    """max over the grid of || g(z) g(z)^dagger - I || (spectral-ish max-abs)."""
    if n_grid is None:
        n_grid = default_grid_size(g.band_width)
    vals = evaluate(g, n_grid)
    prod = vals @ np.conj(np.transpose(vals, (0, 2, 1)))
    prod -= np.eye(g.dim)
    return float(np.abs(prod).max())


def mobius_check(a: complex, b: complex, tol: float = 1e-9) -> None:
    if abs(abs(a) ** 2 - abs(b) ** 2 - 1.0) > tol:
        raise InvalidInput(
            "Mobius parameters must satisfy |a|^2 - |b|^2 = 1 (circle-preserving)")


def mobius_apply(a: complex, b: complex, z: np.ndarray) -> np.ndarray:
    """sigma(z) = (a z + b) / (conj(b) z + conj(a)) on the unit circle."""
    z = np.asarray(z, dtype=complex)
    return (a * z + b) / (np.conj(b) * z + np.conj(a))


def mobius_inverse(a: complex, b: complex) -> tuple[complex, complex]:
    return np.conj(a), -b


def mobius_reparam(g: LaurentLoop, a: complex, b: complex,
                   band_out: int | None = None) -> LaurentLoop:
    """Precompose g with the inverse of the Mobius map sigma = (a, b).

    Returns the Fourier projection of z -> g(sigma^{-1}(z)) onto the band
    [-band_out, band_out].  Rotations (b = 0) act exactly on coefficients.
    """
    mobius_check(a, b)
    if band_out is None:
        band_out = g.band_width
    if b == 0:
        # sigma(z) = e^{i phi} z with e^{i phi} = a / conj(a); c_n -> e^{-i n phi} c_n
        phase = a / np.conj(a)
        ns = np.arange(g.n_min, g.n_max + 1)
        arr = g.coeffs * (phase ** (-ns))[:, None, None]
        return LaurentLoop(g.dim, g.n_min, g.n_max, arr).with_band(-band_out, band_out)
    n_grid = default_grid_size(band_out)
    w = np.exp(2j * np.pi * np.arange(n_grid) / n_grid)
    ai, bi = mobius_inverse(a, b)
    z = mobius_apply(ai, bi, w)
    z /= np.abs(z)  # keep exactly on the circle against rounding
    samples = evaluate_at(g, z)
    return fourier_project(samples, -band_out, band_out)


# -- serialization -----------------------------------------------------------

def loop_to_json(g: LaurentLoop) -> str:
    """JSON round-trip format: {dim, n_min, n_max, coeffs} with [re, im] pairs
    row-major per mode."""
    modes = []
    for idx in range(g.coeffs.shape[0]):
        flat = g.coeffs[idx].reshape(-1)
        modes.append([[float(c.real), float(c.imag)] for c in flat])
    return json.dumps({"dim": g.dim, "n_min": g.n_min, "n_max": g.n_max,
                       "coeffs": modes})


def loop_from_json(text: str) -> LaurentLoop:
    obj = json.loads(text)
    dim = obj["dim"]
    n_min, n_max = obj["n_min"], obj["n_max"]
    arr = np.zeros((n_max - n_min + 1, dim, dim), dtype=complex)
    for idx, flat in enumerate(obj["coeffs"]):
        vals = np.array([re + 1j * im for re, im in flat])
        arr[idx] = vals.reshape(dim, dim)
    return LaurentLoop(dim, n_min, n_max, arr)
