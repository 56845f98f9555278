"""Periodic spectral toolbox on the uniform grid θ_k = 2πk/N.

Samples are plain 1-D numpy arrays of even length N >= 16.  Fourier data
use the real convention

    s(θ) = a_0 + Σ_{j=1}^{N/2} a_j cos(jθ) + b_j sin(jθ),

so ``mean(s) = a_0`` and the normalized mean integral ∮− s·cos θ = a_1/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

MIN_N = 16


def check_samples(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.ndim != 1:
        raise InputError("periodic samples must be one-dimensional")
    n = s.size
    if n < MIN_N or n % 2:
        raise InputError(f"grid size must be even and >= {MIN_N}, got {n}")
    if not np.all(np.isfinite(s)):
        raise InputError("periodic samples must be finite")
    return s


def grid(n: int) -> np.ndarray:
    if n < MIN_N or n % 2:
        raise InputError(f"grid size must be even and >= {MIN_N}, got {n}")
    return 2.0 * np.pi * np.arange(n) / n


@dataclass
class FourierCoeffs:
    """Cosine/sine coefficients a_j, b_j for j = 0..N/2 (b_0 = b_{N/2} = 0)."""

    a: np.ndarray
    b: np.ndarray

    @property
    def n(self) -> int:
        return 2 * (len(self.a) - 1)

    def copy(self) -> "FourierCoeffs":
        return FourierCoeffs(self.a.copy(), self.b.copy())

    @classmethod
    def zeros(cls, n: int) -> "FourierCoeffs":
        return cls(np.zeros(n // 2 + 1), np.zeros(n // 2 + 1))


def to_coeffs(s) -> FourierCoeffs:
    s = check_samples(s)
    n = s.size
    c = np.fft.rfft(s) / n
    a = 2.0 * c.real
    b = -2.0 * c.imag
    a[0] = c[0].real
    a[-1] = c[-1].real
    b[0] = 0.0
    b[-1] = 0.0
    return FourierCoeffs(a, b)


def from_coeffs(fc: FourierCoeffs) -> np.ndarray:
    n = fc.n
    c = (fc.a - 1j * fc.b) / 2.0
    c[0] = fc.a[0]
    c[-1] = fc.a[-1]
    return np.fft.irfft(c * n, n)


def _multiply(s, mult) -> np.ndarray:
    s = check_samples(s)
    n = s.size
    return np.fft.irfft(np.fft.rfft(s) * mult(np.arange(n // 2 + 1), n), n)


def hilbert(s) -> np.ndarray:
    """cos jθ ↦ sin jθ, sin jθ ↦ −cos jθ; mean and Nyquist mode ↦ 0.

    In mean-integral form, ∮− s(α) sin(θ−α)/(4 sin²((θ−α)/2)) dα = hilbert(s)/2.
    """

    def mult(j, n):
        m = -1j * np.ones(j.size)
        m[0] = 0.0
        m[-1] = 0.0
        return m

    return _multiply(s, mult)


def half_laplacian(s) -> np.ndarray:
    """Fourier multiplier |j|.

    In mean-integral form, ∮− (s(θ) − s(α))/(4 sin²((θ−α)/2)) dα = half_laplacian(s)/2.
    """
    return _multiply(s, lambda j, n: j.astype(float))


def derivative(s) -> np.ndarray:
    """Spectral d/dθ with the Nyquist mode zeroed."""

    def mult(j, n):
        m = 1j * j
        m[-1] = 0.0
        return m

    return _multiply(s, mult)


def mean(s) -> float:
    return float(np.mean(check_samples(s)))


def project_zero_mean(s) -> np.ndarray:
    """I − P₀."""
    s = check_samples(s)
    return s - np.mean(s)


def low_modes(s) -> tuple[float, float]:
    """(a_1, b_1): the cos θ and sin θ coefficients."""
    fc = to_coeffs(s)
    return float(fc.a[1]), float(fc.b[1])


def resample(s, n_new: int) -> np.ndarray:
    """Trigonometric interpolation of s onto a grid of n_new points.

    The Nyquist coefficient is carried over as a cosine, so resampling a
    band-limited signal to a finer grid is exact.
    """
    fc = to_coeffs(s)
    n = fc.n
    if n_new < MIN_N or n_new % 2:
        raise InputError("target grid size must be even and >= 16")
    out = FourierCoeffs.zeros(n_new)
    k = min(n, n_new) // 2 + 1
    out.a[:k] = fc.a[:k]
    out.b[:k] = fc.b[:k]
    out.b[-1] = 0.0
    if n_new < n:
        out.a[-1] = 0.0
    return from_coeffs(out)


def from_modes(n: int, cos=None, sin=None) -> np.ndarray:
    """Samples of Σ cos_j cos(jθ) + sin_j sin(jθ) from {j: coeff} dicts."""
    th = grid(n)
    s = np.zeros(n)
    for j, v in (cos or {}).items():
        s += v * np.cos(j * th)
    for j, v in (sin or {}).items():
        s += v * np.sin(j * th)
    return s
