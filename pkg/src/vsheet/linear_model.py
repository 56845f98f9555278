"""Exact ε = 0 linearization L₀ of (F_{i,1}, F_{i,2}) in (f_i, g_i).

For f = a_j cos jθ + b_j sin jθ and g = c_j cos jθ + d_j sin jθ,

    F1 = â_j sin jθ + b̂_j cos jθ,   F2 = ĉ_j cos jθ + d̂_j sin jθ,
    (â_j, ĉ_j) = M_j (a_j, c_j),    (b̂_j, d̂_j) = N_j (b_j, d_j),

    M_j = [[−κj/2, 1/2], [(2−j)κ²/2, −κ/2]],
    N_j = [[ κj/2, −1/2], [(2−j)κ²/2, −κ/2]].

Note the basis swap in the F1 row: a cosine input produces a sine output.
That pairing lives only in ``_split`` / ``_merge`` below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, InputError
from .spectral import FourierCoeffs

COMPAT_TOL = 1e-8


@dataclass
class BlockOperator:
    kappa: float
    n: int
    M: np.ndarray       # (n/2 + 1, 2, 2), index j
    N: np.ndarray
    Minv: np.ndarray    # NaN for j = 0, 1
    Ninv: np.ndarray

    @property
    def modes(self) -> np.ndarray:
        return np.arange(self.M.shape[0])


def m_block(kappa: float, j: int) -> np.ndarray:
    return np.array([[-kappa * j / 2.0, 0.5], [(2 - j) * kappa**2 / 2.0, -kappa / 2.0]])


def n_block(kappa: float, j: int) -> np.ndarray:
    return np.array([[kappa * j / 2.0, -0.5], [(2 - j) * kappa**2 / 2.0, -kappa / 2.0]])


def m_inverse(kappa: float, j: int) -> np.ndarray:
    """Closed-form M_j⁻¹ for j ≥ 2."""
    return np.array([
        [-1.0 / (kappa * (j - 1)), -1.0 / (kappa**2 * (j - 1))],
        [(j - 2) / (j - 1), -j / (kappa * (j - 1))],
    ])


def n_inverse(kappa: float, j: int) -> np.ndarray:
    """Closed-form N_j⁻¹ for j ≥ 2."""
    return np.array([
        [1.0 / (kappa * (j - 1)), -1.0 / (kappa**2 * (j - 1))],
        [(2 - j) / (j - 1), -j / (kappa * (j - 1))],
    ])


def build_blocks(kappa: float, n: int) -> BlockOperator:
    if kappa == 0.0 or not np.isfinite(kappa):
        raise InputError("kappa must be finite and nonzero")
    if n < 4 or n % 2:
        raise InputError("grid size must be even")
    jmax = n // 2
    M = np.zeros((jmax + 1, 2, 2))
    N = np.zeros_like(M)
    Minv = np.full_like(M, np.nan)
    Ninv = np.full_like(M, np.nan)
    for j in range(1, jmax + 1):
        M[j] = m_block(kappa, j)
        N[j] = n_block(kappa, j)
        if j >= 2:
            Minv[j] = m_inverse(kappa, j)
            Ninv[j] = n_inverse(kappa, j)
    return BlockOperator(float(kappa), n, M, N, Minv, Ninv)


# --- basis pairing of the F1 row ---------------------------------------------

def _split(h1: FourierCoeffs, h2: FourierCoeffs):
    """Input pairs: cos part (a_j, c_j) and sin part (b_j, d_j)."""
    return np.stack([h1.a, h2.a], axis=-1), np.stack([h1.b, h2.b], axis=-1)


def _merge(hat_ac: np.ndarray, hat_bd: np.ndarray):
    """Output coefficients from (â_j, ĉ_j) and (b̂_j, d̂_j).

    F1 = Σ â_j sin jθ + b̂_j cos jθ, so â goes to the sine slot of r1 and
    b̂ to its cosine slot; F2 = Σ ĉ_j cos jθ + d̂_j sin jθ keeps the slots.
    """
    r1 = FourierCoeffs(a=hat_bd[:, 0].copy(), b=hat_ac[:, 0].copy())
    r2 = FourierCoeffs(a=hat_ac[:, 1].copy(), b=hat_bd[:, 1].copy())
    return r1, r2


def _unmerge(r1: FourierCoeffs, r2: FourierCoeffs):
    """Inverse of ``_merge``: (â, ĉ) and (b̂, d̂) from output coefficients."""
    return np.stack([r1.b, r2.a], axis=-1), np.stack([r1.a, r2.b], axis=-1)


def _unsplit(ac: np.ndarray, bd: np.ndarray):
    return FourierCoeffs(ac[:, 0].copy(), bd[:, 0].copy()), FourierCoeffs(ac[:, 1].copy(), bd[:, 1].copy())


def _mask_edges(x: np.ndarray) -> np.ndarray:
    x = x.copy()
    x[0] = 0.0
    x[-1] = 0.0          # Nyquist mode is excluded from the block solve
    return x


def apply_L0(op: BlockOperator, h1: FourierCoeffs, h2: FourierCoeffs):
    ac, bd = _split(h1, h2)
    hat_ac = _mask_edges(np.einsum("jkl,jl->jk", op.M, ac))
    hat_bd = _mask_edges(np.einsum("jkl,jl->jk", op.N, bd))
    return _merge(hat_ac, hat_bd)


def mode1_defect(kappa: float, r1: FourierCoeffs, r2: FourierCoeffs) -> np.ndarray:
    """(−κ∮−r1 sin − ∮−r2 cos, κ∮−r1 cos − ∮−r2 sin)."""
    return 0.5 * np.array([-kappa * r1.b[1] - r2.a[1], kappa * r1.a[1] - r2.b[1]])


def project_Y(op: BlockOperator, r1: FourierCoeffs, r2: FourierCoeffs):
    """Least-squares projection onto Y_i plus the 2-vector mode-1 defect."""
    k = op.kappa
    defect = mode1_defect(k, r1, r2)
    p1, q1 = r1.copy(), r2.copy()
    t = (r1.b[1] - k * r2.a[1]) / (1.0 + k**2)
    p1.b[1], q1.a[1] = t, -k * t
    t = (r1.a[1] + k * r2.b[1]) / (1.0 + k**2)
    p1.a[1], q1.b[1] = t, k * t
    return p1, q1, defect


def apply_L0_inverse(op: BlockOperator, r1: FourierCoeffs, r2: FourierCoeffs, tol: float = COMPAT_TOL):
    """L₀⁻¹ : Y_i → X_i, using the closed-form inverses and the mode-1 row."""
    k = op.kappa
    scale = max(1.0, float(np.max(np.abs(np.concatenate([r1.a, r1.b, r2.a, r2.b])))))
    if np.max(np.abs(mode1_defect(k, r1, r2))) > tol * scale:
        raise ConsistencyError("residual violates the mode-1 compatibility of Y_i")
    hat_ac, hat_bd = _unmerge(r1, r2)
    ac = np.zeros_like(hat_ac)
    bd = np.zeros_like(hat_bd)
    ac[2:-1] = np.einsum("jkl,jl->jk", op.Minv[2:-1], hat_ac[2:-1])
    bd[2:-1] = np.einsum("jkl,jl->jk", op.Ninv[2:-1], hat_bd[2:-1])
    p1, q1 = r1.b[1], r1.a[1]
    ac[1] = (-p1 / k, p1)
    bd[1] = (q1 / k, -q1)
    return _unsplit(ac, bd)
