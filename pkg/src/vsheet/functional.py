"""Stationarity residuals F_{i,1}, F_{i,2} of the vortex-sheet system.

With e = (cos θ, sin θ), t = (−sin θ, cos θ) and T_i = R_i t + ε f_i' e
(so z_i' = ε T_i), the residuals are rescalings of the Birkhoff-Rott
velocity V on sheet i:

    F_{i,1} = (2π/R_i) V·T_i^⊥,        F̃_{i,2} = (2π g̃_i/D0_i) V·T_i,

where g̃ = κ + εg, D0 = R² + ε²f'² = |T|², and (a, b)^⊥ = (b, −a).  Hence
F_{i,1} ∝ BR·n and F_{i,2} = (I − P₀)F̃_{i,2} ∝ (I − P₀)[γ BR·s].

Self-interaction
----------------
|z(θ) − z(α)|² = ε² A D with A = 4 sin²((θ−α)/2) and the smooth factor
D = R(θ)R(α) + ε² E, E = (f(θ) − f(α))²/A.  Splitting

    1/(A D) = 1/(A D0(θ)) + ε Gm/(A D D0),   Gm = (D0 − D)/ε,

the first part has a θ-only denominator and yields exact Hilbert and
half-Laplacian terms; the second carries the extra factor Gm = O(θ − α)
and is integrated by the trapezoid rule with analytic diagonal values.
No term divides by ε except a θ-independent constant in F̃_{i,2}, which
I − P₀ removes and is therefore never formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import domain as dom
from . import spectral as sp
from .errors import StateError
from .sheet import SheetState, effective_shape

TWO_PI = 2.0 * np.pi
EPS_MIN = -0.05


@dataclass
class FunctionalValue:
    F1: np.ndarray
    F2: np.ndarray
    mode1: np.ndarray
    sup_norm: float

    def to_dict(self) -> dict:
        return {
            "F1": self.F1.tolist(),
            "F2": self.F2.tolist(),
            "mode1": self.mode1.tolist(),
            "sup_norm": self.sup_norm,
        }


@dataclass
class _Pair:
    """Off-diagonal kernel matrices of one sheet against itself."""

    cot2: np.ndarray      # sin(θ−α)/A = cot((θ−α)/2)/2
    inv_a: np.ndarray     # 1/A
    off: np.ndarray       # boolean mask θ ≠ α


_PAIR_CACHE: dict[int, _Pair] = {}


def _pair(n: int) -> _Pair:
    if n not in _PAIR_CACHE:
        th = sp.grid(n)
        u = th[:, None] - th[None, :]
        off = ~np.eye(n, dtype=bool)
        a = 4.0 * np.sin(0.5 * u) ** 2
        inv_a = np.zeros((n, n))
        inv_a[off] = 1.0 / a[off]
        cot2 = np.zeros((n, n))
        cot2[off] = 0.5 / np.tan(0.5 * u[off])
        _PAIR_CACHE[n] = _Pair(cot2, inv_a, off)
    return _PAIR_CACHE[n]


def _self_terms(kappa: float, eps: float, f: np.ndarray, g: np.ndarray):
    """Self-interaction parts of F_{i,1} and F̃_{i,2} (the latter modulo constants)."""
    n = f.size
    p = _pair(n)
    fp = sp.derivative(f)
    fpp = sp.derivative(fp)
    R = 1.0 + eps * f
    gt = kappa + eps * g
    D0 = R**2 + (eps * fp) ** 2

    df = f[:, None] - f[None, :]
    E = df**2 * p.inv_a
    np.fill_diagonal(E, fp**2)
    D = R[:, None] * R[None, :] + eps**2 * E
    Gm = R[:, None] * df + eps * (fp[:, None] ** 2 - E)
    w = (R * gt)[None, :] / (D * D0[:, None])          # R(α)g̃(α)/(D D0)
    slope = fp * (R + eps * fpp)                        # lim Gm/(θ−α)

    # S1 = ∮− R̃ g̃ cot((θ−α)/2)/2 · Gm/(D D0)
    k1 = w * p.cot2 * Gm
    np.fill_diagonal(k1, R * gt * slope / D0**2)
    s1 = k1.mean(axis=1)
    # J1 = ∮− R̃ g̃ Gm/(D D0)   (integrand vanishes on the diagonal)
    k2 = w * Gm
    np.fill_diagonal(k2, 0.0)
    j1 = k2.mean(axis=1)
    # S3 = ∮− (f(θ)−f(α))/A · g̃(α) Gm/(D D0)
    k3 = (gt[None, :] / (D * D0[:, None])) * df * p.inv_a * Gm
    np.fill_diagonal(k3, gt * fp * slope / D0**2)
    s3 = k3.mean(axis=1)

    c0 = np.mean(R * gt)
    hil = sp.hilbert(kappa * f + g + eps * f * g)
    lam = kappa * sp.half_laplacian(f) + eps * (sp.half_laplacian(f * g) - f * sp.half_laplacian(g))
    pf = lam / (2.0 * D0) + eps * s3                    # ∮− (f(θ)−f(α)) g̃(α)/(A D)

    f11 = hil / (2.0 * D0) + s1
    f12 = fp * (c0 / D0 + eps * j1) / (2.0 * R)
    f13 = eps * fp * pf / R
    d1 = 2.0 * f + eps * (f**2 + fp**2)                 # (D0 − 1)/ε
    q2 = (kappa * (f - d1 * (D0 + 1.0)) + g * R) / D0**2  # (g̃R/D0² − κ)/ε
    f21 = eps * gt * fp * f11 / D0
    f22 = -0.5 * c0 * q2 - gt * R * j1 / (2.0 * D0)
    f23 = -(gt * R / D0) * pf
    return f11 + f12 + f13, f21 + f22 + f23


def _sheet_data(state: SheetState, i: int):
    f, g = effective_shape(state, i)
    eps = state.epsilon
    th = state.theta
    e = np.column_stack([np.cos(th), np.sin(th)])
    t = np.column_stack([-np.sin(th), np.cos(th)])
    fp = sp.derivative(f)
    R = 1.0 + eps * f
    z = state.centers[i] + eps * R[:, None] * e
    T = R[:, None] * t + eps * fp[:, None] * e
    gt = state.strengths[i] + eps * g
    return f, g, z, T, gt


def external_velocity(state: SheetState, i: int, data=None) -> np.ndarray:
    """Velocity on sheet i from the other sheets and from every image term.

    U = Σ_{j≠i} (1/2π) ∮− (z_i − z_j)^⊥/|z_i − z_j|² g̃_j dα
        + Σ_j ∮− ∇^⊥_x H(z_i, z_j) g̃_j dα.
    """
    data = data or [_sheet_data(state, j) for j in range(state.m)]
    zi = data[i][2]
    u = np.zeros_like(zi)
    for j in range(state.m):
        zj, gj = data[j][2], data[j][4]
        if j != i:
            r = zi[:, None, :] - zj[None, :, :]
            r2 = np.sum(r * r, axis=-1)
            if np.min(r2) <= 0.0:
                raise StateError(f"sheets {i} and {j} touch")
            perp = np.stack([r[..., 1], -r[..., 0]], axis=-1)
            u += np.mean(perp / r2[..., None] * gj[None, :, None], axis=1) / TWO_PI
        gh = dom.grad_h_many(state.domain, zi[:, None, :], zj[None, :, :])
        if np.any(gh):
            gh_perp = np.stack([gh[..., 1], -gh[..., 0]], axis=-1)
            u += np.mean(gh_perp * gj[None, :, None], axis=1)
    return u


def _check_eps(state: SheetState) -> None:
    if state.epsilon < EPS_MIN:
        raise StateError(f"eps below {EPS_MIN} is outside the supported range")
    for i in range(state.m):
        f, _ = effective_shape(state, i)
        if np.any(1.0 + state.epsilon * f <= 0.0):
            raise StateError(f"sheet {i}: R = 1 + eps f must stay positive")
    if not dom.contains(state.domain, state.centers):
        raise StateError("centers must lie inside the domain")


def _residual_pair(state: SheetState, i: int, data) -> tuple[np.ndarray, np.ndarray]:
    f, g, z, T, gt = data[i]
    eps = state.epsilon
    kappa = state.strengths[i]
    if eps != 0.0 and not dom.contains(state.domain, z):
        raise StateError(f"sheet {i} leaves the domain")
    s1, s2 = _self_terms(kappa, eps, f, g)
    u = external_velocity(state, i, data)
    R = 1.0 + eps * f
    D0 = np.sum(T * T, axis=1)
    u_dot_tperp = u[:, 0] * T[:, 1] - u[:, 1] * T[:, 0]
    u_dot_t = np.sum(u * T, axis=1)
    F1 = s1 + TWO_PI * u_dot_tperp / R
    F2 = sp.project_zero_mean(s2 + TWO_PI * gt * u_dot_t / D0)
    return F1, F2


def evaluate(state: SheetState) -> FunctionalValue:
    """F_{i,1}, F_{i,2} for all sheets, with mode-1 data and the sup-norm."""
    if state.epsilon == 0.0:
        x, k = state.centers, state.strengths
        pairs = []
        for i in range(state.m):
            f, g = effective_shape(state, i)
            fs = [effective_shape(state, j)[0] for j in range(state.m)]
            gs = [effective_shape(state, j)[1] for j in range(state.m)]
            pairs.append((eval_F1_limit(state.domain, x, k, fs, gs, i),
                          eval_F2_limit(state.domain, x, k, fs, gs, i)))
    else:
        _check_eps(state)
        data = [_sheet_data(state, j) for j in range(state.m)]
        pairs = [_residual_pair(state, i, data) for i in range(state.m)]
    F1 = np.array([p[0] for p in pairs])
    F2 = np.array([p[1] for p in pairs])
    mode1 = np.array([_mode1(F1[i], F2[i]) for i in range(state.m)])
    sup = float(max(np.max(np.abs(F1)), np.max(np.abs(F2))))
    return FunctionalValue(F1, F2, mode1, sup)


def eval_F1(state: SheetState, i: int) -> np.ndarray:
    return evaluate(state).F1[i]


def eval_F2(state: SheetState, i: int) -> np.ndarray:
    return evaluate(state).F2[i]


def _point_vortex_drift(d, centers, strengths, i) -> np.ndarray:
    """P_i = Σ_{j≠i} κ_j ∇_x G(x_i, x_j) − κ_i ∇_x H(x_i, x_i)."""
    x = np.asarray(centers, dtype=float).reshape(-1, 2)
    k = np.asarray(strengths, dtype=float).reshape(-1)
    p = -k[i] * dom.grad_h_x(d, x[i], x[i])
    for j in range(len(k)):
        if j != i:
            p = p + k[j] * dom.grad_green_x(d, x[i], x[j])
    return p


def eval_F1_limit(d, centers, strengths, f, g, i) -> np.ndarray:
    """F_{i,1} at ε = 0: ½ hilbert(g_i) + (κ_i/2) f_i' − 2π P_i·(−sin θ, cos θ).

    ``f`` and ``g`` are sequences of per-sheet samples (only sheet i is read).
    """
    fi = sp.check_samples(f[i])
    gi = sp.check_samples(g[i])
    k = float(np.asarray(strengths, dtype=float).reshape(-1)[i])
    th = sp.grid(fi.size)
    p = _point_vortex_drift(d, centers, strengths, i)
    p_dot_t = -p[0] * np.sin(th) + p[1] * np.cos(th)
    return 0.5 * sp.hilbert(gi) + 0.5 * k * sp.derivative(fi) - TWO_PI * p_dot_t


def eval_F2_limit(d, centers, strengths, f, g, i) -> np.ndarray:
    """F_{i,2} at ε = 0: (I − P₀)[κ²f − (κ²/2)|D|f − (κ/2)g − 2πκ P_i^⊥·(−sin θ, cos θ)]."""
    fi = sp.check_samples(f[i])
    gi = sp.check_samples(g[i])
    k = float(np.asarray(strengths, dtype=float).reshape(-1)[i])
    th = sp.grid(fi.size)
    p = _point_vortex_drift(d, centers, strengths, i)
    pperp_dot_t = -p[1] * np.sin(th) - p[0] * np.cos(th)
    out = k**2 * fi - 0.5 * k**2 * sp.half_laplacian(fi) - 0.5 * k * gi - TWO_PI * k * pperp_dot_t
    return sp.project_zero_mean(out)


def _mode1(F1: np.ndarray, F2: np.ndarray) -> np.ndarray:
    a1, b1 = sp.low_modes(F1)
    a2, b2 = sp.low_modes(F2)
    return 0.5 * np.array([a1, b1, a2, b2])


def mode1_extract(fv: FunctionalValue, i: int) -> tuple[float, float, float, float]:
    """(∮−F1 cos, ∮−F1 sin, ∮−F2 cos, ∮−F2 sin) for sheet i."""
    return tuple(float(v) for v in fv.mode1[i])
