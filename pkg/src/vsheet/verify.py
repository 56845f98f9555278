"""Independent verification oracles.

Nothing here touches the kernel splitting of ``functional``.  The
self-induced principal-value integral is evaluated with the alternating-point
trapezoid rule: for a target node θ_k only nodes θ_l with l − k odd are
summed, with doubled weight.  The rule is spectrally accurate for periodic
integrands with a cot((θ−α)/2) singularity and needs no diagonal value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import domain as dom
from . import spectral as sp
from .errors import InputError
from .sheet import SheetState, curve_geometry, effective_shape, project_X

TWO_PI = 2.0 * np.pi


def _points_and_density(state: SheetState, j: int):
    f, g = effective_shape(state, j)
    th = state.theta
    eps = state.epsilon
    r = eps * (1.0 + eps * f)
    z = state.centers[j] + r[:, None] * np.column_stack([np.cos(th), np.sin(th)])
    sigma = (state.strengths[j] + eps * g) / TWO_PI      # γ|z'| per unit θ
    return z, sigma


def br_velocity(state: SheetState, i: int, targets=None) -> np.ndarray:
    """Σ_j BR(z_j, γ_j)(z_i(θ_k)) at grid indices ``targets`` of sheet i.

    BR(z, γ)(x) = (1/2π) P.V.∫ (x − z(α))^⊥/|x − z(α)|² γ|z'| dα
                  + ∫ ∇^⊥_x H(x, z(α)) γ|z'| dα,   (a, b)^⊥ = (b, −a).
    """
    n = state.n
    if n % 2:
        raise InputError("alternating-point rule needs an even grid")
    if state.epsilon <= 0.0:
        raise InputError("br_velocity needs eps > 0")
    idx = np.arange(n) if targets is None else np.asarray(targets, dtype=int)
    h = TWO_PI / n
    zs = [_points_and_density(state, j) for j in range(state.m)]
    x = zs[i][0][idx]
    vel = np.zeros((idx.size, 2))
    for j, (zj, sj) in enumerate(zs):
        r = x[:, None, :] - zj[None, :, :]
        if j == i:
            parity = (np.arange(n)[None, :] - idx[:, None]) % 2 == 1
            weight = np.where(parity, 2.0 * h, 0.0)
            r2 = np.where(parity, np.sum(r * r, axis=-1), 1.0)
        else:
            weight = np.full((idx.size, n), h)
            r2 = np.sum(r * r, axis=-1)
        kern = np.stack([r[..., 1], -r[..., 0]], axis=-1) / r2[..., None] / TWO_PI
        vel += np.sum(kern * (weight * sj[None, :])[..., None], axis=1)
        gh = dom.grad_h_many(state.domain, x[:, None, :], zj[None, :, :])
        gperp = np.stack([gh[..., 1], -gh[..., 0]], axis=-1)
        vel += np.sum(gperp * (h * sj)[None, :, None], axis=1)
    return vel


def _residuals_at(state: SheetState):
    normal, tangential = [], []
    for i in range(state.m):
        geo = curve_geometry(state, i)
        v = br_velocity(state, i)
        _, g = effective_shape(state, i)
        gamma = (state.strengths[i] + state.epsilon * g) / (TWO_PI * geo.speed)
        normal.append(np.sum(v * geo.normals, axis=1))
        tangential.append(sp.project_zero_mean(np.sum(v * geo.tangents, axis=1) * gamma))
    return normal, tangential


def refine(state: SheetState, n_new: int) -> SheetState:
    """The same state represented on a grid of n_new points."""
    f = np.array([sp.resample(state.f[i], n_new) for i in range(state.m)])
    g = np.array([sp.resample(state.g[i], n_new) for i in range(state.m)])
    return state.evolve(f=f, g=g)


@dataclass
class ResidualReport:
    normal: list
    tangential: list
    oracle_n: int
    oracle_error: float
    normal_samples: list = field(default_factory=list, repr=False)
    tangential_samples: list = field(default_factory=list, repr=False)

    @property
    def max_residual(self) -> float:
        return float(max(max(self.normal), max(self.tangential)))

    def to_dict(self) -> dict:
        return {
            "normal_sup": self.normal,
            "tangential_sup": self.tangential,
            "max_residual": self.max_residual,
            "oracle_n": self.oracle_n,
            "oracle_error": self.oracle_error,
        }


def direct_residual(state: SheetState) -> ResidualReport:
    """sup|BR·n| and sup|(I − P₀)[BR·s γ]| per sheet, with γ = γ_i per unit length.

    The oracle error is the largest grid-point difference between the
    residuals evaluated on N and on 2N points.
    """
    normal, tangential = _residuals_at(state)
    fine_n, fine_t = _residuals_at(refine(state, 2 * state.n))
    err = 0.0
    for i in range(state.m):
        err = max(err, np.max(np.abs(normal[i] - fine_n[i][::2])),
                  np.max(np.abs(tangential[i] - fine_t[i][::2])))
    return ResidualReport(
        normal=[float(np.max(np.abs(v))) for v in normal],
        tangential=[float(np.max(np.abs(v))) for v in tangential],
        oracle_n=state.n,
        oracle_error=float(err),
        normal_samples=normal,
        tangential_samples=tangential,
    )


# ---------------------------------------------------------------------------
# exactly known principal-value integrals
# ---------------------------------------------------------------------------

PV_IDENTITY_NAMES = ("cos_cot", "sin_cot", "cos_diff", "sin_diff")


def pv_identity_integrals(n: int, j: int) -> np.ndarray:
    """Quadrature values of the four averaged integrals, shape (4, n).

    With u = θ − α and w(u) = 1/(4 sin²(u/2)):
      ⨍ cos(jα) sin(u) w dα,  ⨍ sin(jα) sin(u) w dα    alternating-point rule,
      ⨍ (cos jθ − cos jα) w dα, ⨍ (sin jθ − sin jα) w dα trapezoid over α ≠ θ
    plus the diagonal limit −φ''(θ)/2 of the second pair (the odd 1/u part
    cancels between symmetric nodes).
    """
    if n % 2 or n < 4:
        raise InputError("need an even grid of at least 4 points")
    th = TWO_PI * np.arange(n) / n
    off = np.arange(n)[None, :] - np.arange(n)[:, None]
    u = th[:, None] - th[None, :]
    odd = off % 2 == 1
    diag = off == 0
    s_half = np.where(diag, 1.0, np.sin(u / 2))
    w = np.where(diag, 0.0, 1.0 / (4.0 * s_half**2))
    ca, sa = np.cos(j * th), np.sin(j * th)
    kern_pv = np.where(odd, np.sin(u) * w, 0.0) * (2.0 / n)
    out = np.empty((4, n))
    out[0] = kern_pv @ ca
    out[1] = kern_pv @ sa
    out[2] = (w * (ca[:, None] - ca[None, :])).sum(axis=1) / n + 0.5 * j * j * ca / n
    out[3] = (w * (sa[:, None] - sa[None, :])).sum(axis=1) / n + 0.5 * j * j * sa / n
    return out


def pv_identity_expected(n: int, j: int) -> np.ndarray:
    th = TWO_PI * np.arange(n) / n
    c, s = np.cos(j * th), np.sin(j * th)
    return np.array([0.5 * s, -0.5 * c, 0.5 * j * c, 0.5 * j * s])


def pv_identity_spectral(n: int, j: int) -> np.ndarray:
    """The same four integrals through the Hilbert and half-Laplacian multipliers."""
    th = TWO_PI * np.arange(n) / n
    c, s = np.cos(j * th), np.sin(j * th)
    return 0.5 * np.array([sp.hilbert(c), sp.hilbert(s), sp.half_laplacian(c), sp.half_laplacian(s)])


def pv_identity_errors(n: int, j_max: int, j_min: int = 1) -> dict:
    """Worst error per identity and route over j = j_min..j_max."""
    quad = np.zeros(4)
    spec = np.zeros(4)
    for j in range(j_min, j_max + 1):
        exp = pv_identity_expected(n, j)
        quad = np.maximum(quad, np.max(np.abs(pv_identity_integrals(n, j) - exp), axis=1))
        spec = np.maximum(spec, np.max(np.abs(pv_identity_spectral(n, j) - exp), axis=1))
    return {
        "quadrature": dict(zip(PV_IDENTITY_NAMES, map(float, quad))),
        "spectral": dict(zip(PV_IDENTITY_NAMES, map(float, spec))),
    }


def lemma41_check(n: int, j_max: int) -> float:
    """Worst quadrature error of the four identities over j = 1..j_max."""
    errs = pv_identity_errors(n, j_max)
    return float(max(errs["quadrature"].values()))


# ---------------------------------------------------------------------------
# point-vortex limit
# ---------------------------------------------------------------------------

def first_moment(state: SheetState, i: int) -> np.ndarray:
    """∫ z dω_i by trapezoid quadrature of z_i(α) γ_i(α)|z_i'(α)|."""
    z, sigma = _points_and_density(state, i)
    return TWO_PI * np.mean(z * sigma[:, None], axis=0)


def _slope(eps: np.ndarray, values: np.ndarray):
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        return None
    return float(np.polyfit(np.log(eps), np.log(values), 1)[0])


@dataclass
class LimitFit:
    epsilons: list
    center_offsets: list
    f_norms: list
    moment_errors: list
    circulation_errors: list
    slopes: dict

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def point_vortex_limit_check(traces) -> LimitFit:
    """Log-log slopes of center offset, ‖f‖_∞ and first-moment error in ε.

    A slope is ``None`` when the measured quantity vanishes identically
    (for instance the center offset of a symmetric configuration).
    """
    rows = []
    for tr in traces:
        if not tr.converged or tr.state is None:
            continue
        st = tr.state
        x0 = np.asarray(tr.x0.centers, dtype=float)
        off = float(np.max(np.linalg.norm(st.centers - x0, axis=1)))
        fnorm = float(np.max(np.abs(st.f)))
        mom = max(
            float(np.linalg.norm(first_moment(st, i) - st.strengths[i] * x0[i])) for i in range(st.m)
        )
        circ = max(
            abs(float(np.mean(st.strengths[i] + st.epsilon * st.g[i]) - st.strengths[i])) for i in range(st.m)
        )
        rows.append((st.epsilon, off, fnorm, mom, circ))
    if len(rows) < 3:
        raise InputError("need at least three converged epsilon values for a fit")
    rows.sort()
    eps, off, fnorm, mom, circ = (list(col) for col in zip(*rows))
    e = np.array(eps)
    return LimitFit(
        epsilons=eps,
        center_offsets=off,
        f_norms=fnorm,
        moment_errors=mom,
        circulation_errors=circ,
        slopes={
            "center_offset": _slope(e, off),
            "f_norm": _slope(e, fnorm),
            "moment_error": _slope(e, mom),
        },
    )
