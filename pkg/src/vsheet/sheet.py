"""Vortex-sheet configurations and their curve geometry.

Sheet i is the closed curve

    z_i(θ) = x_i + ε R_i(θ) (cos θ, sin θ),   R_i = 1 + ε f_i,

carrying circulation density γ_i |z_i'| = (κ_i + ε g_i) / 2π per unit θ.
The unknowns f_i, g_i live in X_i: zero mean, and the cos θ / sin θ
coefficients of g_i equal −κ_i times those of f_i.  The complementary
kernel direction (f0, g0) = (cos θ, κ_i cos θ) enters with weight τ.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, replace

import numpy as np

from . import domain as dom
from . import spectral as sp
from .domain import DomainModel
from .errors import InputError, StateError

STATE_FORMAT = "vsheet-state"


@dataclass(frozen=True)
class SheetState:
    epsilon: float
    tau: float
    domain: DomainModel
    centers: np.ndarray
    strengths: np.ndarray
    f: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        c = np.array(self.centers, dtype=float).reshape(-1, 2)
        k = np.array(self.strengths, dtype=float).reshape(-1)
        f = np.array(self.f, dtype=float)
        g = np.array(self.g, dtype=float)
        if f.ndim == 1:
            f = f[None, :]
        if g.ndim == 1:
            g = g[None, :]
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "strengths", k)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "tau", float(self.tau))
        if not (len(c) == len(k) == len(f) == len(g)):
            raise InputError("centers, strengths, f and g must describe the same number of sheets")
        if f.shape != g.shape:
            raise InputError("f and g must share one grid")
        sp.grid(f.shape[1])

    @property
    def m(self) -> int:
        return len(self.strengths)

    @property
    def n(self) -> int:
        return self.f.shape[1]

    @property
    def theta(self) -> np.ndarray:
        return sp.grid(self.n)

    @property
    def f0(self) -> np.ndarray:
        return np.cos(self.theta)

    def g0(self, i: int) -> np.ndarray:
        return self.strengths[i] * self.f0

    def evolve(self, **changes) -> "SheetState":
        return replace(self, **changes)

    @classmethod
    def circles(cls, d: DomainModel, centers, strengths, epsilon: float, tau: float = 0.0, n: int = 128):
        """Unperturbed state f = g = 0."""
        k = np.asarray(strengths, dtype=float).reshape(-1)
        z = np.zeros((len(k), n))
        return cls(epsilon, tau, d, centers, k, z, z.copy())


def effective_shape(state: SheetState, i: int) -> tuple[np.ndarray, np.ndarray]:
    """(f_i + τ f0, g_i + τ g0_i): the data fed to the functionals."""
    return state.f[i] + state.tau * state.f0, state.g[i] + state.tau * state.g0(i)


def project_X(f: np.ndarray, g: np.ndarray, kappa: float) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal projection of (f, g) onto X_i (zero mean, g₁ = −κ f₁, no Nyquist)."""
    cf, cg = sp.to_coeffs(f), sp.to_coeffs(g)
    for c in (cf, cg):
        c.a[0] = 0.0
        c.a[-1] = 0.0
    # minimise |Δf₁|² + |Δg₁|² subject to g₁ + κ f₁ = 0 (per cos/sin component)
    for arr_f, arr_g in ((cf.a, cg.a), (cf.b, cg.b)):
        r = arr_g[1] + kappa * arr_f[1]
        t = r / (1.0 + kappa**2)
        arr_f[1] -= kappa * t
        arr_g[1] -= t
    return sp.from_coeffs(cf), sp.from_coeffs(cg)


def validate_state(state: SheetState, tol: float = 1e-10) -> None:
    """Check the SheetState invariants; raise StateError on violation."""
    if not np.all(np.isfinite(state.f)) or not np.all(np.isfinite(state.g)):
        raise StateError("non-finite shape or density data")
    if np.any(state.strengths == 0.0):
        raise StateError("strengths must be nonzero")
    for i in range(state.m):
        k = state.strengths[i]
        if abs(np.mean(state.f[i])) > tol or abs(np.mean(state.g[i])) > tol:
            raise StateError(f"sheet {i}: f and g must have zero mean")
        fa, fb = sp.low_modes(state.f[i])
        ga, gb = sp.low_modes(state.g[i])
        if abs(ga + k * fa) > tol or abs(gb + k * fb) > tol:
            raise StateError(f"sheet {i}: mode-1 constraint g1 = -kappa f1 violated")
    if not dom.contains(state.domain, state.centers):
        raise StateError("centers must lie inside the domain")
    eps = state.epsilon
    if eps == 0.0:
        return
    pts = []
    for i in range(state.m):
        f, _ = effective_shape(state, i)
        if np.any(1.0 + eps * f <= 0.5):
            raise StateError(f"sheet {i}: 1 + eps f must stay above 1/2")
        pts.append(sheet_points(state, i))
    for i in range(state.m):
        if np.any(dom.boundary_distance(state.domain, pts[i]) <= abs(eps)):
            raise StateError(f"sheet {i} comes within eps of the boundary")
        for j in range(i):
            diff = pts[i][:, None, :] - pts[j][None, :, :]
            if np.min(np.hypot(diff[..., 0], diff[..., 1])) <= abs(eps):
                raise StateError(f"sheets {j} and {i} are closer than eps")


def sheet_points(state: SheetState, i: int) -> np.ndarray:
    f, _ = effective_shape(state, i)
    th = state.theta
    r = state.epsilon * (1.0 + state.epsilon * f)
    return state.centers[i] + r[:, None] * np.column_stack([np.cos(th), np.sin(th)])


@dataclass
class CurveGeometry:
    points: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray
    speed: np.ndarray
    curvature: np.ndarray


def curve_geometry(state: SheetState, i: int) -> CurveGeometry:
    """Points, unit tangent/outward normal, speed |z'| and curvature of sheet i."""
    eps = state.epsilon
    if eps <= 0.0:
        raise StateError("curve geometry needs eps > 0")
    f, _ = effective_shape(state, i)
    th = state.theta
    e = np.column_stack([np.cos(th), np.sin(th)])
    t = np.column_stack([-np.sin(th), np.cos(th)])
    R = 1.0 + eps * f
    R1 = eps * sp.derivative(f)
    R2 = eps * sp.derivative(sp.derivative(f))
    q = R**2 + R1**2
    speed = eps * np.sqrt(q)
    if np.any(speed <= 0.0):
        raise StateError("degenerate parameterization speed")
    dz = R1[:, None] * e + R[:, None] * t
    tangents = dz / np.sqrt(q)[:, None]
    normals = np.column_stack([tangents[:, 1], -tangents[:, 0]])
    curvature = (R**2 + 2.0 * R1**2 - R * R2) / (eps * q**1.5)
    points = state.centers[i] + eps * R[:, None] * e
    return CurveGeometry(points, tangents, normals, speed, curvature)


def circulation(state: SheetState, i: int) -> float:
    """∫ γ_i |z_i'| dα = κ_i + ε·mean(g_i)."""
    _, g = effective_shape(state, i)
    return float(state.strengths[i] + state.epsilon * np.mean(g))


def convexity_check(state: SheetState, i: int) -> bool:
    return bool(np.all(curve_geometry(state, i).curvature > 0.0))


def density(state: SheetState, i: int) -> np.ndarray:
    """γ_i |z_i'| = (κ_i + ε g_i)/2π on the grid."""
    _, g = effective_shape(state, i)
    return (state.strengths[i] + state.epsilon * g) / (2.0 * np.pi)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _coeff_dict(s: np.ndarray) -> dict:
    c = sp.to_coeffs(s)
    return {"a": c.a.tolist(), "b": c.b.tolist()}


def state_to_dict(state: SheetState) -> dict:
    return {
        "format": STATE_FORMAT,
        "version": 1,
        "epsilon": state.epsilon,
        "tau": state.tau,
        "domain": state.domain.key,
        "N": state.n,
        "sheets": [
            {
                "center": state.centers[i].tolist(),
                "strength": float(state.strengths[i]),
                "f": _coeff_dict(state.f[i]),
                "g": _coeff_dict(state.g[i]),
            }
            for i in range(state.m)
        ],
    }


def state_from_dict(data: dict) -> SheetState:
    try:
        if data.get("format") != STATE_FORMAT:
            raise InputError("not a vsheet state document")
        n = int(data["N"])
        sheets = data["sheets"]
        if not sheets:
            raise InputError("state has no sheets")
        f, g = [], []
        for s in sheets:
            for key, out in (("f", f), ("g", g)):
                a = np.asarray(s[key]["a"], dtype=float)
                b = np.asarray(s[key]["b"], dtype=float)
                if a.shape != (n // 2 + 1,) or b.shape != a.shape:
                    raise InputError(f"coefficient arrays of {key} must have length N/2+1")
                out.append(sp.from_coeffs(sp.FourierCoeffs(a, b)))
        return SheetState(
            epsilon=float(data["epsilon"]),
            tau=float(data["tau"]),
            domain=dom.from_key(data["domain"]),
            centers=[s["center"] for s in sheets],
            strengths=[s["strength"] for s in sheets],
            f=np.array(f),
            g=np.array(g),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed state document: {exc}") from exc


def state_to_json(state: SheetState) -> str:
    return json.dumps(state_to_dict(state), indent=1)


def state_from_json(text: str) -> SheetState:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("state document must be a JSON object")
    return state_from_dict(data)


def geometry_csv(state: SheetState) -> str:
    """Per-point curve table: sheet, theta, x, y, gamma_speed, curvature."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sheet", "theta", "x", "y", "gamma_speed", "curvature"])
    th = state.theta
    for i in range(state.m):
        geo = curve_geometry(state, i)
        dens = density(state, i)
        for k in range(state.n):
            row = (th[k], geo.points[k, 0], geo.points[k, 1], dens[k], geo.curvature[k])
            w.writerow([i] + [repr(float(v)) for v in row])
    return buf.getvalue()
