"""Kirchhoff-Routh function W_m and its nondegenerate critical points."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import domain as dom
from .domain import DomainModel
from .errors import InputError

log = logging.getLogger(__name__)

COLLISION_TOL = 1e-4
DISTINCT_TOL = 1e-6
NONDEGENERACY_RATIO = 1e-6
ESCAPE_RADIUS = 1e4


@dataclass(frozen=True)
class VortexConfig:
    """m point vortices: centers x_i (shape (m, 2)) and strengths κ_i."""

    centers: np.ndarray
    strengths: np.ndarray

    def __post_init__(self):
        c = np.array(self.centers, dtype=float).reshape(-1, 2)
        k = np.array(self.strengths, dtype=float).reshape(-1)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "strengths", k)

    @property
    def m(self) -> int:
        return len(self.strengths)

    def with_centers(self, centers) -> "VortexConfig":
        return VortexConfig(np.asarray(centers, dtype=float).reshape(-1, 2), self.strengths)

    def flat(self) -> np.ndarray:
        return self.centers.ravel().copy()


def validate_config(d: DomainModel, c: VortexConfig) -> None:
    if c.m < 1 or len(c.centers) != c.m:
        raise InputError("need m >= 1 centers with one strength each")
    if not np.all(np.isfinite(c.strengths)) or np.any(c.strengths == 0.0):
        raise InputError("strengths must be finite and nonzero")
    if not dom.contains(d, c.centers):
        raise InputError(f"centers must lie strictly inside the {d.key} domain")
    if _min_separation(c.centers) <= DISTINCT_TOL:
        raise InputError("centers must be pairwise distinct")


def _min_separation(centers: np.ndarray) -> float:
    if len(centers) < 2:
        return np.inf
    diff = centers[:, None, :] - centers[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    return float(np.min(dist[~np.eye(len(centers), dtype=bool)]))


def eval_W(d: DomainModel, c: VortexConfig) -> float:
    """W_m = −Σ_{i≠j} κ_iκ_j G(x_i, x_j) + Σ_i κ_i² H(x_i, x_i), ordered pairs."""
    validate_config(d, c)
    x, k = c.centers, c.strengths
    total = 0.0
    for i in range(c.m):
        total += k[i] ** 2 * dom.h_regular(d, x[i], x[i])
        for j in range(c.m):
            if j != i:
                total -= k[i] * k[j] * dom.green(d, x[i], x[j])
    return float(total)


def grad_W(d: DomainModel, c: VortexConfig) -> np.ndarray:
    """Analytic gradient, flattened as (∂x_{1,1}, ∂x_{1,2}, ∂x_{2,1}, ...)."""
    validate_config(d, c)
    x, k = c.centers, c.strengths
    g = np.zeros((c.m, 2))
    for i in range(c.m):
        g[i] = k[i] ** 2 * dom.grad_robin(d, x[i])
        for j in range(c.m):
            if j != i:
                g[i] -= 2.0 * k[i] * k[j] * dom.grad_green_x(d, x[i], x[j])
    return g.ravel()


def hess_W(d: DomainModel, c: VortexConfig, step: float = 1e-5, symmetrize: bool = True) -> np.ndarray:
    """Central finite-difference Hessian of grad_W, symmetrized by default."""
    validate_config(d, c)
    x0 = c.flat()
    n = x0.size
    hess = np.empty((n, n))
    for col in range(n):
        e = np.zeros(n)
        e[col] = step
        gp = grad_W(d, c.with_centers(x0 + e))
        gm = grad_W(d, c.with_centers(x0 - e))
        hess[:, col] = (gp - gm) / (2.0 * step)
    if symmetrize:
        hess = 0.5 * (hess + hess.T)
    return hess


def reduced_hessian(d: DomainModel, c: VortexConfig, hess: np.ndarray | None = None):
    """Hessian restricted to the complement of the domain's symmetry generators.

    Returns (Q, H_red) where the columns of Q are an orthonormal basis of
    the complement and H_red = Qᵀ H Q.
    """
    if hess is None:
        hess = hess_W(d, c)
    gens = dom.symmetry_generators(d, c.centers)
    n = hess.shape[0]
    if len(gens) == 0:
        return np.eye(n), hess
    # complete the generator span to an orthonormal basis; keep the rest
    q, _ = np.linalg.qr(np.column_stack([gens.T, np.eye(n)]))
    k = np.linalg.matrix_rank(gens)
    basis = q[:, k:n]
    return basis, basis.T @ hess @ basis


def _nondegenerate(eigs: np.ndarray) -> bool:
    a = np.abs(eigs)
    return bool(a.size and a.max() > 0 and a.min() > NONDEGENERACY_RATIO * a.max())


@dataclass
class CriticalPointOptions:
    max_iter: int = 100
    tol: float = 1e-10
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_halvings: int = 40


@dataclass
class CriticalPointReport:
    """Outcome of find_critical.

    ``nondegenerate`` applies the plain Hessian test.  The disk, half-plane
    and free plane all carry continuous symmetries, so critical points with
    m ≥ 2 (or off-centre ones) are never isolated; ``reduced_nondegenerate``
    repeats the test on the complement of the symmetry orbit.
    """

    point: VortexConfig
    gradient_norm: float
    hessian_spectrum: list
    nondegenerate: bool
    converged: bool = False
    reduced_nondegenerate: bool = False
    reduced_spectrum: list = field(default_factory=list)
    iterations: int = 0
    message: str = ""

    @property
    def usable(self) -> bool:
        """True when the point can anchor the construction."""
        return self.converged and (self.nondegenerate or self.reduced_nondegenerate)

    def to_dict(self) -> dict:
        return {
            "centers": self.point.centers.tolist(),
            "strengths": self.point.strengths.tolist(),
            "gradient_norm": self.gradient_norm,
            "hessian_spectrum": list(self.hessian_spectrum),
            "nondegenerate": self.nondegenerate,
            "reduced_nondegenerate": self.reduced_nondegenerate,
            "reduced_spectrum": list(self.reduced_spectrum),
            "converged": self.converged,
            "iterations": self.iterations,
            "message": self.message,
        }


def _admissible(d: DomainModel, x: np.ndarray) -> bool:
    pts = x.reshape(-1, 2)
    return (
        dom.contains(d, pts)
        and _min_separation(pts) > COLLISION_TOL
        and float(np.max(np.abs(pts))) < ESCAPE_RADIUS
    )


def find_critical(d: DomainModel, seed: VortexConfig, opts: CriticalPointOptions | None = None) -> CriticalPointReport:
    """Damped Newton iteration on ∇W_m = 0 from ``seed``.

    Each step solves H δ = −∇W in the least-squares sense (so symmetry null
    directions of H are ignored), then backtracks on ‖∇W‖² with the Armijo
    rule.  Steps that leave the domain, collide two centers or run off to
    infinity are halved.  When the Newton direction yields no decrease the
    step falls back to steepest descent on ‖∇W‖².
    """
    opts = opts or CriticalPointOptions()
    validate_config(d, seed)
    x = seed.flat()

    def phi(z):
        gz = grad_W(d, seed.with_centers(z))
        return gz, float(gz @ gz)

    g, f = phi(x)
    message = "maximum iterations reached"
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        if np.sqrt(f) < opts.tol:
            converged = True
            message = "converged"
            it -= 1
            break
        hess = hess_W(d, seed.with_centers(x))
        directions = []
        if np.any(hess):
            delta, *_ = np.linalg.lstsq(hess, -g, rcond=1e-12)
            if np.all(np.isfinite(delta)):
                directions.append(("newton", delta, -2.0 * f))
        descent = -hess @ g
        slope = -2.0 * float(descent @ descent)
        if slope < 0:
            directions.append(("gradient", descent, slope))
        stepped = False
        for name, delta, slope in directions:
            t = 1.0
            for _ in range(opts.max_halvings):
                trial = x + t * delta
                if _admissible(d, trial):
                    g_new, f_new = phi(trial)
                    if f_new <= f + opts.armijo * t * slope:
                        x, g, f = trial, g_new, f_new
                        stepped = True
                        break
                t *= opts.backtrack
            if stepped:
                log.debug("find_critical it=%d %s step t=%.3g |grad|=%.3e", it, name, t, np.sqrt(f))
                break
        if not stepped:
            message = "line search failed (no admissible decrease)"
            break
    else:
        if np.sqrt(f) < opts.tol:
            converged = True
            message = "converged"

    point = seed.with_centers(x)
    hess = hess_W(d, point)
    eigs = np.linalg.eigvalsh(hess)
    _, hred = reduced_hessian(d, point, hess)
    red_eigs = np.linalg.eigvalsh(hred) if hred.size else np.array([])
    nondeg = converged and _nondegenerate(eigs)
    red_nondeg = converged and _nondegenerate(red_eigs)
    if converged and not nondeg and not red_nondeg:
        message = "converged to a degenerate critical point"
    return CriticalPointReport(
        point=point,
        gradient_norm=float(np.sqrt(f)),
        hessian_spectrum=eigs.tolist(),
        nondegenerate=nondeg,
        converged=converged,
        reduced_nondegenerate=red_nondeg,
        reduced_spectrum=red_eigs.tolist(),
        iterations=it,
        message=message,
    )
