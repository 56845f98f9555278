"""ε-continuation solver for stationary vortex sheets.

At fixed (ε, τ) each outer iteration

1. moves the centers by Newton steps on the mode-1 compatibility defect,
   with the frozen Jacobian π·Hess W_m(x₀) (at ε = 0 the defect of sheet i
   equals π ∂_{x_i} W_m exactly), then
2. updates (f, g) ← (f, g) − L₀⁻¹ P_Y F, the quasi-Newton step with the
   exact ε = 0 linearization.

If the quasi-Newton phase has not converged after ``fallback_after`` outer
iterations, the remaining iterations use Newton's method on the whole
system with a finite-difference Jacobian.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import domain as dom
from . import functional as fn
from . import kirchhoff_routh as kr
from . import linear_model as lm
from . import spectral as sp
from .errors import InputError, NumericalFailure, StateError
from .kirchhoff_routh import VortexConfig
from .sheet import SheetState, validate_state

log = logging.getLogger(__name__)

CRITICAL_TOL = 1e-8


@dataclass
class SolveOptions:
    max_outer: int = 50
    tol_residual: float = 1e-10
    tol_center: float = 1e-10
    continuation_steps: list | None = None
    tau: float = 0.0
    N: int = 128
    max_center_steps: int = 20
    fallback_after: int = 10
    fd_step: float = 1e-7

    def schedule(self, epsilon: float) -> list:
        steps = self.continuation_steps or [epsilon / 8, epsilon / 4, epsilon / 2, epsilon]
        steps = [float(e) for e in steps]
        if not steps or any(e <= 0 for e in steps) or any(b <= a for a, b in zip(steps, steps[1:])):
            raise InputError("continuation steps must be positive and increasing")
        if self.tol_residual <= 0 or self.tol_center <= 0:
            raise InputError("tolerances must be positive")
        return steps


@dataclass
class SolveTrace:
    x0: VortexConfig
    history: list = field(default_factory=list)
    stages: list = field(default_factory=list)
    state: SheetState | None = None
    converged: bool = False
    last_good_epsilon: float | None = None
    message: str = ""

    @property
    def final_residual(self) -> float:
        return self.history[-1]["residual"] if self.history else float("nan")

    @property
    def final_defect(self) -> float:
        return self.history[-1]["defect"] if self.history else float("nan")

    def to_dict(self) -> dict:
        from .sheet import state_to_dict

        return {
            "converged": self.converged,
            "message": self.message,
            "last_good_epsilon": self.last_good_epsilon,
            "x0": {"centers": self.x0.centers.tolist(), "strengths": self.x0.strengths.tolist()},
            "stages": self.stages,
            "history": self.history,
            "state": state_to_dict(self.state) if self.state is not None else None,
        }


# ---------------------------------------------------------------------------
# center adjustment
# ---------------------------------------------------------------------------

def defects(state: SheetState, fv: fn.FunctionalValue) -> np.ndarray:
    """Per-sheet mode-1 compatibility defects, shape (m, 2)."""
    k = state.strengths[:, None]
    c1, s1, c2, s2 = (fv.mode1[:, q : q + 1] for q in range(4))
    return np.hstack([-k * s1 - c2, k * c1 - s2])


def center_inverse(d: dom.DomainModel, x0: VortexConfig) -> np.ndarray:
    """Pseudo-inverse of the frozen center Jacobian π·Hess W_m(x₀).

    Directions generated by the domain's rigid motions are excluded: the
    defect map is invariant along them, so they are fixed as a gauge.
    """
    basis, hred = kr.reduced_hessian(d, x0)
    eig = np.linalg.eigvalsh(hred)
    if not kr._nondegenerate(eig):
        raise StateError("Kirchhoff-Routh Hessian is singular at x0 (critical point is degenerate)")
    return basis @ np.linalg.inv(np.pi * hred) @ basis.T


def _admissible(state: SheetState) -> bool:
    try:
        validate_state(state, tol=1e-8)
    except StateError:
        return False
    return kr._min_separation(state.centers) > kr.COLLISION_TOL


def adjust_centers(state: SheetState, jinv: np.ndarray | None = None, tol: float = 1e-10,
                   max_steps: int = 20, fv: fn.FunctionalValue | None = None):
    """Newton steps on x ↦ defect; returns (centers, defect_before).

    ``adjust_centers_full`` additionally returns the updated state and its
    functional value.
    """
    new_state, before, _, _ = adjust_centers_full(state, jinv, tol, max_steps, fv)
    return new_state.centers, before


def adjust_centers_full(state, jinv=None, tol=1e-10, max_steps=20, fv=None):
    if jinv is None:
        jinv = center_inverse(state.domain, VortexConfig(state.centers, state.strengths))
    fv = fv or fn.evaluate(state)
    dvec = defects(state, fv).ravel()
    before = float(np.max(np.abs(dvec)))
    for _ in range(max_steps):
        if np.max(np.abs(dvec)) < tol:
            break
        step = -(jinv @ dvec)
        t = 1.0
        for _ in range(40):
            trial = state.evolve(centers=(state.centers.ravel() + t * step).reshape(-1, 2))
            if _admissible(trial):
                break
            t *= 0.5
        else:
            raise NumericalFailure("center update cannot stay inside the domain")
        state = trial
        fv = fn.evaluate(state)
        dvec = defects(state, fv).ravel()
    return state, before, float(np.max(np.abs(dvec))), fv


# ---------------------------------------------------------------------------
# shape update
# ---------------------------------------------------------------------------

def _operators(state: SheetState):
    return [lm.build_blocks(k, state.n) for k in state.strengths]


def shape_correction(state: SheetState, fv: fn.FunctionalValue, ops=None):
    """δ(f, g) = L₀⁻¹ P_Y F for every sheet, as sample arrays (m, N)."""
    ops = ops or _operators(state)
    df = np.zeros_like(state.f)
    dg = np.zeros_like(state.g)
    for i, op in enumerate(ops):
        r1 = sp.to_coeffs(fv.F1[i])
        r2 = sp.to_coeffs(fv.F2[i])
        p1, p2, _ = lm.project_Y(op, r1, r2)
        h1, h2 = lm.apply_L0_inverse(op, p1, p2)
        df[i] = sp.from_coeffs(h1)
        dg[i] = sp.from_coeffs(h2)
    return df, dg


def quasi_newton_step(state: SheetState, damping: float = 1.0, fv=None, ops=None):
    """One update (f, g) −= damping·L₀⁻¹ P_Y F; returns (f, g, residual_after)."""
    fv = fv or fn.evaluate(state)
    df, dg = shape_correction(state, fv, ops)
    new = state.evolve(f=state.f - damping * df, g=state.g - damping * dg)
    return new.f, new.g, fn.evaluate(new).sup_norm


# ---------------------------------------------------------------------------
# finite-difference Newton on the full system
# ---------------------------------------------------------------------------

class _Packing:
    """Coordinates: centers, then per sheet f-coefficients (modes 1..N/2−1)
    and g-coefficients (modes 2..N/2−1; mode 1 is −κ times f's)."""

    def __init__(self, state: SheetState):
        self.m = state.m
        self.n = state.n
        self.kappa = state.strengths.copy()
        self.jm = self.n // 2 - 1

    def pack(self, state: SheetState) -> np.ndarray:
        parts = [state.centers.ravel()]
        for i in range(self.m):
            cf = sp.to_coeffs(state.f[i])
            cg = sp.to_coeffs(state.g[i])
            parts += [cf.a[1:-1], cf.b[1:-1], cg.a[2:-1], cg.b[2:-1]]
        return np.concatenate(parts)

    def unpack(self, state: SheetState, u: np.ndarray) -> SheetState:
        m, jm = self.m, self.jm
        centers = u[: 2 * m].reshape(m, 2)
        pos = 2 * m
        fs, gs = [], []
        for i in range(m):
            cf = sp.FourierCoeffs.zeros(self.n)
            cg = sp.FourierCoeffs.zeros(self.n)
            cf.a[1:-1] = u[pos : pos + jm]
            cf.b[1:-1] = u[pos + jm : pos + 2 * jm]
            pos += 2 * jm
            cg.a[2:-1] = u[pos : pos + jm - 1]
            cg.b[2:-1] = u[pos + jm - 1 : pos + 2 * jm - 2]
            pos += 2 * jm - 2
            cg.a[1] = -self.kappa[i] * cf.a[1]
            cg.b[1] = -self.kappa[i] * cf.b[1]
            fs.append(sp.from_coeffs(cf))
            gs.append(sp.from_coeffs(cg))
        return state.evolve(centers=centers, f=np.array(fs), g=np.array(gs))

    @staticmethod
    def residual(fv: fn.FunctionalValue) -> np.ndarray:
        parts = []
        for i in range(fv.F1.shape[0]):
            r1 = sp.to_coeffs(fv.F1[i])
            r2 = sp.to_coeffs(fv.F2[i])
            parts += [r1.a[1:-1], r1.b[1:-1], r2.a[1:-1], r2.b[1:-1]]
        return np.concatenate(parts)


def fd_jacobian(state: SheetState, step: float = 1e-7) -> np.ndarray:
    pk = _Packing(state)
    u0 = pk.pack(state)
    r0 = pk.residual(fn.evaluate(state))
    jac = np.empty((r0.size, u0.size))
    for q in range(u0.size):
        u = u0.copy()
        u[q] += step
        jac[:, q] = (pk.residual(fn.evaluate(pk.unpack(state, u))) - r0) / step
    return jac


def newton_fd_step(state: SheetState, jac: np.ndarray, fv=None):
    """Least-squares Newton step with a (possibly frozen) FD Jacobian."""
    pk = _Packing(state)
    fv = fv or fn.evaluate(state)
    r = pk.residual(fv)
    delta, *_ = np.linalg.lstsq(jac, -r, rcond=1e-12)
    u0 = pk.pack(state)
    t = 1.0
    for _ in range(30):
        trial = pk.unpack(state, u0 + t * delta)
        if _admissible(trial):
            return trial
        t *= 0.5
    raise NumericalFailure("Newton step cannot keep the state admissible")


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------

def solve_fixed(state: SheetState, jinv: np.ndarray, opts: SolveOptions, history: list | None = None):
    """Iterate at the state's (ε, τ); returns (state, converged, message)."""
    history = history if history is not None else []
    ops = _operators(state)
    damping = 1.0
    halvings = 0
    increases = 0
    prev = np.inf
    jac = None
    jac_age = 0
    for outer in range(opts.max_outer):
        use_newton = outer >= opts.fallback_after
        fv = None
        if not use_newton:
            state, _, _, fv = adjust_centers_full(state, jinv, opts.tol_center, opts.max_center_steps)
        fv = fv or fn.evaluate(state)
        res = fv.sup_norm
        dnorm = float(np.max(np.abs(defects(state, fv))))
        history.append({
            "epsilon": state.epsilon,
            "iteration": outer,
            "method": "newton-fd" if use_newton else "quasi-newton",
            "residual": res,
            "defect": dnorm,
            "centers": state.centers.tolist(),
        })
        log.info("eps=%.4g it=%d res=%.3e defect=%.3e", state.epsilon, outer, res, dnorm)
        if not np.isfinite(res):
            return state, False, "non-finite residual"
        if res < opts.tol_residual and dnorm < opts.tol_center:
            return state, True, "converged"
        if use_newton:
            if jac is None or jac_age >= 4 or res > 0.1 * prev:
                jac = fd_jacobian(state, opts.fd_step)
                jac_age = 0
            state = newton_fd_step(state, jac, fv)
            jac_age += 1
        else:
            increases = increases + 1 if res > prev else 0
            if increases >= 2:
                damping *= 0.5
                halvings += 1
                increases = 0
                if halvings > 10:
                    return state, False, "quasi-Newton iteration diverged"
            df, dg = shape_correction(state, fv, ops)
            trial = state.evolve(f=state.f - damping * df, g=state.g - damping * dg)
            t = 1.0
            while not _admissible(trial) and t > 1e-3:
                t *= 0.5
                trial = state.evolve(f=state.f - t * damping * df, g=state.g - t * damping * dg)
            if not _admissible(trial):
                return state, False, "shape update leaves the admissible set"
            state = trial
        prev = res
    return state, False, "maximum outer iterations reached"


def solve_at(d: dom.DomainModel, x0: VortexConfig, epsilon: float, tau: float = 0.0,
             opts: SolveOptions | None = None, initial: SheetState | None = None) -> SolveTrace:
    """Continuation in ε from circles at x₀ up to ``epsilon``."""
    opts = opts or SolveOptions(tau=tau)
    kr.validate_config(d, x0)
    steps = opts.schedule(epsilon)
    if epsilon != steps[-1]:
        steps = [e for e in steps if e < epsilon] + [float(epsilon)]
    trace = SolveTrace(x0=x0)
    gnorm = float(np.max(np.abs(kr.grad_W(d, x0))))
    if gnorm > CRITICAL_TOL * max(1.0, float(np.max(x0.strengths**2))):
        trace.message = f"x0 is not a critical point of W (|grad W| = {gnorm:.3e})"
        return trace
    try:
        jinv = center_inverse(d, x0)
    except StateError as exc:
        trace.message = str(exc)
        return trace
    state = initial or SheetState.circles(d, x0.centers, x0.strengths, steps[0], tau, opts.N)
    for eps in steps:
        t0 = time.perf_counter()
        state = state.evolve(epsilon=eps, tau=tau)
        try:
            validate_state(state, tol=1e-8)
            state, ok, msg = solve_fixed(state, jinv, opts, trace.history)
        except (StateError, NumericalFailure) as exc:
            ok, msg = False, str(exc)
        trace.stages.append({
            "epsilon": eps,
            "converged": ok,
            "message": msg,
            "seconds": time.perf_counter() - t0,
        })
        if not ok:
            trace.message = f"stage eps={eps:g} failed: {msg}"
            trace.state = state
            return trace
        trace.last_good_epsilon = eps
        trace.state = state
    trace.converged = True
    trace.message = "converged"
    return trace
