"""Canonical planar domains with closed-form Green functions.

Conventions
-----------
G(x, y) = (1/2π) ln(1/|x − y|) − H(x, y), with H harmonic in x, so that G
vanishes on the boundary.  The three shipped domains are

* ``free``      : the whole plane, H ≡ 0;
* ``disk``      : the unit disk, H(x, y) = −(1/4π) ln(1 − 2x·y + |x|²|y|²);
* ``halfplane`` : x₂ > 0, H(x, y) = −(1/2π) ln|x − ȳ| with ȳ = (y₁, −y₂).

All public functions accept single points; the ``*_many`` helpers broadcast
over arrays of shape (..., 2) and skip validation, for use in quadrature
loops where the caller has already validated the geometry.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError

BOUNDARY_TOL = 1e-8
TWO_PI = 2.0 * np.pi


class DomainKind(enum.Enum):
    FREE = "free"
    DISK = "disk"
    HALFPLANE = "halfplane"


@dataclass(frozen=True)
class DomainModel:
    kind: DomainKind

    @property
    def key(self) -> str:
        return self.kind.value

    @property
    def bounded(self) -> bool:
        return self.kind is DomainKind.DISK


FREE = DomainModel(DomainKind.FREE)
DISK = DomainModel(DomainKind.DISK)
HALFPLANE = DomainModel(DomainKind.HALFPLANE)


def from_key(key: str) -> DomainModel:
    """Domain from its configuration key ("free", "disk", "halfplane")."""
    try:
        return DomainModel(DomainKind(key))
    except ValueError:
        raise InputError(f"unknown domain key {key!r}") from None


def boundary_distance(d: DomainModel, x) -> np.ndarray:
    """Distance from point(s) x to the boundary (inf for the free plane).

    Negative values mean the point lies outside the domain.
    """
    x = np.asarray(x, dtype=float)
    if d.kind is DomainKind.FREE:
        return np.full(x.shape[:-1], np.inf)
    if d.kind is DomainKind.DISK:
        return 1.0 - np.hypot(x[..., 0], x[..., 1])
    return x[..., 1].copy()


def contains(d: DomainModel, x) -> bool:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        return False
    return bool(np.all(boundary_distance(d, x) > BOUNDARY_TOL))


def _point(d: DomainModel, x) -> np.ndarray:
    p = np.asarray(x, dtype=float)
    if p.shape != (2,):
        raise InputError(f"expected a 2-vector, got shape {p.shape}")
    if not contains(d, p):
        raise InputError(f"point {p.tolist()} is not inside the {d.key} domain")
    return p


def _pair(d: DomainModel, x, y, allow_equal: bool):
    px, py = _point(d, x), _point(d, y)
    if not allow_equal and np.array_equal(px, py):
        raise DomainError("Green function evaluated at coincident points")
    return px, py


# ---------------------------------------------------------------------------
# broadcasting kernels (no validation)
# ---------------------------------------------------------------------------

def h_many(d: DomainModel, x, y) -> np.ndarray:
    """Regular part H(x, y) for broadcast arrays of points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(x.shape, y.shape)[:-1]
    if d.kind is DomainKind.FREE:
        return np.zeros(shape)
    if d.kind is DomainKind.DISK:
        q = 1.0 - 2.0 * np.sum(x * y, axis=-1) + np.sum(x * x, axis=-1) * np.sum(y * y, axis=-1)
        return -np.log(q) / (4.0 * np.pi)
    dx = x[..., 0] - y[..., 0]
    dy = x[..., 1] + y[..., 1]
    return -np.log(dx * dx + dy * dy) / (4.0 * np.pi)


def grad_h_many(d: DomainModel, x, y) -> np.ndarray:
    """∇_x H(x, y) for broadcast arrays of points, shape (..., 2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(x.shape, y.shape)
    if d.kind is DomainKind.FREE:
        return np.zeros(shape)
    if d.kind is DomainKind.DISK:
        yy = np.sum(y * y, axis=-1)[..., None]
        q = 1.0 - 2.0 * np.sum(x * y, axis=-1) + np.sum(x * x, axis=-1) * yy[..., 0]
        return (y - x * yy) / (TWO_PI * q[..., None])
    r = np.empty(shape)
    r[..., 0] = x[..., 0] - y[..., 0]
    r[..., 1] = x[..., 1] + y[..., 1]
    return -r / (TWO_PI * np.sum(r * r, axis=-1)[..., None])


def grad_free_many(x, y) -> np.ndarray:
    """∇_x of (1/2π) ln(1/|x − y|) = −(x − y)/(2π|x − y|²)."""
    r = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return -r / (TWO_PI * np.sum(r * r, axis=-1)[..., None])


# ---------------------------------------------------------------------------
# validated point evaluations
# ---------------------------------------------------------------------------

def green(d: DomainModel, x, y) -> float:
    """G(x, y); symmetric in its arguments and zero on the boundary."""
    px, py = _pair(d, x, y, allow_equal=False)
    r = np.hypot(*(px - py))
    return float(-np.log(r) / TWO_PI - h_many(d, px, py))


def h_regular(d: DomainModel, x, y) -> float:
    """H(x, y); h_regular(d, x, x) is the Robin function."""
    px, py = _pair(d, x, y, allow_equal=True)
    return float(h_many(d, px, py))


def grad_green_x(d: DomainModel, x, y) -> np.ndarray:
    px, py = _pair(d, x, y, allow_equal=False)
    return grad_free_many(px, py) - grad_h_many(d, px, py)


def grad_h_x(d: DomainModel, x, y) -> np.ndarray:
    px, py = _pair(d, x, y, allow_equal=True)
    return grad_h_many(d, px, py)


def grad_robin(d: DomainModel, x) -> np.ndarray:
    """Gradient of the Robin function x ↦ H(x, x), equal to 2(∇_x H)(x, x)."""
    px = _point(d, x)
    return 2.0 * grad_h_many(d, px, px)


def symmetry_generators(d: DomainModel, centers) -> np.ndarray:
    """Infinitesimal rigid motions of the domain acting on m centers.

    Returns an array of shape (k, 2m): rotations about the origin for the
    disk, horizontal translation for the half-plane, both translations and
    the rotation for the free plane.  The Kirchhoff-Routh function is
    invariant along each generator, so its Hessian at a critical point
    annihilates them.  Generators that vanish identically are dropped.
    """
    c = np.asarray(centers, dtype=float).reshape(-1, 2)
    rot = np.column_stack([-c[:, 1], c[:, 0]]).ravel()
    ex = np.tile([1.0, 0.0], len(c))
    ey = np.tile([0.0, 1.0], len(c))
    if d.kind is DomainKind.DISK:
        gens = [rot]
    elif d.kind is DomainKind.HALFPLANE:
        gens = [ex]
    else:
        gens = [ex, ey, rot]
    gens = [g for g in gens if np.linalg.norm(g) > 1e-12]
    return np.array(gens).reshape(len(gens), 2 * len(c))
