import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vsheet import domain as dom
from vsheet import sheet as sh
from vsheet import spectral as sp
from vsheet.errors import InputError, StateError


def _state(f=None, g=None, eps=0.1, tau=0.0, kappa=1.0, n=256, d=dom.FREE, center=(0.0, 0.0)):
    th = sp.grid(n)
    f = np.zeros(n) if f is None else f(th)
    g = np.zeros(n) if g is None else g(th)
    return sh.SheetState(eps, tau, d, [center], [kappa], f[None], g[None])


def _fd_curvature(points):
    """Sixth-order central differences of the closed point polygon in θ."""
    h = 2 * np.pi / len(points)
    c1 = {1: 3 / 4, 2: -3 / 20, 3: 1 / 60}
    c2 = {0: -49 / 18, 1: 3 / 2, 2: -3 / 20, 3: 1 / 90}
    d1 = sum(w * (np.roll(points, -k, 0) - np.roll(points, k, 0)) for k, w in c1.items()) / h
    d2 = (c2[0] * points + sum(w * (np.roll(points, -k, 0) + np.roll(points, k, 0))
                               for k, w in c2.items() if k)) / h**2
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    return cross / np.hypot(d1[:, 0], d1[:, 1]) ** 3


def test_effective_shape():
    s = _state()
    f, g = sh.effective_shape(s, 0)
    assert np.all(f == 0) and np.all(g == 0)
    s = _state(tau=0.1)
    f, g = sh.effective_shape(s, 0)
    np.testing.assert_allclose(f, 0.1 * np.cos(s.theta), atol=1e-15)
    np.testing.assert_allclose(g, 0.1 * np.cos(s.theta), atol=1e-15)


def test_kernel_direction_is_outside_X():
    # The τ-direction (cos θ, κ cos θ) is the kernel of L₀ and is complementary
    # to X_i, whose mode-1 constraint reads g₁ = −κ f₁.
    s = _state(tau=0.1, kappa=2.0)
    f, g = sh.effective_shape(s, 0)
    fa, _ = sp.low_modes(f)
    ga, _ = sp.low_modes(g)
    assert ga == pytest.approx(2.0 * fa)
    pf, pg = sh.project_X(f, g, 2.0)
    assert sp.low_modes(pg)[0] == pytest.approx(-2.0 * sp.low_modes(pf)[0], abs=1e-14)


def test_circle_geometry():
    s = _state(eps=0.05, n=64)
    geo = sh.curve_geometry(s, 0)
    np.testing.assert_allclose(geo.curvature, 20.0, rtol=1e-12)
    np.testing.assert_allclose(geo.speed, 0.05, rtol=1e-12)
    np.testing.assert_allclose(geo.normals, np.column_stack([np.cos(s.theta), np.sin(s.theta)]), atol=1e-12)
    np.testing.assert_allclose(np.sum(geo.normals * geo.tangents, axis=1), 0.0, atol=1e-15)


def test_curvature_matches_fd_oracle():
    s = _state(lambda t: 0.3 * np.cos(2 * t) - 0.1 * np.sin(3 * t), eps=0.1, n=256)
    geo = sh.curve_geometry(s, 0)
    fd = _fd_curvature(geo.points)
    assert np.max(np.abs(fd - geo.curvature)) / np.max(np.abs(geo.curvature)) < 1e-6


def test_convexity_flip_matches_fd_sign():
    s = _state(lambda t: 3 * np.cos(2 * t), eps=0.2, n=256)
    geo = sh.curve_geometry(s, 0)
    fd = _fd_curvature(geo.points)
    assert sh.convexity_check(s, 0) == bool(np.all(fd > 0))
    assert not sh.convexity_check(s, 0)
    assert sh.convexity_check(_state(), 0)


def test_curve_geometry_refuses_eps_zero():
    with pytest.raises(StateError):
        sh.curve_geometry(_state(eps=0.0), 0)


def test_circulation():
    s = _state(g=lambda t: np.cos(2 * t), kappa=2.0)
    assert sh.circulation(s, 0) == pytest.approx(2.0, abs=1e-15)
    s = _state(g=lambda t: 0.5 + np.cos(2 * t), kappa=2.0, eps=0.1)
    assert sh.circulation(s, 0) == pytest.approx(2.05, abs=1e-14)
    assert sh.circulation(_state(eps=0.0, kappa=-1.5), 0) == -1.5


def test_translation_equivariance():
    f = lambda t: 0.2 * np.cos(3 * t)
    a = sh.curve_geometry(_state(f), 0)
    b = sh.curve_geometry(_state(f, center=(1.5, -2.0)), 0)
    np.testing.assert_allclose(b.points - a.points, np.tile([1.5, -2.0], (len(a.points), 1)), atol=1e-14)
    np.testing.assert_allclose(b.curvature, a.curvature, atol=0)
    np.testing.assert_allclose(b.normals, a.normals, atol=0)


@pytest.mark.parametrize("build,msg", [
    (lambda: _state(lambda t: 0.1 + np.cos(2 * t)), "zero mean"),
    (lambda: _state(lambda t: np.cos(t)), "mode-1"),
    (lambda: _state(lambda t: -6 * np.cos(2 * t), eps=0.1), "1/2"),
    (lambda: _state(d=dom.DISK, center=(0.9, 0.0), eps=0.06), "boundary"),
])
def test_validate_state_rejections(build, msg):
    with pytest.raises(StateError, match=msg):
        sh.validate_state(build())


def test_validate_state_sheet_overlap():
    n = 64
    z = np.zeros((2, n))
    s = sh.SheetState(0.1, 0.0, dom.FREE, [[0, 0], [0.25, 0]], [1, 1], z, z)
    with pytest.raises(StateError, match="closer"):
        sh.validate_state(s)
    sh.validate_state(s.evolve(centers=np.array([[0, 0], [0.5, 0]])))


def test_state_shape_mismatch():
    with pytest.raises(InputError):
        sh.SheetState(0.1, 0.0, dom.FREE, [[0, 0]], [1, 2], np.zeros((1, 32)), np.zeros((1, 32)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["free", "disk", "halfplane"]))
def test_json_round_trip(seed, key):
    rng = np.random.default_rng(seed)
    n = 32
    f, g = sh.project_X(rng.normal(size=n) * 0.1, rng.normal(size=n) * 0.1, -1.5)
    s = sh.SheetState(rng.uniform(0, 0.1), rng.normal(), dom.from_key(key), [[0.1, 0.2]], [-1.5], f, g)
    back = sh.state_from_json(sh.state_to_json(s))
    assert back.epsilon == s.epsilon and back.tau == s.tau and back.domain == s.domain
    np.testing.assert_array_equal(back.centers, s.centers)
    np.testing.assert_allclose(back.f, s.f, atol=1e-15)
    np.testing.assert_allclose(back.g, s.g, atol=1e-15)


def test_json_rejects_garbage():
    with pytest.raises(InputError):
        sh.state_from_json("[1, 2]")
    with pytest.raises(InputError):
        sh.state_from_json("{oops")
    with pytest.raises(InputError):
        sh.state_from_json(json.dumps({"format": "something-else"}))
    doc = sh.state_to_dict(_state(n=32))
    doc["sheets"][0]["f"]["a"] = [0.0] * 3
    with pytest.raises(InputError):
        sh.state_from_dict(doc)


def test_geometry_csv():
    text = sh.geometry_csv(_state(eps=0.05, n=16))
    rows = [r.split(",") for r in text.strip().splitlines()]
    assert rows[0] == ["sheet", "theta", "x", "y", "gamma_speed", "curvature"]
    assert len(rows) == 17
    assert float(rows[1][5]) == pytest.approx(20.0)
    assert float(rows[1][4]) == pytest.approx(1 / (2 * np.pi))
