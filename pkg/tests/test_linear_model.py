import numpy as np
import pytest

from vsheet import domain as dom
from vsheet import functional as fn
from vsheet import linear_model as lm
from vsheet import spectral as sp
from vsheet.errors import ConsistencyError, InputError
from vsheet.spectral import FourierCoeffs

from conftest import PAIR_A

KAPPAS = [0.5, 1.0, 2.0, -1.0]
N = 64


def _coeffs(cos=None, sin=None, n=N):
    return sp.to_coeffs(sp.from_modes(n, cos or {}, sin or {}))


def _random_X(rng, kappa, n=N, decay=True):
    h1, h2 = FourierCoeffs.zeros(n), FourierCoeffs.zeros(n)
    j = np.arange(n // 2 + 1)
    w = 1.0 / np.maximum(j, 1) ** 2 if decay else np.ones_like(j, dtype=float)
    for c in (h1, h2):
        c.a[:] = rng.normal(size=j.size) * w
        c.b[:] = rng.normal(size=j.size) * w
        c.a[0] = c.a[-1] = c.b[0] = c.b[-1] = 0.0
    h2.a[1], h2.b[1] = -kappa * h1.a[1], -kappa * h1.b[1]
    return h1, h2


@pytest.mark.parametrize("kappa", KAPPAS)
def test_determinants(kappa):
    for j in range(1, 65):
        assert np.linalg.det(lm.m_block(kappa, j)) == pytest.approx(kappa**2 * (j - 1) / 2, abs=1e-12 * j)
        assert np.linalg.det(lm.n_block(kappa, j)) == pytest.approx(-kappa**2 * (j - 1) / 2, abs=1e-12 * j)


@pytest.mark.parametrize("kappa", KAPPAS)
def test_closed_form_inverses(kappa):
    for j in range(2, 65):
        np.testing.assert_allclose(lm.m_block(kappa, j) @ lm.m_inverse(kappa, j), np.eye(2), atol=1e-12)
        np.testing.assert_allclose(lm.n_block(kappa, j) @ lm.n_inverse(kappa, j), np.eye(2), atol=1e-12)


def test_documented_block_values():
    np.testing.assert_allclose(lm.m_inverse(1.0, 2), [[-1, -1], [0, -2]])
    assert np.linalg.det(lm.m_block(1.0, 1)) == 0.0
    assert np.linalg.det(lm.m_block(2.0, 3)) == pytest.approx(4.0)
    np.testing.assert_allclose(lm.m_block(1.0, 2) @ [1, 0], [-1, 0])
    for k in KAPPAS:
        np.testing.assert_allclose(lm.m_block(k, 5) @ [0, 1], [0.5, -k / 2])
    with pytest.raises(InputError):
        lm.build_blocks(0.0, N)


def test_basis_pairing():
    op = lm.build_blocks(1.0, N)
    r1, r2 = lm.apply_L0(op, _coeffs(cos={2: 1.0}), FourierCoeffs.zeros(N))
    # (â₂, ĉ₂) = M₂(1, 0) = (−1, 0): F1 = −sin 2θ, F2 = 0
    assert r1.b[2] == pytest.approx(-1.0) and abs(r1.a[2]) < 1e-14
    assert np.allclose(r2.a, 0) and np.allclose(r2.b, 0)
    r1, r2 = lm.apply_L0(op, _coeffs(sin={3: 1.0}), FourierCoeffs.zeros(N))
    # (b̂₃, d̂₃) = N₃(1, 0) = (3/2, −1/2): F1 = 1.5 cos 3θ, F2 = −0.5 sin 3θ
    assert r1.a[3] == pytest.approx(1.5) and r2.b[3] == pytest.approx(-0.5)


@pytest.mark.parametrize("kappa", KAPPAS)
def test_apply_L0_matches_fd_of_limits(kappa):
    rng = np.random.default_rng(int(10 * abs(kappa)) + (kappa < 0))
    c = [[-PAIR_A, 0.0], [PAIR_A, 0.0]]
    k = [kappa, -kappa]
    op = lm.build_blocks(kappa, N)
    z = np.zeros(N)
    base1 = fn.eval_F1_limit(dom.DISK, c, k, [z, z], [z, z], 0)
    base2 = fn.eval_F2_limit(dom.DISK, c, k, [z, z], [z, z], 0)
    h = 1e-3
    for _ in range(5):
        j = int(rng.integers(1, N // 2))
        h1 = _coeffs(cos={j: rng.normal()}, sin={j: rng.normal()})
        h2 = _coeffs(cos={j: rng.normal()}, sin={j: rng.normal()})
        f, g = sp.from_coeffs(h1), sp.from_coeffs(h2)
        d1 = (fn.eval_F1_limit(dom.DISK, c, k, [h * f, z], [h * g, z], 0) - base1) / h
        d2 = (fn.eval_F2_limit(dom.DISK, c, k, [h * f, z], [h * g, z], 0) - base2) / h
        r1, r2 = lm.apply_L0(op, h1, h2)
        assert np.max(np.abs(d1 - sp.from_coeffs(r1))) < 1e-8
        assert np.max(np.abs(d2 - sp.from_coeffs(r2))) < 1e-8


def test_block_diagonal_across_sheets():
    c = [[-PAIR_A, 0.0], [PAIR_A, 0.0]]
    k = [1.0, -1.0]
    z = np.zeros(N)
    f = sp.from_modes(N, cos={3: 1.0})
    for fun in (fn.eval_F1_limit, fn.eval_F2_limit):
        base = fun(dom.DISK, c, k, [z, z], [z, z], 0)
        moved = fun(dom.DISK, c, k, [z, f], [z, f], 0)
        assert np.max(np.abs(moved - base)) < 1e-10


@pytest.mark.parametrize("kappa", KAPPAS)
def test_inverse_round_trip(kappa):
    rng = np.random.default_rng(42)
    op = lm.build_blocks(kappa, N)
    for _ in range(10):
        h1, h2 = _random_X(rng, kappa)
        r1, r2 = lm.apply_L0(op, h1, h2)
        assert np.max(np.abs(lm.mode1_defect(kappa, r1, r2))) < 1e-14
        b1, b2 = lm.apply_L0_inverse(op, r1, r2)
        for x, y in ((b1, h1), (b2, h2)):
            np.testing.assert_allclose(x.a, y.a, atol=1e-13)
            np.testing.assert_allclose(x.b, y.b, atol=1e-13)


def test_inverse_mode1_row_and_zero():
    op = lm.build_blocks(1.0, N)
    f, g = lm.apply_L0_inverse(op, _coeffs(sin={1: 1.0}), _coeffs(cos={1: -1.0}))
    np.testing.assert_allclose(sp.from_coeffs(f), -np.cos(sp.grid(N)), atol=1e-14)
    np.testing.assert_allclose(sp.from_coeffs(g), np.cos(sp.grid(N)), atol=1e-14)
    f, g = lm.apply_L0_inverse(op, FourierCoeffs.zeros(N), FourierCoeffs.zeros(N))
    assert not np.any(f.a) and not np.any(g.b)


def test_inverse_rejects_incompatible_input():
    op = lm.build_blocks(1.0, N)
    with pytest.raises(ConsistencyError):
        lm.apply_L0_inverse(op, _coeffs(sin={1: 1.0}), FourierCoeffs.zeros(N))


def test_project_Y():
    op = lm.build_blocks(1.0, N)
    p1, p2, defect = lm.project_Y(op, _coeffs(sin={1: 1.0}, cos={4: 2.0}), FourierCoeffs.zeros(N))
    assert abs(defect[0]) == pytest.approx(0.5) and abs(defect[1]) < 1e-15
    assert np.max(np.abs(lm.mode1_defect(1.0, p1, p2))) < 1e-15
    assert p1.a[4] == pytest.approx(2.0, abs=1e-14)
    rng = np.random.default_rng(1)
    h1, h2 = _random_X(rng, 2.0)
    r1, r2 = lm.apply_L0(lm.build_blocks(2.0, N), h1, h2)
    q1, q2, d = lm.project_Y(lm.build_blocks(2.0, N), r1, r2)
    assert np.max(np.abs(d)) < 1e-14
    np.testing.assert_allclose(q1.b, r1.b, atol=1e-15)


def test_inverse_damps_high_modes():
    kappa = 1.0
    op = lm.build_blocks(kappa, 256)
    r1, r2 = FourierCoeffs.zeros(256), FourierCoeffs.zeros(256)
    r1.a[2:-1] = 1.0
    r1.b[2:-1] = 1.0
    r2.a[2:-1] = 1.0
    r2.b[2:-1] = 1.0
    f, _ = lm.apply_L0_inverse(op, r1, r2)
    j = np.arange(2, 128)
    assert np.max(np.abs(f.a[2:-1]) * j) <= 4.0 + 1e-12
    assert np.max(np.abs(f.b[2:-1]) * j) <= 4.0 + 1e-12
