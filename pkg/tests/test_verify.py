import numpy as np
import pytest

from vsheet import domain as dom
from vsheet import kirchhoff_routh as kr
from vsheet import solver as so
from vsheet import spectral as sp
from vsheet import verify as vf
from vsheet.errors import InputError
from vsheet.sheet import SheetState


def test_free_circle_velocity():
    s = SheetState.circles(dom.FREE, [[0.2, -0.4]], [1.3], 0.1, n=64)
    v = vf.br_velocity(s, 0)
    th = s.theta
    normal = np.column_stack([np.cos(th), np.sin(th)])
    tangent = np.column_stack([-np.sin(th), np.cos(th)])
    assert np.max(np.abs(np.sum(v * normal, axis=1))) < 1e-13
    vs = np.sum(v * tangent, axis=1)
    assert np.ptp(vs) < 1e-13
    rep = vf.direct_residual(s)
    assert rep.max_residual < 1e-13


def test_br_velocity_targets_subset():
    s = SheetState.circles(dom.DISK, [[0.3, 0.1]], [1.0], 0.05, n=32)
    full = vf.br_velocity(s, 0)
    np.testing.assert_allclose(vf.br_velocity(s, 0, [3, 10]), full[[3, 10]], atol=0)


def test_br_velocity_rejects_eps_zero():
    with pytest.raises(InputError):
        vf.br_velocity(SheetState.circles(dom.FREE, [[0, 0]], [1.0], 0.0, n=32), 0)


def test_alternating_rule_converges_spectrally():
    th16 = sp.grid(16)
    f = 0.4 * np.cos(2 * th16) - 0.2 * np.sin(3 * th16)
    g = 0.3 * np.cos(4 * th16)
    s16 = SheetState(0.1, 0.0, dom.DISK, [[0.2, 0.1]], [1.0], f, g)
    s32, s64 = vf.refine(s16, 32), vf.refine(s16, 64)
    v16, v32, v64 = (vf.br_velocity(s, 0) for s in (s16, s32, s64))
    gap1 = np.max(np.abs(v16 - v32[::2]))
    gap2 = np.max(np.abs(v32 - v64[::2]))
    assert gap2 * 10 <= gap1


def test_unconverged_state_detected():
    th = sp.grid(128)
    s = SheetState(0.05, 0.0, dom.DISK, [[0.0, 0.0]], [1.0], 0.1 * np.cos(2 * th), np.zeros(128))
    rep = vf.direct_residual(s)
    assert rep.max_residual > 1e-4
    assert rep.max_residual > 10 * rep.oracle_error


def test_pv_identities():
    assert vf.lemma41_check(256, 32) < 1e-8
    errs = vf.pv_identity_errors(256, 32)
    assert max(errs["spectral"].values()) < 1e-8
    assert np.max(np.abs(vf.pv_identity_integrals(64, 0))) < 1e-13
    # near the resolution limit: report only
    assert np.isfinite(vf.pv_identity_errors(64, 31, 31)["quadrature"]["cos_cot"])
    with pytest.raises(InputError):
        vf.pv_identity_integrals(63, 1)


def test_alternating_rule_error_decays_with_n():
    # f(α) = 1/(a − cos α) is not band-limited; its Hilbert transform is
    # (2/√(a²−1))·ρ sin θ/(1 − 2ρ cos θ + ρ²) with ρ = a − √(a²−1).
    a = 1.5
    c = np.sqrt(a * a - 1)
    rho = a - c

    def err(n):
        th = sp.grid(n)
        f = 1.0 / (a - np.cos(th))
        off = np.arange(n)[None, :] - np.arange(n)[:, None]
        u = th[:, None] - th[None, :]
        odd = off % 2 == 1
        s = np.where(odd, np.sin(u / 2), 1.0)
        kern = np.where(odd, np.sin(u) / (4 * s**2), 0.0) * 2 / n
        exact = 0.5 * (2 / c) * rho * np.sin(th) / (1 - 2 * rho * np.cos(th) + rho**2)
        return np.max(np.abs(kern @ f - exact))

    e = [err(n) for n in (16, 32, 64)]
    assert e[1] < e[0] / 10 and e[2] < max(e[1] / 10, 1e-13)


def test_first_moment_of_circle():
    s = SheetState.circles(dom.DISK, [[0.2, -0.3]], [2.0], 0.05, n=32)
    np.testing.assert_allclose(vf.first_moment(s, 0), [0.4, -0.6], atol=1e-15)


def test_limit_check_requires_three_points():
    tr = so.solve_at(dom.DISK, kr.VortexConfig([[0.0, 0.0]], [1.0]), 0.02, 0.05, so.SolveOptions(N=32))
    with pytest.raises(InputError):
        vf.point_vortex_limit_check([tr, tr])


def test_limit_fit_on_pair(disk_pair_traces):
    fit = vf.point_vortex_limit_check(disk_pair_traces)
    assert fit.slopes["center_offset"] >= 0.9
    assert fit.slopes["f_norm"] >= 0.9
    assert fit.slopes["moment_error"] >= 1.0
    assert max(fit.circulation_errors) < 1e-12
    assert set(fit.to_dict()) >= {"epsilons", "slopes"}


def test_report_serializes():
    rep = vf.direct_residual(SheetState.circles(dom.DISK, [[0.1, 0.0]], [1.0], 0.05, n=32))
    d = rep.to_dict()
    assert d["oracle_n"] == 32 and d["max_residual"] == rep.max_residual
