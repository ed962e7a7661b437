import math

import numpy as np
import pytest

from lhy_lab import potentials as P
from lhy_lab import scattering as S


def well_length(v0, R=1.0):
    k = math.sqrt(v0 / 2.0)
    return R - math.tanh(k * R) / k


def test_hard_core_length():
    for r in (0.5, 1.0, 2.0):
        assert S.scattering_length(P.hard_core(r)) == pytest.approx(r, rel=1e-12)


def test_delta_shell_length():
    for T in (1.0, 3.0, 10.0, 100.0):
        v = P.shell_potential(8.0 * math.pi * T, 1.0)
        assert S.scattering_length(v) == pytest.approx(T / (1.0 + T), abs=1e-12)


def test_square_well_closed_form():
    for v0 in (0.1, 2.0, 200.0, 600.0):
        a = S.scattering_length(P.square_well(v0, 1.0))
        assert a == pytest.approx(well_length(v0), abs=1e-12)


def test_free_potential():
    assert S.scattering_length(P.RadialPotential()) == 0.0


def test_far_field_and_normalization():
    v = P.square_well(2.0, 1.0)
    sol = S.solve(v, r_max=3.0)
    for r in (1.5, 2.0, 2.9, 5.0):
        assert sol.u_at(r) == pytest.approx(r - sol.a, rel=1e-12)
        assert sol.u_prime_at(r) == pytest.approx(1.0, rel=1e-12)
    assert sol.u_at(0.0) == 0.0


def test_profile_monotone_and_omega_bounds():
    for v in (P.square_well(5.0, 1.0), P.hard_core(1.0),
              P.shell_potential(8 * math.pi * 3, 1.0)):
        sol = S.solve(v)
        assert np.all(np.diff(sol.u) >= -1e-12)
        assert np.all(sol.u >= -1e-15)
        r = np.linspace(0.01, 2.5, 77)
        om = np.atleast_1d(sol.omega(r))
        assert np.all(om >= -1e-12)
        assert np.all(om <= np.minimum(sol.a / r, 1.0) + 1e-12)


def test_monotone_convergence_of_capped_hard_core():
    v = P.hard_core(1.0)
    a_prev = 0.0
    for n in (1e1, 1e2, 1e3, 1e4):
        a_n = S.scattering_length(P.cap_and_cut(v, n))
        assert a_n >= a_prev - 1e-14
        a_prev = a_n
    assert a_prev < 1.0
    assert 1.0 - a_prev < 0.02  # tanh(k)/k with k ~ 70


def test_born_limit():
    v0 = P.square_well(1.0, 1.0)
    born = v0.integral() / (8.0 * math.pi)
    prev = 0.0
    for eps in (1e-1, 1e-2, 1e-3):
        a = S.scattering_length(P.square_well(eps, 1.0))
        ratio = a / (eps * born)
        assert abs(ratio - 1.0) < 0.1 * eps / 1e-3 * 10 or abs(ratio - 1) < 0.05
    a = S.scattering_length(P.square_well(1e-4, 1.0))
    assert a / (1e-4 * born) == pytest.approx(1.0, abs=2e-5 * 3000)


def test_grid_refinement_tabulated():
    r = np.linspace(0.0, 1.0, 9)
    v = P.tabulated(r, 2.0 * (1.0 - r))
    a1 = S.solve(v, tol=1e-10).a
    a2 = S.solve(v, tol=1e-13).a
    assert abs(a1 - a2) <= 1e-10


def test_scattering_monotone_in_potential():
    a1 = S.scattering_length(P.square_well(1.0, 1.0))
    a2 = S.scattering_length(P.square_well(2.0, 1.0))
    assert a1 <= a2


def test_shell_on_top_of_well():
    # composite potential: solver handles mixed pieces and measures
    v = P.combine([P.square_well(2.0, 1.0), P.shell_potential(4.0, 0.5)])
    sol = S.solve(v)
    g = S.g_of(v, sol)
    assert g.integral() / (8 * math.pi) == pytest.approx(sol.a, rel=1e-10)


# -- g and transforms ---------------------------------------------------------


def test_g_integral_identity():
    for v in (P.square_well(2.0, 1.0), P.square_well(200.0, 1.0),
              P.shell_potential(8 * math.pi * 3, 1.0), P.hard_core(1.0),
              P.tabulated(np.linspace(0, 1, 9), 2 * (1 - np.linspace(0, 1, 9)))):
        sol = S.solve(v)
        g = S.g_of(v, sol)
        assert g.integral() == pytest.approx(8.0 * math.pi * sol.a, rel=1e-8)


def test_g_zero_potential():
    v = P.RadialPotential()
    sol = S.solve(v, r_max=1.0)
    g = S.g_of(v, sol)
    assert g.integral() == 0.0


def test_hard_core_g_is_boundary_shell():
    v = P.hard_core(1.0)
    sol = S.solve(v)
    g = S.g_of(v, sol)
    assert not g.funcs
    (rho, m), = g.shells
    assert rho == 1.0
    assert m == pytest.approx(8.0 * math.pi, rel=1e-12)


def test_radial_fourier_at_zero_is_integral():
    v = P.square_well(2.0, 1.0)
    sol = S.solve(v)
    g = S.g_of(v, sol)
    assert S.radial_fourier(g, 0.0) == pytest.approx(8 * math.pi * sol.a, rel=1e-10)


def test_radial_fourier_shell_sinc():
    shell = S.RadialKernel(funcs=[], shells=[(1.0, 8.0 * math.pi)])
    assert S.radial_fourier(shell, math.pi) == pytest.approx(0.0, abs=1e-12)
    k = 1.3
    assert S.radial_fourier(shell, k) == pytest.approx(8 * math.pi * math.sin(k) / k)


def test_omega_hat_identity():
    # omega_hat(k) = g_hat(k) / (2 k^2): both sides via independent quadrature
    v = P.square_well(2.0, 1.0)
    sol = S.solve(v, r_max=80.0)
    g = S.g_of(v, sol)
    k = 1.0
    ghat = S.radial_fourier(g, k)
    # direct transform of omega, truncated far beyond the support; the a/r
    # tail is integrated analytically: int_rmax^inf (a/r) sinc(kr) r^2 dr
    from lhy_lab.quadrature import panel_integrate_scaled
    rmax = 60.0
    direct = 4 * math.pi * panel_integrate_scaled(
        lambda r: np.atleast_1d(sol.omega(r)) * np.sin(k * r) / (k * r) * r * r,
        1e-9, rmax, scale=math.pi / (2 * k), order=32)
    tail = 4 * math.pi * sol.a * math.cos(k * rmax) / (k * k)  # int_rmax^inf sin(kr)/k dr
    what = direct + tail
    assert what == pytest.approx(ghat / (2 * k * k), rel=2e-4)


def test_parseval_identity():
    # int g omega dx = (2 pi)^-3 int g_hat^2/(2k^2) dk, k-side by direct
    # oscillatory quadrature (independent of the Coulomb route)
    v = P.square_well(2.0, 1.0)
    sol = S.solve(v)
    g = S.g_of(v, sol)
    pos = S.g_omega_integral(sol, g)
    ks = np.linspace(1e-6, 400.0, 120001)
    ghat = S.radial_fourier_batch(g, ks)
    kside = np.trapz(ghat**2, ks) / (4 * math.pi**2)
    # trapezoid tail beyond 400 estimated by the k^-4 envelope
    assert kside == pytest.approx(pos, rel=1e-6)
    # and the Coulomb-route evaluation agrees to near machine precision
    assert S.fhat_squared_integral(g) / (4 * math.pi**2) == pytest.approx(pos, rel=1e-12)


def test_solver_certifies_drift():
    v = P.square_well(2.0, 1.0)
    with pytest.raises(ValueError):
        S.solve(v, r_max=0.5)  # r_max inside the support
    with pytest.raises(ValueError):
        S.solve(v, tol=-1.0)


# -- variational formulation --------------------------------------------------


def _const_one(r):
    return np.ones_like(np.atleast_1d(np.asarray(r, dtype=float)))


def _const_zero(r):
    return np.zeros_like(np.atleast_1d(np.asarray(r, dtype=float)))


def test_variational_constant_trial():
    v = P.square_well(2.0, 1.0)
    E = S.variational_energy(_const_one, _const_zero, v, 2.0)
    assert E == pytest.approx(0.5 * v.integral(), rel=1e-10)
    assert S.variational_energy(_const_one, _const_zero, P.hard_core(1.0), 2.0) == math.inf
    assert S.variational_energy(_const_one, _const_zero, P.RadialPotential(), 1.0) == 0.0


def test_variational_minimizer_attains_bound():
    v = P.square_well(2.0, 1.0)
    sol = S.solve(v, r_max=3.0)
    a, Rt = sol.a, 2.0
    scale = 1.0 / (1.0 - a / Rt)

    def phi(r):
        return scale * np.atleast_1d(sol.phi(r))

    def dphi(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        u = np.atleast_1d(sol.u_at(r))
        up = np.atleast_1d(sol.u_prime_at(r))
        return scale * (up * r - u) / (r * r)

    target = 4 * math.pi * a / (1 - a / Rt)
    E = S.variational_energy(phi, dphi, v, Rt)
    assert E == pytest.approx(target, rel=1e-12)
    # any admissible trial sits above the minimum
    E_flat = S.variational_energy(_const_one, _const_zero, v, Rt)
    assert E_flat >= target - 1e-12


def test_variational_rejects_bad_boundary():
    v = P.square_well(2.0, 1.0)
    with pytest.raises(ValueError):
        S.variational_energy(lambda r: 2 * _const_one(r), _const_zero, v, 2.0)
