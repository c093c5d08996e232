import math

import numpy as np
import pytest

from nlsblow.field import Grid
from nlsblow.params import PhysParams, exponent_table
from nlsblow.profile import (
    make_profile_grid,
    profile_field,
    profile_grad_laplacian,
    profile_gradient,
    profile_laplacian,
    profile_norm,
    profile_ode_residual,
    profile_radial_derivative,
    profile_time_derivative,
    profile_value,
    verify_scaling,
)

P_UNIT = PhysParams(N=1, alpha=2.0, lam=1j, k=4.0)
P_STUDY = PhysParams(N=1, alpha=2.0, lam=1j, k=6.0)
P_COMPLEX = PhysParams(N=1, alpha=2.0, lam=1 + 1j, k=4.0)


def test_value_closed_form_unit_imaginary():
    # s = 2 at (t, x) = (-1, 0); exponent is real -1/2
    u = profile_value(P_UNIT, -1.0, 0.0)
    assert complex(u) == pytest.approx(2.0**-0.5)
    assert abs(complex(u).imag) < 1e-15


def test_value_closed_form_complex_coefficient():
    u = complex(profile_value(P_COMPLEX, -1.0, 0.0))
    assert abs(u) == pytest.approx(2.0**-0.5)
    assert math.remainder(np.angle(u) - 0.5 * math.log(2.0), 2 * math.pi) == pytest.approx(
        0.0, abs=1e-12
    )


def test_modulus_decouples_from_phase():
    r = np.linspace(0.0, 5.0, 257)
    for p in (P_UNIT, P_COMPLEX):
        u = profile_value(p, -0.7, r)
        s = p.alpha * p.im_lam * (r**p.k + 0.7)
        assert np.max(np.abs(np.abs(u) - s ** (-1 / p.alpha)) / np.abs(u)) < 1e-12


def test_value_decays_at_infinity():
    assert abs(profile_value(P_COMPLEX, -1.0, 1e3)) < 1e-5


def test_rejects_nonnegative_time():
    for bad in (0.0, 0.5):
        with pytest.raises(ValueError):
            profile_value(P_UNIT, bad, 1.0)
        with pytest.raises(ValueError):
            profile_ode_residual(P_UNIT, bad, 1.0)


def test_branch_continuity_along_rays():
    # s stays positive, so the principal power never jumps branches
    r = np.linspace(0.0, 20.0, 20001)
    u = profile_value(P_COMPLEX, -0.3, r)
    dphase = np.abs(np.diff(np.unwrap(np.angle(u))))
    assert dphase.max() < 0.05


def test_gradient_vanishes_at_origin():
    assert profile_radial_derivative(P_UNIT, -1.0, 0.0) == 0.0
    g = profile_gradient(PhysParams(N=3, alpha=2.0, lam=1j, k=4.0), -1.0, [0.0, 0.0, 0.0])
    assert np.all(g == 0.0)


def test_gradient_matches_finite_differences():
    h = 1e-4
    for p, x in ((P_UNIT, 1.0), (P_COMPLEX, 0.7), (P_STUDY, 1.3)):
        fd = (profile_value(p, -1.0, x + h) - profile_value(p, -1.0, x - h)) / (2 * h)
        an = profile_radial_derivative(p, -1.0, x)
        assert abs(an - fd) / abs(an) < 1e-6


def test_gradient_parallel_to_position():
    p = PhysParams(N=3, alpha=2.0, lam=1j, k=4.0)
    x = np.array([0.3, -1.2, 0.5])
    g = profile_gradient(p, -0.5, x)
    cross = np.cross(g, x.astype(complex))
    assert np.abs(cross).max() < 1e-12 * np.abs(g).max() * np.linalg.norm(x)


def test_laplacian_matches_finite_differences():
    h = 1e-3
    p = PhysParams(N=3, alpha=2.0, lam=1j, k=4.0)
    r = 1.1
    f = lambda rr: profile_value(p, -1.0, rr)
    fd = (f(r + h) - 2 * f(r) + f(r - h)) / h**2 + (p.N - 1) / r * (
        f(r + h) - f(r - h)
    ) / (2 * h)
    an = profile_laplacian(p, -1.0, r)
    assert abs(an - fd) / abs(an) < 1e-5


def test_grad_laplacian_matches_finite_differences():
    h = 1e-4
    p = PhysParams(N=3, alpha=2.0, lam=1j, k=6.0)
    r = 0.9
    fd = (profile_laplacian(p, -1.0, r + h) - profile_laplacian(p, -1.0, r - h)) / (2 * h)
    an = profile_grad_laplacian(p, -1.0, r)
    assert abs(an - fd) / abs(an) < 1e-6
    assert profile_grad_laplacian(p, -1.0, 0.0) == 0.0


def test_ode_residual_is_roundoff():
    t_grid = -np.geomspace(2.0, 0.01, 100)
    r_grid = np.linspace(0.0, 10.0, 100)
    for p in (P_UNIT, P_COMPLEX):
        worst = max(
            profile_ode_residual(p, t, r_grid, relative=True).max() for t in t_grid
        )
        assert worst < 1e-12


def test_ode_residual_finite_difference_richardson():
    # centered-difference U_t converges at second order in the time increment
    p = P_COMPLEX
    r = np.linspace(0.0, 3.0, 50)
    t = -1.0
    res = []
    for dt in (1e-3, 5e-4):
        ut_fd = (profile_value(p, t + dt, r) - profile_value(p, t - dt, r)) / (2 * dt)
        u = profile_value(p, t, r)
        res.append(np.abs(1j * ut_fd - p.lam * np.abs(u) ** p.alpha * u).max())
    assert res[0] / res[1] == pytest.approx(4.0, rel=0.05)


def test_time_derivative_consistency():
    # iU_t = lam s^{c-1} exactly equals lam |U|^alpha U
    r = np.linspace(0, 4, 33)
    u = profile_value(P_COMPLEX, -0.8, r)
    ut = profile_time_derivative(P_COMPLEX, -0.8, r)
    assert np.abs(1j * ut - P_COMPLEX.lam * np.abs(u) ** 2 * u).max() < 1e-14


def test_norm_self_similarity():
    grid = make_profile_grid(P_STUDY, [-2.0, -1.0])
    for lp in (2.0, 4.0):
        ratio = profile_norm(P_STUDY, -2.0, lp, grid=grid) / profile_norm(
            P_STUDY, -1.0, lp, grid=grid
        )
        assert ratio == pytest.approx(2.0 ** (-0.5 + 1 / (lp * 6.0)), rel=1e-3)


def test_sup_norm_closed_form():
    # ||U(t)||_inf = (2(-t))^{-1/2} for lam=i, alpha=2
    for t in (-1.0, -0.3):
        assert profile_norm(P_UNIT, t, math.inf) == pytest.approx(
            (2.0 * -t) ** -0.5, rel=1e-12
        )


def test_norm_diverges_toward_blowup():
    grid = make_profile_grid(P_STUDY, [-1.0, -1e-3])
    norms = [profile_norm(P_STUDY, t, 4.0, grid=grid) for t in (-1.0, -0.1, -0.01, -1e-3)]
    assert np.all(np.diff(norms) > 0)


def test_h1_monotone_increasing_toward_blowup():
    grid = make_profile_grid(P_STUDY, [-1.0, -0.01], quantity="grad_lp")
    t_list = -np.geomspace(1.0, 0.01, 9)
    h1 = [
        math.hypot(
            profile_norm(P_STUDY, t, 2.0, grid=grid),
            profile_norm(P_STUDY, t, 2.0, grid=grid, quantity="grad_lp"),
        )
        for t in t_list
    ]
    assert np.all(np.diff(h1) > 0)


def test_non_integrable_tail_reported():
    # N = 5, k = 4, alpha = 2, p = 2: tail power p k / alpha = 4 < N
    p_bad = PhysParams(N=5, alpha=2.0, lam=1j, k=4.0)
    with pytest.raises(ValueError, match="[Nn]on-integrable"):
        profile_norm(p_bad, -1.0, 2.0)


def test_profile_field_matches_values():
    g = Grid(mode="cartesian", N=1, num_points=256, radius=8.0)
    f = profile_field(P_STUDY, -1.0, g)
    assert np.allclose(f.values, profile_value(P_STUDY, -1.0, np.abs(g.coords)))
    assert f.time_tag == -1.0


def test_verify_scaling_matches_predictions():
    t_list = -np.geomspace(1.0, 0.1, 9)
    for quantity, lp in (("lp", 2.0), ("lp", math.inf), ("grad_lp", 2.0), ("lap_l2", 2.0), ("gradlap_l2", 2.0)):
        fit = verify_scaling(P_STUDY, quantity, t_list, lp=lp)
        assert abs(fit.fitted_slope - fit.predicted_slope) < 1e-2


def test_weighted_scaling_one_sided_for_small_times():
    # the weight degrades the slope only through the factor 1 + (-t)^{1/k},
    # which becomes negligible for very small times
    fit_small = verify_scaling(P_STUDY, "weighted_lap_l2", -np.geomspace(1e-8, 1e-9, 9))
    assert fit_small.fitted_slope <= fit_small.predicted_slope + 1e-2
    # at desk times the crossover is visible: slope sits above the asymptote
    fit_desk = verify_scaling(P_STUDY, "weighted_lap_l2", -np.geomspace(1.0, 0.1, 9))
    assert fit_desk.fitted_slope > fit_desk.predicted_slope


def test_scaling_fit_csv(tmp_path):
    fit = verify_scaling(P_STUDY, "lp", -np.geomspace(1.0, 0.1, 9), lp=2.0)
    path = tmp_path / "scaling.csv"
    fit.to_csv(path)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "t,norm,predicted,fitted"
    assert len(rows) == 10


def test_exponent_table_consistency_with_norms():
    tab = exponent_table(P_STUDY)
    fit = verify_scaling(P_STUDY, "lp", -np.geomspace(1.0, 0.1, 9), lp=2.0)
    assert fit.predicted_slope == pytest.approx(tab.profile_lp(2.0))
