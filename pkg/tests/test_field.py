import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlsblow.field import (
    Field,
    Grid,
    field_from_csv,
    field_to_csv,
    gradient,
    laplacian,
    lp_norm,
    norm_report,
    power_diff_bound_check,
    sphere_area,
    weighted_l2_norm,
)


@pytest.fixture
def line_grid():
    return Grid(mode="cartesian", N=1, num_points=1024, radius=10.0)


@pytest.fixture
def ball_grid():
    return Grid(mode="radial", N=3, num_points=800, radius=8.0)


def gaussian(grid, width=1.0):
    return Field(grid, np.exp(-(grid.coords / width) ** 2))


def test_grid_invariants():
    g = Grid(mode="cartesian", N=1, num_points=101, radius=5.0)
    assert g.spacing * (g.num_points - 1) == pytest.approx(2 * g.radius)
    r = Grid(mode="radial", N=4, num_points=101, radius=5.0)
    assert r.spacing * (r.num_points - 1) == pytest.approx(r.radius)
    with pytest.raises(ValueError):
        Grid(mode="cartesian", N=2, num_points=64, radius=1.0)
    with pytest.raises(ValueError):
        Grid(mode="radial", N=3, num_points=8, radius=1.0)


def test_sphere_areas():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(4) == pytest.approx(2 * math.pi**2)
    assert sphere_area(5) == pytest.approx(8 * math.pi**2 / 3)


def test_zero_field_norms(line_grid):
    z = Field(line_grid, np.zeros(line_grid.num_points))
    rep = norm_report(z, 2.0)
    assert rep.l2 == rep.h1 == rep.sigma == rep.l_alpha_plus_2 == 0.0


def test_gaussian_l2_analytic(line_grid):
    # int e^{-2x^2} dx = sqrt(pi/2)
    assert lp_norm(gaussian(line_grid), 2.0) == pytest.approx(
        (math.pi / 2) ** 0.25, abs=1e-6
    )


def test_gaussian_l2_radial_analytic(ball_grid):
    # int_{R^3} e^{-2r^2} dx = (pi/2)^{3/2}
    assert lp_norm(gaussian(ball_grid), 2.0) == pytest.approx(
        (math.pi / 2) ** 0.75, rel=1e-6
    )


def test_plateau_lp_norm():
    g = Grid(mode="cartesian", N=1, num_points=4097, radius=10.0)
    vals = np.where(np.abs(g.coords) <= 2.0, 3.0, 0.0)
    f = Field(g, vals)
    for p in (1.0, 2.0, 4.0):
        assert lp_norm(f, p) == pytest.approx(3.0 * 4.0 ** (1 / p), rel=2e-3)
    assert lp_norm(f, math.inf) == 3.0


def test_linf_is_max_modulus():
    g = Grid(mode="cartesian", N=1, num_points=1025, radius=10.0)  # odd: 0 on grid
    f = Field(g, 1j * np.exp(-g.coords**2))
    assert lp_norm(f, math.inf) == pytest.approx(1.0)


def test_constant_field_derivatives_vanish(line_grid, ball_grid):
    for g in (line_grid, ball_grid):
        c = Field(g, np.full(g.num_points, 2.0 + 1.0j))
        assert np.abs(gradient(c).values).max() < 1e-10
        assert np.abs(laplacian(c).values).max() < 1e-10


def test_spectral_laplacian_gaussian(line_grid):
    f = gaussian(line_grid)
    exact = (4 * line_grid.coords**2 - 2) * np.exp(-line_grid.coords**2)
    assert np.abs(laplacian(f).values - exact).max() < 1e-9


def test_radial_laplacian_gaussian_second_order():
    # Lap e^{-r^2} = (4 r^2 - 6) e^{-r^2} in N = 3
    errs = []
    for num in (400, 800):
        g = Grid(mode="radial", N=3, num_points=num, radius=8.0)
        exact = (4 * g.coords**2 - 6) * np.exp(-g.coords**2)
        errs.append(np.abs(laplacian(gaussian(g)).values - exact).max())
    assert errs[0] / errs[1] >= 3.8


def test_radial_gradient_second_order():
    errs = []
    for num in (400, 800):
        g = Grid(mode="radial", N=5, num_points=num, radius=8.0)
        exact = -2 * g.coords * np.exp(-g.coords**2)
        errs.append(np.abs(gradient(gaussian(g)).values - exact).max())
    assert errs[0] / errs[1] >= 3.8


def test_norm_report_identities(line_grid):
    f = Field(line_grid, np.exp(-line_grid.coords**2) * np.exp(1j * line_grid.coords))
    rep = norm_report(f, 2.0)
    assert rep.h1**2 == pytest.approx(rep.l2**2 + rep.h1_dot**2, rel=1e-12)
    assert rep.sigma**2 == pytest.approx(rep.h1**2 + rep.weighted_l2**2, rel=1e-12)


def test_weighted_norm_window_support():
    g = Grid(mode="cartesian", N=1, num_points=2048, radius=20.0)
    # windowed plane wave far from the origin: weight is about the window center
    center = 12.0
    f = Field(g, np.exp(-((g.coords - center) ** 2)) * np.exp(3j * g.coords))
    ratio = weighted_l2_norm(f) / lp_norm(f, 2.0)
    assert ratio == pytest.approx(center, rel=0.01)


@settings(max_examples=40, deadline=None)
@given(
    scale=st.floats(min_value=1e-6, max_value=1e6),
    phase=st.floats(min_value=-math.pi, max_value=math.pi),
)
def test_lp_norm_homogeneity(scale, phase):
    g = Grid(mode="cartesian", N=1, num_points=128, radius=5.0)
    f = Field(g, np.exp(-g.coords**2) * (1 + 0.3j))
    c = scale * np.exp(1j * phase)
    scaled = Field(g, c * f.values)
    for p in (1.0, 2.0, 3.5, math.inf):
        assert lp_norm(scaled, p) == pytest.approx(abs(c) * lp_norm(f, p), rel=1e-12)


def test_field_rejects_nan():
    g = Grid(mode="cartesian", N=1, num_points=64, radius=1.0)
    vals = np.ones(64, dtype=complex)
    vals[3] = np.nan
    with pytest.raises(FloatingPointError):
        Field(g, vals).check_finite()


def test_field_csv_round_trip(tmp_path, line_grid):
    f = Field(line_grid, np.exp(-line_grid.coords**2) * (0.3 + 0.7j), time_tag=-1.0)
    path = tmp_path / "snap.csv"
    field_to_csv(f, path)
    back = field_from_csv(path, line_grid, time_tag=-1.0)
    assert np.abs(back.values - f.values).max() < 1e-12


# --- power-difference inequality -------------------------------------------


def test_power_diff_equal_arguments_vanish():
    lhs, _ = power_diff_bound_check(2.0 + 1.0j, 2.0 + 1.0j, 1.5, 1)
    assert lhs == 0.0


def test_power_diff_reference_point():
    # p=2, n=0: | |2|^2 - |1|^2 | = 3 <= (2 + 1) * 1 with constant one
    lhs, (maj_lip, _) = power_diff_bound_check(2.0, 1.0, 2.0, 0)
    assert lhs == pytest.approx(3.0)
    assert maj_lip == pytest.approx(3.0)


def test_power_diff_zero_argument_is_finite():
    lhs, (maj_lip, maj_hoe) = power_diff_bound_check(0.0, 1.0, 0.5, 2)
    assert np.isfinite(lhs)
    assert lhs == pytest.approx(1.0)  # |0 - |1|^{-1.5} 1^2| = 1
    assert maj_hoe == pytest.approx(1.0)


@settings(max_examples=60, deadline=None)
@given(
    z=st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3),
    w=st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3),
    scale=st.floats(min_value=1e-2, max_value=1e2),
    p=st.sampled_from([0.5, 1.0, 1.5, 2.0, 3.0]),
    n=st.sampled_from([0, 1, 2]),
)
def test_power_diff_ratio_scale_invariant(z, w, scale, p, n):
    """lhs and both majorants are homogeneous of degree p."""
    lhs1, (a1, b1) = power_diff_bound_check(z, w, p, n)
    lhs2, (a2, b2) = power_diff_bound_check(scale * z, scale * w, p, n)
    assert lhs2 == pytest.approx(scale**p * lhs1, rel=1e-9, abs=1e-12)
    assert a2 == pytest.approx(scale**p * a1, rel=1e-9, abs=1e-12)
    assert b2 == pytest.approx(scale**p * b1, rel=1e-9, abs=1e-12)


def test_power_diff_monte_carlo_sup_is_stable():
    """Empirical sup of lhs/majorant over random pairs: finite, stable."""
    rng = np.random.default_rng(7)
    m = 20_000
    z = rng.standard_normal(2 * m) + 1j * rng.standard_normal(2 * m)
    w = rng.standard_normal(2 * m) + 1j * rng.standard_normal(2 * m)
    for p in (0.5, 1.0, 1.5, 2.0, 3.0):
        for n in (0, 1, 2):
            lhs, (maj_lip, maj_hoe) = power_diff_bound_check(z, w, p, n)
            maj = maj_lip if p >= 1 else maj_hoe
            ratio = np.where(maj > 0, lhs / np.where(maj > 0, maj, 1.0), 0.0)
            s_half, s_full = ratio[:m].max(), ratio.max()
            assert np.isfinite(s_full)
            assert s_full <= 4.0  # generous envelope for these (p, n)
            assert (s_full - s_half) / s_half < 0.05
