"""Scale-invariant quantity tests: closed forms, consistency, scaling."""

import math

import numpy as np
import pytest

from nsreg.errors import ValidationError, WindowError
from nsreg.fields import Ball, Grid3, ParabolicCylinder, ScalarField3
from nsreg.norms import DualNormProblem, dual_norm, singular_oscillation_field
from nsreg.pressure import spatial_mean
from nsreg.quantities import (
    beta_of_alpha,
    quantity_A,
    quantity_B,
    quantity_C_alphabeta,
    quantity_C_sigma,
    quantity_D_alphabeta,
    quantity_D_sigma,
    window_indices,
    window_integral,
)
from nsreg.spectral import get_workspace

from _oracles import (
    BOX,
    CENTER,
    analytic_band_limited_series,
    ball_volume,
    constant_series,
    cos_squared_ball_integral,
    full3,
    random_series,
    scaled_series,
    steady_series,
    zero_series,
)


def test_window_error_lists_times():
    g = Grid3(8, BOX)
    series = zero_series(g, [0.0, 0.1])
    with pytest.raises(WindowError) as err:
        window_indices(series, 5.0, 0.5)
    assert "0.1" in str(err.value)


def test_window_integral_single_sample_rectangle():
    # one in-window sample integrates as value * window length
    assert window_integral([0.3], [2.0], 0.0, 1.0) == pytest.approx(2.0)


def test_window_integral_constant_extension():
    # samples at 0.25, 0.5, 0.75 in [0, 1]: trapezoid inside, constant ends
    val = window_integral([0.25, 0.5, 0.75], [1.0, 3.0, 5.0], 0.0, 1.0)
    assert val == pytest.approx(0.25 * 1.0 + (0.5 + 1.0) + 0.25 * 5.0)


def test_quantity_A_constant_closed_form():
    # |u| = 1 on a ball of radius 1/2 in a box of length 4
    g = Grid3(64, 4.0)
    series = constant_series(g, (1.0, 0.0, 0.0), 0.0, [0.0])
    cyl = ParabolicCylinder((2.0, 2.0, 2.0), 0.0, 0.5)
    a = quantity_A(series, cyl)
    assert abs(a.value - np.pi / 3.0) < 0.05 * np.pi / 3.0
    assert a.snapshots_used == 1


def test_quantity_A_zero():
    g = Grid3(8, BOX)
    series = zero_series(g, [0.0])
    assert quantity_A(series, ParabolicCylinder(CENTER, 0.0, 0.4)).value == 0.0


def test_quantity_B_constant_is_zero():
    g = Grid3(16, BOX)
    ws = get_workspace(g)
    series = constant_series(g, (2.0, -1.0, 0.5), 0.0, [0.0, 0.1, 0.2])
    cyl = ParabolicCylinder(CENTER, 0.2, 0.4)
    assert quantity_B(series, cyl, ws).value < 1e-24


def test_quantity_B_shear_closed_form():
    # u = (sin(2 pi y / L), 0, 0) steady: |grad u|^2 = k^2 cos^2(k y)
    n = 64
    g = Grid3(n, BOX)
    ws = get_workspace(g)
    k = 2 * np.pi / BOX
    y = g.axis_coords()
    ux = full3(np.sin(k * y)[None, :, None], n)
    series = steady_series(g, [ux, np.zeros_like(ux), np.zeros_like(ux)],
                           np.zeros_like(ux), np.linspace(0.0, 0.25, 6))
    r = 0.5
    cyl = ParabolicCylinder(CENTER, 0.25, r)
    expected = (1.0 / r) * r**2 * k**2 * cos_squared_ball_integral(k, r, CENTER[1])
    got = quantity_B(series, cyl, ws).value
    assert abs(got - expected) < 0.05 * expected


def test_quantity_C_sigma_single_snapshot_composition():
    g = Grid3(16, BOX)
    ws = get_workspace(g)
    c = 1.3
    series = constant_series(g, (c, 0.0, 0.0), 0.0, [0.0])
    r, sigma = 0.5, 0.5
    cyl = ParabolicCylinder(CENTER, 0.0, r)
    got = quantity_C_sigma(series, cyl, sigma, ws).value
    dn = dual_norm(
        DualNormProblem(ScalarField3(g, np.full((16,) * 3, c**2)), Ball(CENTER, r), sigma),
        ws).value
    expected = r ** (-3.0 / (2 - sigma)) * r**2 * dn ** (2.0 / (2 - sigma))
    assert abs(got - expected) < 1e-12 * expected


def test_quantity_C_zero_fields():
    g = Grid3(16, BOX)
    ws = get_workspace(g)
    series = zero_series(g, [0.0, 0.1])
    cyl = ParabolicCylinder(CENTER, 0.1, 0.3)
    assert quantity_C_sigma(series, cyl, 0.5, ws).value == 0.0
    assert quantity_C_alphabeta(series, cyl, 1.5, 4.0 / 3.0).value == 0.0
    assert quantity_D_sigma(series, cyl, 0.5, ws).value == 0.0
    assert quantity_D_alphabeta(series, cyl, 1.0, 1.0).value == 0.0


def test_quantity_C_sigma_zero_matches_alphabeta_endpoint():
    g = Grid3(16, BOX)
    ws = get_workspace(g)
    series = random_series(g, np.random.default_rng(0), [0.0, 0.06, 0.12], ws)
    cyl = ParabolicCylinder(CENTER, 0.12, 0.3)
    c0 = quantity_C_sigma(series, cyl, 0.0, ws).value
    cab = quantity_C_alphabeta(series, cyl, 2.0, 1.0).value
    assert abs(c0 - cab) < 1e-9 * cab


def test_quantity_D_sigma_zero_matches_alphabeta_endpoint():
    g = Grid3(16, BOX)
    ws = get_workspace(g)
    series = random_series(g, np.random.default_rng(1), [0.0, 0.06, 0.12], ws)
    cyl = ParabolicCylinder(CENTER, 0.12, 0.3)
    d0 = quantity_D_sigma(series, cyl, 0.0, ws).value
    dab = quantity_D_alphabeta(series, cyl, 2.0, 1.0).value
    assert abs(d0 - dab) < 1e-12 * dab


def test_quantity_D_sigma_captures_oscillation():
    # ball-mean-zero singular oscillation profile: the signed pressure has a
    # strictly smaller dual norm quantity than its absolute value
    g = Grid3(32, BOX)
    ws = get_workspace(g)
    ball = Ball(CENTER, 0.5)
    f = singular_oscillation_field(g, CENTER, 2.4, 0.2)
    p_vals = f.values - spatial_mean(f, ball)
    times = [0.0, 0.1]
    zero = np.zeros((32, 32, 32))
    signed = steady_series(g, [zero, zero, zero], p_vals, times)
    unsigned = steady_series(g, [zero, zero, zero], np.abs(p_vals), times)
    cyl = ParabolicCylinder(CENTER, 0.1, 0.5)
    d_signed = quantity_D_sigma(signed, cyl, 1.0, ws).value
    d_unsigned = quantity_D_sigma(unsigned, cyl, 1.0, ws).value
    assert d_signed < d_unsigned


def test_quantity_D_alphabeta_constant_closed_form():
    g = Grid3(64, BOX)
    series = constant_series(g, (0.0, 0.0, 0.0), 1.0, np.linspace(0.0, 0.25, 6))
    r = 0.5
    cyl = ParabolicCylinder(CENTER, 0.25, r)
    got = quantity_D_alphabeta(series, cyl, 1.0, 1.0).value
    expected = r ** (-1.5) * r**2 * ball_volume(r)
    assert abs(got - expected) < 0.05 * expected


def test_quantity_D_alphabeta_l1_composition():
    from nsreg.norms import lq_ball_norm

    g = Grid3(16, BOX)
    rng = np.random.default_rng(2)
    p_vals = rng.standard_normal((16, 16, 16))
    zero = np.zeros_like(p_vals)
    series = steady_series(g, [zero, zero, zero], p_vals, [0.0, 0.1, 0.2])
    r = 0.4
    cyl = ParabolicCylinder(CENTER, 0.2, r)
    got = quantity_D_alphabeta(series, cyl, 1.0, 1.0).value
    expected = r ** (-1.5) * r**2 * lq_ball_norm(series.snapshots[0].pressure,
                                                 Ball(CENTER, r), 1.0)
    assert abs(got - expected) < 1e-12 * expected


def test_quantity_C_alphabeta_constant_composition():
    from nsreg.norms import lq_ball_norm

    g = Grid3(16, BOX)
    c = 0.8
    series = constant_series(g, (c, 0.0, 0.0), 0.0, np.linspace(0.0, 0.25, 4))
    r, alpha, beta = 0.5, 1.5, 4.0 / 3.0
    cyl = ParabolicCylinder(CENTER, 0.25, r)
    got = quantity_C_alphabeta(series, cyl, alpha, beta).value
    speed = ScalarField3(g, np.full((16,) * 3, c))
    expected = r ** (-1.5 * beta) * r**2 * lq_ball_norm(
        speed, Ball(CENTER, r), 2 * alpha) ** (2 * beta)
    assert abs(got - expected) < 1e-10 * expected


def test_quantity_C_alphabeta_accepts_spatial_improvement_pair():
    # the (18/13, 3/2) exponent pair is a valid input
    g = Grid3(16, BOX)
    series = zero_series(g, [0.0])
    cyl = ParabolicCylinder(CENTER, 0.0, 0.3)
    assert quantity_C_alphabeta(series, cyl, 18.0 / 13.0, 1.5).value == 0.0


def test_alphabeta_validation():
    g = Grid3(8, BOX)
    series = zero_series(g, [0.0])
    cyl = ParabolicCylinder(CENTER, 0.0, 0.3)
    with pytest.raises(ValidationError):
        quantity_C_alphabeta(series, cyl, 0.9, 1.0)
    with pytest.raises(ValidationError):
        quantity_D_alphabeta(series, cyl, 1.0, 0.5)


def test_sigma_range_validation():
    g = Grid3(8, BOX)
    ws = get_workspace(g)
    series = zero_series(g, [0.0])
    cyl = ParabolicCylinder(CENTER, 0.0, 0.3)
    with pytest.raises(ValidationError):
        quantity_C_sigma(series, cyl, 1.2, ws)
    with pytest.raises(ValidationError):
        quantity_D_sigma(series, cyl, -0.1, ws)


def test_beta_of_alpha_exact_values():
    cases = [
        (1.2, 2.0),
        (2.0, 1.0),
        (1.5, 4.0 / 3.0),
        (18.0 / 13.0, 1.5),
        (10.0 / 7.0, 10.0 / 7.0),
    ]
    for alpha, beta in cases:
        assert math.isclose(beta_of_alpha(alpha), beta, rel_tol=1e-14)
    with pytest.raises(ValidationError):
        beta_of_alpha(1.1)
    with pytest.raises(ValidationError):
        beta_of_alpha(2.1)


def test_homogeneity_scaling_identities():
    g = Grid3(16, BOX)
    ws = get_workspace(g)
    series = random_series(g, np.random.default_rng(3), [0.0, 0.06, 0.12], ws)
    doubled = scaled_series(series, 2.0)
    cyl = ParabolicCylinder(CENTER, 0.12, 0.3)
    sigma, alpha = 0.5, 1.5
    beta = beta_of_alpha(alpha)
    checks = [
        (quantity_A(series, cyl).value, quantity_A(doubled, cyl).value, 2.0),
        (quantity_B(series, cyl, ws).value, quantity_B(doubled, cyl, ws).value, 2.0),
        (quantity_C_sigma(series, cyl, sigma, ws, 1e-12).value,
         quantity_C_sigma(doubled, cyl, sigma, ws, 1e-12).value, 4.0 / (2 - sigma)),
        (quantity_D_sigma(series, cyl, sigma, ws, 1e-12).value,
         quantity_D_sigma(doubled, cyl, sigma, ws, 1e-12).value, 4.0 / (2 - sigma)),
        (quantity_C_alphabeta(series, cyl, alpha, beta).value,
         quantity_C_alphabeta(doubled, cyl, alpha, beta).value, 2.0 * beta),
        (quantity_D_alphabeta(series, cyl, alpha, beta).value,
         quantity_D_alphabeta(doubled, cyl, alpha, beta).value, 2.0 * beta),
    ]
    for base, scaled, degree in checks:
        assert scaled == pytest.approx(base * 2.0**degree, rel=1e-9)


def test_two_grid_scaling_invariance():
    # sample the analytic fields and their Navier-Stokes rescaling on a
    # half-size box: every quantity must agree on the mapped cylinders
    n, lam = 32, 2.0
    g1 = Grid3(n, BOX)
    g2 = Grid3(n, BOX / lam)
    ws1, ws2 = get_workspace(g1), get_workspace(g2)
    r1, t01 = 0.5, 0.3
    times1 = np.linspace(t01 - r1**2, t01, 7)
    s1 = analytic_band_limited_series(g1, 1.0, times1)
    s2 = analytic_band_limited_series(g2, lam, times1 / lam**2)
    cyl1 = ParabolicCylinder(CENTER, t01, r1)
    cyl2 = ParabolicCylinder(tuple(c / lam for c in CENTER), t01 / lam**2, r1 / lam)
    pairs = [
        (quantity_A(s1, cyl1).value, quantity_A(s2, cyl2).value),
        (quantity_B(s1, cyl1, ws1).value, quantity_B(s2, cyl2, ws2).value),
        (quantity_C_sigma(s1, cyl1, 0.5, ws1).value,
         quantity_C_sigma(s2, cyl2, 0.5, ws2).value),
        (quantity_D_sigma(s1, cyl1, 0.5, ws1).value,
         quantity_D_sigma(s2, cyl2, 0.5, ws2).value),
        (quantity_C_alphabeta(s1, cyl1, 1.5, 4.0 / 3.0).value,
         quantity_C_alphabeta(s2, cyl2, 1.5, 4.0 / 3.0).value),
        (quantity_D_alphabeta(s1, cyl1, 1.5, 4.0 / 3.0).value,
         quantity_D_alphabeta(s2, cyl2, 1.5, 4.0 / 3.0).value),
    ]
    for base, scaled in pairs:
        assert abs(scaled - base) <= 0.02 * abs(base)
