import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sint

from hvexp._common import QuadratureError
from hvexp.exponents import constant_exponent, make_exponent
from hvexp.quadrature import (PowerWeight, annulus_measure, integrate, make_function, make_grid,
                              modular)


def test_midpoint_measure_dim1():
    g = make_grid(1, -2, 2, 4, 1, "midpoint")
    assert g.weights.sum() == pytest.approx(7.75, rel=1e-15)


@pytest.mark.parametrize("k_min,k_max", [(-3, 2), (-10, 0), (0, 4)])
def test_disk_area_dim2(k_min, k_max):
    g = make_grid(2, k_min, k_max, 8, 16)
    expect = np.pi * (2.0 ** (2 * k_max) - 2.0 ** (2 * (k_min - 1)))
    assert g.weights.sum() == pytest.approx(expect, rel=1e-13)


def test_ball_volume_dim3():
    g = make_grid(3, -4, 3, 8, 32)
    assert g.weights.sum() == pytest.approx(annulus_measure(3, -4, 3), rel=1e-13)


def test_empty_shell_range_rejected():
    with pytest.raises(ValueError, match="k_min < k_max"):
        make_grid(1, 3, 3)


def test_indicator_measure():
    g = make_grid(1, -24, 2, 2048, 1)
    chi = make_function("indicator_annulus", r_in=0, r_out=1)
    assert integrate(chi, g) == pytest.approx(2.0, abs=1e-6)


def test_abs_on_two_shells():
    g = make_grid(1, 0, 1, 64, 1)
    f = make_function("radial_power", a=1)
    assert integrate(f, g) == pytest.approx(3.75, abs=1e-6)


def test_gaussian_matches_scipy_dim2():
    g = make_grid(2, -20, 6, 32, 32)
    f = make_function("gaussian", dim=2, scale=1.7)
    ref = 2 * np.pi * sint.quad(lambda r: r * np.exp(-(r / 1.7) ** 2), 0, np.inf)[0]
    assert integrate(f, g) == pytest.approx(ref, rel=1e-10)


def test_nonfinite_integrand_names_node():
    g = make_grid(1, -2, 2, 4, 1, "midpoint")
    f = make_function("log_abs").composed(np.zeros((1, 1)))
    with pytest.raises(QuadratureError, match="at node"):
        integrate(f, g)


def test_modular_examples():
    g = make_grid(1, -30, 2, 64, 1)
    chi = make_function("indicator_annulus", r_in=0, r_out=1)
    p = constant_exponent(2.0)
    assert modular(chi, p, None, 1.0, g) == pytest.approx(2.0, abs=1e-8)
    assert modular(chi, p, None, np.sqrt(2), g) == pytest.approx(1.0, abs=1e-8)
    zero = make_function("zero")
    assert all(modular(zero, p, None, eta, g) == 0 for eta in (1e-3, 1, 1e3))


@settings(max_examples=30, deadline=None)
@given(eta1=st.floats(0.05, 20), eta2=st.floats(0.05, 20))
def test_modular_nonincreasing_in_eta(eta1, eta2):
    g = make_grid(1, -16, 4, 16, 1)
    f = make_function("gaussian", scale=2.0)
    p = make_exponent("rational_bump", a=1.5, b=1)
    lo, hi = sorted((eta1, eta2))
    m_lo, m_hi = modular(f, p, PowerWeight(0.3), lo, g), modular(f, p, PowerWeight(0.3), hi, g)
    assert m_hi <= m_lo
    if hi > lo * (1 + 1e-9):
        assert m_hi < m_lo


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_integrate_is_linear(a, b):
    g = make_grid(2, -8, 3, 8, 16)
    f = make_function("gaussian", dim=2, scale=1.3)
    h = make_function("bump", dim=2, R=2.0)
    lhs = integrate(f.scaled(a) + h.scaled(b), g)
    rhs = a * integrate(f, g) + b * integrate(h, g)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12 * (abs(a) + abs(b)))


def test_midpoint_refinement_second_order():
    f = make_function("gaussian", scale=1.0)
    exact = np.sqrt(np.pi) * (1 - sint.quad(lambda r: 2 * np.exp(-r * r), 0, 2.0 ** -9)[0]
                              / np.sqrt(np.pi)) - 2 * sint.quad(lambda r: np.exp(-r * r), 8, np.inf)[0]
    errs = [abs(integrate(f, make_grid(1, -8, 3, n, 1, "midpoint")) - exact) for n in (8, 16, 32)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(3.5 < r < 4.5 for r in ratios)


def test_power_weight_ball_mass():
    w = PowerWeight(-0.5)
    assert w.ball_mass(4.0, 1) == pytest.approx(2 * 4.0 ** 0.5 / 0.5)
    with pytest.raises(ValueError):
        PowerWeight(-1.0).ball_mass(1.0, 1)


def test_test_function_transforms():
    f = make_function("truncated_power", a=1, R=2)
    x = np.array([0.5, 1.5, 3.0])
    assert np.allclose(f.scaled(-2)(x), -2 * f(x))
    assert np.allclose(f.dilated(2)(x), f(2 * x))
    assert f.dilated(2).support_radius == 1.0
    assert np.allclose(f.shifted(1)(x), f(x) + 1)
    assert make_function("linear", coef=-3).scaled(2).declared_lip == (1.0, 6.0)


def test_jump_metadata():
    assert make_function("truncated_power", a=1, R=3).jumps == (3.0,)
    assert make_function("truncated_power", a=0, R=3).dilated(2).jumps == (1.5,)
    assert make_function("indicator_annulus", r_in=0, r_out=2).scaled(3).jumps == (2.0,)
    assert make_function("gaussian").jumps == ()
    both = make_function("indicator_annulus", r_in=1, r_out=2) + make_function("bump")
    assert both.jumps == (1.0, 2.0)
