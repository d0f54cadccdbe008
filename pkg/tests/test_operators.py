import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sint

from hvexp._common import NormInfiniteError, QuadratureError
from hvexp.matrixfam import make_family, make_kernel
from hvexp.operators import (HardySpec, OperatorSpec, apply, cube_rule, operator_function,
                             reduction_check, special_apply)
from hvexp.quadrature import make_function

CHI = make_kernel("power_cube", dim=1, sigma=0.0)         # Phi = chi_(0,1]
T_CHI = make_kernel("power_cube", dim=1, sigma=1.0)       # Phi = t chi_(0,1]
SCALAR = make_family("scalar", dim=1)
ONE4 = make_function("truncated_power", a=0.0, R=4.0)    # 1 on |y| <= 4
LIN = make_function("linear")


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_hardy_power_closed_form(a):
    spec = OperatorSpec(CHI, [SCALAR], [make_function("radial_power", a=a)])
    x = np.array([0.5, 1.0, 2.0])
    assert apply(spec, x) == pytest.approx(np.abs(x) ** a / a, rel=1e-5)


def test_hardy_at_two():
    spec = OperatorSpec(CHI, [SCALAR], [make_function("radial_power", a=1.0)])
    assert apply(spec, 2.0)[0] == pytest.approx(2.0, abs=1e-5)


def test_linear_commutator_half():
    spec = OperatorSpec(T_CHI, [SCALAR], [ONE4], [LIN])
    assert apply(spec, 1.0)[0] == pytest.approx(0.5, abs=1e-6)


def test_constant_symbol_vanishes_exactly():
    spec = OperatorSpec(T_CHI, [SCALAR], [ONE4], [make_function("constant", value=7.0)])
    assert np.all(apply(spec, np.linspace(-3, 3, 13)) == 0)


def test_identity_family_vanishes_exactly():
    spec = OperatorSpec(T_CHI, [make_family("identity", dim=1)], [ONE4], [LIN])
    assert np.all(apply(spec, np.linspace(-3, 3, 13)) == 0)


def test_zero_kernel():
    spec = OperatorSpec(make_kernel("zero", dim=1), [SCALAR], [ONE4], [LIN])
    assert np.all(apply(spec, [1.0, 2.0]) == 0)


@settings(max_examples=25, deadline=None)
@given(c1=st.floats(-10, 10), c2=st.floats(-10, 10))
def test_apply_linear_in_each_input(c1, c2):
    fam = make_family("scalar", dim=2)
    kern = make_kernel("power_annulus", dim=2, sigma=2.5, r_in=0.0, r_out=1.0, positive=True)
    f, g = make_function("gaussian", dim=2), make_function("bump", dim=2, R=2.0)
    h = make_function("gaussian", dim=2, scale=0.5)
    x = np.array([[0.5, 0.25], [1.0, -1.0], [-0.3, 0.9]])
    mix = apply(OperatorSpec(kern, [fam, fam], [f.scaled(c1) + g.scaled(c2), h]), x)
    sep = (c1 * apply(OperatorSpec(kern, [fam, fam], [f, h]), x)
           + c2 * apply(OperatorSpec(kern, [fam, fam], [g, h]), x))
    scale = abs(c1) + abs(c2) + 1
    assert np.allclose(mix, sep, rtol=1e-10, atol=1e-10 * scale)


@settings(max_examples=25, deadline=None)
@given(c=st.floats(-100, 100))
def test_symbol_shift_invariance(c):
    spec = OperatorSpec(T_CHI, [SCALAR], [ONE4], [LIN])
    x = np.linspace(-3, 3, 7)
    shifted = apply(spec.replace(symbols=[LIN.shifted(c)]), x)
    assert np.allclose(shifted, apply(spec, x), rtol=1e-12, atol=1e-12 * (1 + abs(c)))


def test_positivity():
    b = make_function("radial_power", a=1.0)
    spec = OperatorSpec(T_CHI, [SCALAR], [make_function("gaussian")], [b])
    assert np.all(apply(spec, np.linspace(-5, 5, 21)) >= 0)


def test_dim2_against_scipy():
    fam = make_family("scalar", dim=2)
    kern = make_kernel("power_cube", dim=2, sigma=3.0)
    f = make_function("gaussian", dim=2)
    x = np.array([[0.7, -0.4]])
    got = apply(OperatorSpec(kern, [fam], [f]), x)[0]
    r2 = float(np.sum(x ** 2))

    def integrand(t2, t1):
        s = np.hypot(t1, t2)
        return s ** 3 / s ** 2 * np.exp(-s * s * r2)
    ref = sint.dblquad(integrand, 0, 1, 0, 1, epsabs=1e-13)[0]
    assert got == pytest.approx(ref, rel=1e-7)


def test_nonfinite_integrand_names_t():
    spec = OperatorSpec(CHI, [SCALAR], [make_function("log_abs")])
    with pytest.raises(QuadratureError, match="t="):
        apply(spec, 0.0)


def test_divergent_t_integral_raises():
    spec = OperatorSpec(CHI, [SCALAR], [make_function("constant", value=1.0)])
    with pytest.raises(NormInfiniteError):
        apply(spec, 1.0)


def test_spec_validation():
    with pytest.raises(ValueError, match="inconsistent dimensions"):
        OperatorSpec(CHI, [make_family("scalar", dim=2)], [ONE4])
    with pytest.raises(ValueError, match="symbols"):
        OperatorSpec(CHI, [SCALAR], [ONE4], [LIN, LIN])


def test_operator_function_memoized_and_supported():
    calls = []
    base = make_function("truncated_power", a=1.0, R=2.0)
    spy = make_function("truncated_power", a=1.0, R=2.0)
    object.__setattr__(spy, "func", lambda X: calls.append(len(X)) or base.func(X))
    H = operator_function(OperatorSpec(T_CHI, [SCALAR], [spy], [LIN]))
    x = np.array([0.5, 1.5, 0.5])
    first = H(x)
    n_calls = len(calls)
    assert np.array_equal(H(x), first) and len(calls) == n_calls
    # x -> f(t x) vanishes for |x| > R / min t, so the output support is unbounded
    # on a t-grid reaching 2**-60; the bound must be at least R
    assert H.support_radius >= 2.0


def test_hardy_14_value_and_reduction():
    b = make_function("radial_power", dim=2, a=1.0)
    one = make_function("constant", dim=2, value=1.0)
    spec = HardySpec("hardy_14", 2, [one, one], [b, b])
    # the graded cube rule stops at 2**-30 in each coordinate
    assert special_apply("hardy_14", spec, [1.0, 1.0])[0] == pytest.approx(0.5, abs=1e-8)
    pts = np.array([[1.0, 1.0], [0.5, -0.25], [-2.0, 0.3], [0.1, 0.1], [1.5, -1.0]])
    assert reduction_check(spec, pts) <= 1e-4


def test_hardy_cesaro_values():
    one = make_function("truncated_power", a=0.0, R=4.0)
    scale = [{"coef": 1.0, "power": 1.0}]
    flat = HardySpec("hardy_cesaro_15", 1, [one], [LIN], weight=1.0, scales=scale)
    assert special_apply("hardy_cesaro_15", flat, 1.0)[0] == pytest.approx(0.5, abs=1e-8)
    # psi(t) = t: int_0^1 t (x - t x) dt = x/6
    tilted = HardySpec("hardy_cesaro_15", 1, [one], [LIN],
                       weight={"kind": "monomial", "powers": [1.0]}, scales=scale)
    ref = sint.quad(lambda t: t * (1 - t), 0, 1)[0]
    assert special_apply("hardy_cesaro_15", tilted, 1.0)[0] == pytest.approx(ref, rel=1e-10)
    zero = HardySpec("hardy_cesaro_15", 1, [one], [LIN], weight=0.0, scales=scale)
    assert special_apply("hardy_cesaro_15", zero, [0.5, 1.0])[0] == 0
    assert reduction_check(zero, [0.5, 1.0]) == 0
    for spec in (flat, tilted):
        assert reduction_check(spec, [-1.5, -0.5, 0.25, 1.0, 3.0]) <= 1e-4


def test_hardy_spec_validation():
    one = make_function("constant", dim=2, value=1.0)
    with pytest.raises(ValueError, match="m = n"):
        HardySpec("hardy_14", 2, [one])
    with pytest.raises(ValueError, match="scale"):
        HardySpec("hardy_cesaro_15", 2, [one])


def test_cube_rule_integrates_monomials():
    T, W = cube_rule(2, nodes=8, depth=40)
    assert np.sum(W) == pytest.approx(1.0, abs=3 * 2.0 ** -40)
    assert np.sum(W * T[:, 0] ** 3 * T[:, 1]) == pytest.approx(1 / 8, rel=1e-11)


def test_input_jump_split_matches_closed_form():
    # f = |y| on |y| <= 1: H(x) = x u/6 for u = |x| <= 1, else x (1/(2u) - 1/(3u^2))
    spec = OperatorSpec(T_CHI, [SCALAR], [make_function("truncated_power", a=1.0, R=1.0)],
                        [LIN])
    x = np.array([0.3, 1.7, 3.0, -2.9, 1e3, 3.3e6])
    u = np.abs(x)
    ref = np.where(u <= 1, x * u / 6, x * (1 / (2 * u) - 1 / (3 * u * u)))
    assert np.allclose(apply(spec, x), ref, rtol=1e-13, atol=0)


def test_indicator_jumps_at_both_radii():
    chi = make_function("indicator_annulus", r_in=0.5, r_out=1.5)
    spec = OperatorSpec(CHI, [SCALAR], [chi])
    # int_0^1 chi(t x)/t dt = log(min(1, 1.5/x) / (0.5/x)) for x > 0.5
    x = np.array([0.7, 1.2, 2.6])
    ref = np.log(np.minimum(1.0, 1.5 / x) / (0.5 / x))
    assert np.allclose(apply(spec, x), ref, rtol=1e-12)
