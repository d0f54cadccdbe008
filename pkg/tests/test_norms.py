from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sint

from hvexp._common import LipschitzError
from hvexp.exponents import constant_exponent, make_exponent
from hvexp.invariants import random_bracket_case
from hvexp.norms import (SpaceDescriptor, bmo_norm, central_morrey_norm, cmo_norm,
                         embedding_constant, herz_morrey_norm, herz_norm, lemma_ve_check,
                         lipschitz_seminorm, luxemburg_norm, modular_norm_bracket_check)
from hvexp.quadrature import PowerWeight, default_grid, make_function, make_grid, modular

G1 = default_grid(1)
CHI = make_function("indicator_annulus", r_in=0, r_out=1)


def shell(k):
    return make_function("indicator_annulus", r_in=2.0 ** (k - 1), r_out=2.0 ** k)


def test_luxemburg_examples():
    assert luxemburg_norm(CHI, 2, None, G1) == pytest.approx(np.sqrt(2), rel=1e-6)
    assert luxemburg_norm(make_function("zero"), 2, None, G1) == 0
    assert luxemburg_norm(CHI, 2, PowerWeight(1.0), G1) == pytest.approx(np.sqrt(2 / 3), rel=1e-6)


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
@pytest.mark.parametrize("spec", [{"kind": "gaussian", "scale": 0.7},
                                  {"kind": "truncated_power", "a": 0.5, "R": 2.0}])
def test_luxemburg_matches_classical_norm(p, spec):
    f = make_function(spec)
    ref = (2 * sint.quad(lambda x: abs(f(np.array([x]))[0]) ** p, 0, 8, limit=200,
                         points=[2.0])[0]) ** (1 / p)
    assert luxemburg_norm(f, p, None, G1) == pytest.approx(ref, rel=1e-6)


def test_luxemburg_variable_exponent_defining_equation():
    # at the norm the modular equals one
    p = make_exponent("clamp_log", a=1.5, b=2)
    f = make_function("gaussian", scale=3.0, amplitude=4.0)
    nrm = float(luxemburg_norm(f, p, PowerWeight(0.2), G1))
    assert modular(f, p, PowerWeight(0.2), nrm, G1) == pytest.approx(1.0, rel=1e-12)


def test_luxemburg_rejects_real_class():
    with pytest.raises(ValueError):
        luxemburg_norm(CHI, constant_exponent(0.5, kind="real"), None, G1)


def test_truncation_flag_on_slow_decay():
    v = luxemburg_norm(make_function("radial_power", a=-0.5), 2.5, None, G1)
    assert "TRUNCATION_SUSPECT" in v.flags


def test_bracket_rational_bump_indicator():
    res = modular_norm_bracket_check(CHI, make_exponent("rational_bump", a=2, b=1), None, G1)
    assert res.holds_i and res.holds_ii


def test_bracket_constant_exponent_collapses():
    res = modular_norm_bracket_check(make_function("gaussian"), 2.0, None, G1)
    assert res.upper == pytest.approx(res.lower, rel=1e-15)
    assert res.norm == pytest.approx(res.upper, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_bracket_random_catalog(seed):
    f, p, omega = random_bracket_case(np.random.default_rng(seed))
    res = modular_norm_bracket_check(f, p, omega, G1)
    assert res.holds_i and res.holds_ii


def test_herz_single_shell():
    assert herz_norm(shell(0), 0.0, 1, 1, None, G1) == pytest.approx(1.0, rel=1e-6)
    assert herz_norm(shell(0), 1.0, 1, 1, None, G1) == pytest.approx(1.0, rel=1e-6)
    assert herz_norm(shell(1), 1.0, 1, 1, None, G1) == pytest.approx(4.0, rel=1e-5)


def test_herz_reaggregation_identity():
    f = make_function("gaussian", scale=2.0)
    for q0 in (1.0, 2.0, 3.5):
        h = herz_morrey_norm(f, 0.0, 0.0, q0, q0, None, G1)
        assert h == pytest.approx(float(luxemburg_norm(f, q0, None, G1)), rel=1e-6)


def test_morrey_herz_sup_and_rejections():
    f = shell(0)
    v = herz_morrey_norm(f, 0.0, 0.5, 1, 1, None, G1)
    # partial sums vanish for k0 < 0 and equal 1 afterwards, so the sup sits at k0 = 0
    assert v == pytest.approx(1.0, rel=1e-6) and "SUP_AT_BOUNDARY" not in v.flags
    with pytest.raises(ValueError):
        herz_morrey_norm(f, 0.0, -0.1, 1, 1, None, G1)
    with pytest.raises(ValueError):
        herz_morrey_norm(f, 0.0, 0.1, 0, 1, None, G1)
    flagged = herz_morrey_norm(f, 0.0, 0.0, 1, constant_exponent(1.0), None, G1)
    assert "EXPONENT_NOT_Pb" in flagged.flags


def test_central_morrey_examples():
    one = make_function("constant", value=1.0)
    assert central_morrey_norm(one, 2, 0.0, None, None, G1) == pytest.approx(1.0, rel=1e-9)
    assert central_morrey_norm(make_function("zero"), 2, 0.0, None, None, G1) == 0
    v = central_morrey_norm(one, 2, -0.25, None, None, G1)
    assert "SUP_AT_BOUNDARY" in v.flags
    assert v == pytest.approx((2 * 2.0 ** 20) ** 0.25, rel=1e-9)


def test_cmo_examples():
    assert cmo_norm(make_function("constant", value=3.0), 2, None, G1) == 0
    assert cmo_norm(make_function("sign"), 2, None, G1) == pytest.approx(1.0, rel=1e-12)
    v = cmo_norm(make_function("linear"), 2, None, G1)
    assert v == pytest.approx(2.0 ** 20 / np.sqrt(3), rel=1e-9)
    assert "SUP_AT_BOUNDARY" in v.flags


@settings(max_examples=20, deadline=None)
@given(c=st.floats(-50, 50), q=st.sampled_from([1.0, 2.0, 3.0]))
def test_cmo_shift_invariance(c, q):
    b = make_function("log_abs")
    w = PowerWeight(-0.5)
    assert cmo_norm(b.shifted(c), q, w, G1) == pytest.approx(float(cmo_norm(b, q, w, G1)),
                                                            rel=1e-12)


@pytest.mark.parametrize("c", [1 / 3, 2.0, 10.0])
def test_norm_homogeneity(c):
    f = make_function("bump", R=3.0)
    p = make_exponent("rational_bump", a=1.5, b=1)
    a = make_exponent("rational_bump", a=-0.5, b=1, **{"class": "real"})
    w = PowerWeight(0.25)
    pairs = [
        (luxemburg_norm(f.scaled(c), p, w, G1), luxemburg_norm(f, p, w, G1)),
        (herz_morrey_norm(f.scaled(c), a, 0.3, 1.5, p, w, G1),
         herz_morrey_norm(f, a, 0.3, 1.5, p, w, G1)),
        (central_morrey_norm(f.scaled(c), p, 0.1, w, w, G1),
         central_morrey_norm(f, p, 0.1, w, w, G1)),
    ]
    for scaled, base in pairs:
        assert float(scaled) == pytest.approx(c * float(base), rel=1e-9)


def test_lipschitz_examples():
    est = lipschitz_seminorm(make_function("linear"), 1.0)
    assert est.declared == 1 and est.empirical_lower_bound <= 1 and est.reconciled == 1
    assert lipschitz_seminorm(make_function("constant", value=5.0), 1.0).reconciled == 0
    est = lipschitz_seminorm(make_function("radial_power", a=0.5), 0.5)
    assert 0.999 <= est.empirical_lower_bound <= 1 + 1e-12


def test_lipschitz_inconsistent_declaration():
    b = make_function("linear", coef=3.0)
    with pytest.raises(LipschitzError):
        lipschitz_seminorm(replace(b, declared_lip=(1.0, 1.0)), 1.0)
    assert "UNDECLARED" in lipschitz_seminorm(make_function("sign"), 1.0).flags


def test_bmo_examples():
    assert bmo_norm(make_function("sign"), [((0.0,), 2.0), ((0.0,), 0.5)]) == pytest.approx(1.0)
    assert bmo_norm(make_function("linear"), [((0.5,), 1.0)]) == pytest.approx(0.25, rel=1e-12)
    assert bmo_norm(make_function("constant", value=2.0), [((3.0,), 1.0)]) == 0


def test_embedding_examples():
    rep = embedding_constant(CHI, 2, 2, None, G1)
    assert rep.variant == "full" and rep.one_norm == 1 and rep.empirical_K == pytest.approx(1)
    rep = embedding_constant(CHI, 4, 2, None, G1)
    assert rep.variant == "support_restricted"
    assert rep.one_norm == pytest.approx(2 ** 0.25, rel=1e-9)
    assert rep.empirical_K == pytest.approx(1.0, rel=1e-9)
    rep = embedding_constant(make_function("zero"), 4, 2, None, G1)
    assert np.isnan(rep.empirical_K) and "ZERO_INPUT" in rep.flags


def test_lemma_examples():
    res = lemma_ve_check(shell(0), 0.0, 0.0, 1, 1, None, 0, G1)
    assert res.ratio == pytest.approx(1.0, rel=1e-9)
    res = lemma_ve_check(shell(1), 0.0, 0.0, 1, 1, None, 0, G1)
    assert res.lhs == 0 and res.ratio == 0
    res = lemma_ve_check(shell(-1) + shell(0), 1.0, 0.0, 1, 1, None, -1, G1)
    assert res.ratio == pytest.approx(0.5 / 2.5, rel=1e-6)
    assert res.ratio <= 2


def test_space_descriptor_dispatch():
    with pytest.raises(ValueError):
        SpaceDescriptor("morrey_herz", {"lam": -1.0})
    with pytest.raises(ValueError):
        SpaceDescriptor("sobolev")
    d = SpaceDescriptor("lebesgue_vexp", {"q": 2.0})
    assert d.norm(CHI, G1) == pytest.approx(np.sqrt(2), rel=1e-6)


def test_dim2_indicator_norm():
    g = make_grid(2, -20, 3, 32, 32)
    disk = make_function("indicator_annulus", dim=2, r_in=0, r_out=1)
    assert luxemburg_norm(disk, 2, None, g) == pytest.approx(np.sqrt(np.pi), rel=1e-6)
