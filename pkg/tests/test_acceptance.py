"""The acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

Tolerances and budgets are the stated ones.  The uniform-boundedness probe on
the weighted Lebesgue desk instance is expected to fail its drift bound; it is
marked as a strict expected failure so a surprise pass is also reported.
"""
import subprocess
import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate as sint
from scipy.special import beta as beta_fn

from hvexp.invariants import (commutator_vanishing, det_bounds, modular_bracket,
                              theta_bracketing)
from hvexp.matrixfam import make_family, make_kernel, theorem_constant
from hvexp.norms import luxemburg_norm
from hvexp.operators import HardySpec, OperatorSpec, apply, reduction_check
from hvexp.quadrature import default_grid, make_function
from hvexp.scenario import load_shipped, shipped_scenario_paths
from hvexp.verify import proof_inequality_check, ratio_scan

sys.path.insert(0, str(Path(__file__).parent / "oracles"))
import desk_bruteforce  # noqa: E402

VERIFY_SCENARIOS = [Path(p).stem for p in shipped_scenario_paths()]
DILATIONS = [2.0 ** j for j in range(-6, 7)]


@lru_cache(maxsize=None)
def shipped(name):
    return load_shipped(name).scenario


def classical_norm(f, p, breaks):
    """``(int_R |f|^p)^(1/p)`` for an even function, by adaptive quadrature."""
    g = lambda x: abs(f(np.array([x]))[0]) ** p  # noqa: E731
    edges = [0.0] + sorted(breaks)
    total = sum(sint.quad(g, a, b, epsabs=0, epsrel=1e-12, limit=200)[0]
                for a, b in zip(edges[:-1], edges[1:]))
    if np.isinf(f.support_radius):
        total += sint.quad(g, edges[-1], np.inf, epsabs=0, epsrel=1e-12, limit=200)[0]
    return (2 * total) ** (1 / p)


def test_c01_classical_norm_agreement(criterion):
    cases = [(make_function("gaussian", scale=0.7), [1.0]),
             (make_function("bump", R=2.0), [2.0]),
             (make_function("truncated_power", a=0.5, R=2.0), [2.0]),
             (make_function("indicator_annulus", r_in=0.25, r_out=1.0), [0.25, 1.0]),
             (make_function("truncated_power", a=2.0, R=0.5), [0.5])]
    grid = default_grid(1)
    with criterion(1, "classical-norm agreement", 10) as c:
        worst = 0.0
        for f, breaks in cases:
            for p in (1.0, 2.0, 4.0):
                ref = classical_norm(f, p, breaks)
                got = float(luxemburg_norm(f, p, None, grid))
                rel = abs(got - ref) / ref
                worst = max(worst, rel)
                c.check(rel <= 1e-6, f"{f.label} p={p:g}: rel err {rel:.2e}")
        c.check(True, f"15 cases, max rel err {worst:.1e} <= 1e-6")


def test_c02_modular_bracket(criterion):
    with criterion(2, "modular bracket", 60) as c:
        res = modular_bracket(seed=0, count=100)
        c.check(res.passed, res.detail)


def test_c03_determinant_bounds(criterion):
    with criterion(3, "determinant bounds", 1) as c:
        res = det_bounds(seed=0, count=100)
        c.check(res.passed, res.detail + ", slack 1e-12")


def test_c04_theta_bracketing(criterion):
    with criterion(4, "Theta bracketing", 1) as c:
        res = theta_bracketing()
        c.check(res.passed, res.detail)


def test_c05_commutator_vanishing(criterion):
    with criterion(5, "commutator vanishing", 30) as c:
        for name in VERIFY_SCENARIOS:
            res = commutator_vanishing(shipped(name), 1e-12)
            c.check(res.passed, f"{name}: {res.detail}")
        c.check(True, f"{len(VERIFY_SCENARIOS)} scenarios, |H| <= 1e-12 at 20 points, lhs = 0")


def test_c06_closed_form_operator_values(criterion):
    chi = make_kernel("power_cube", dim=1, sigma=0.0)
    t_chi = make_kernel("power_cube", dim=1, sigma=1.0)
    scalar = make_family("scalar", dim=1)
    x = np.array([0.5, 1.0, 2.0])
    with criterion(6, "closed-form operator values", 10) as c:
        worst = 0.0
        for a in (0.5, 1.0, 2.0):
            got = apply(OperatorSpec(chi, [scalar], [make_function("radial_power", a=a)]), x)
            rel = np.max(np.abs(got - x ** a / a) / (x ** a / a))
            worst = max(worst, rel)
            c.check(rel <= 1e-5, f"Hardy a={a:g}: rel err {rel:.2e}")
        spec = OperatorSpec(t_chi, [scalar], [make_function("truncated_power", a=0.0, R=4.0)],
                            [make_function("linear")])
        err = float(np.max(np.abs(apply(spec, x) - x / 2)))
        c.check(err <= 1e-6, f"linear commutator: |H - x/2| = {err:.2e}")
        c.check(True, f"Hardy rel err {worst:.1e} <= 1e-5, commutator err {err:.1e} <= 1e-6")


def test_c07_reduction_identities(criterion):
    b2 = make_function("radial_power", dim=2, a=1.0)
    one2 = make_function("constant", dim=2, value=1.0)
    one = make_function("truncated_power", a=0.0, R=4.0)
    lin = make_function("linear")
    scale = [{"coef": 1.0, "power": 1.0}]
    cases = {
        "hardy_14": (HardySpec("hardy_14", 2, [one2, one2], [b2, b2]),
                     [[1.0, 1.0], [0.5, -0.25], [-2.0, 0.3], [0.1, 0.1], [1.5, -1.0]]),
        "hardy_cesaro_15 psi=1": (HardySpec("hardy_cesaro_15", 1, [one], [lin], weight=1.0,
                                            scales=scale), [-1.5, -0.5, 0.25, 1.0, 3.0]),
        "hardy_cesaro_15 psi=t": (HardySpec("hardy_cesaro_15", 1, [one], [lin],
                                            weight={"kind": "monomial", "powers": [1.0]},
                                            scales=scale), [-1.5, -0.5, 0.25, 1.0, 3.0]),
    }
    with criterion(7, "reduction identities", 30) as c:
        worst = 0.0
        for name, (spec, pts) in cases.items():
            d = reduction_check(spec, pts)
            worst = max(worst, d)
            c.check(d <= 1e-4, f"{name}: max diff {d:.2e}")
        c.check(True, f"{len(cases)} reductions x 5 points, max diff {worst:.1e} <= 1e-4")


def test_c08_constant_oracle(criterion):
    with criterion(8, "constant oracle", 5) as c:
        sc = shipped("t33_constant_oracle")
        C = float(theorem_constant("C3", sc, sc.t_grid))
        ref = beta_fn(0.5, 2.0)
        c.check(abs(ref - 4 / 3) < 1e-15, "Beta(1/2, 2) = 4/3")
        c.check(abs(C - ref) <= 1e-4, f"C3 = {C:.10f}, |C3 - 4/3| = {abs(C - ref):.1e} <= 1e-4")


def test_c09_exact_homogeneity(criterion):
    with criterion(9, "exact homogeneity", 60) as c:
        worst = 0.0
        for name in VERIFY_SCENARIOS:
            for family in ("amplitude", "symbol"):
                res = ratio_scan(shipped(name), family)
                dev = max(abs(r - res.base_ratio) / res.base_ratio for r in res.ratios)
                worst = max(worst, dev)
                c.check(dev <= 1e-12 and not res.excluded, f"{name} {family}: dev {dev:.2e}")
        c.check(True, f"{len(VERIFY_SCENARIOS)} scenarios, max rel dev {worst:.1e} <= 1e-12")


@lru_cache(maxsize=None)
def desk_scan():
    return ratio_scan(shipped("t33_desk"), "dilation", DILATIONS)


def oracle_errors(scan):
    out = {}
    for s in (DILATIONS[0], DILATIONS[-1]):
        ref = desk_bruteforce.ratio(s)
        out[s] = abs(scan.ratios[scan.values.index(s)] - ref) / ref
    return out


@pytest.mark.xfail(strict=True, reason="the desk ratio scales like 1/s under dilation; "
                                       "see the README section on the acceptance suite")
def test_c10_uniform_boundedness(criterion):
    with criterion(10, "uniform-boundedness probe", 300) as c:
        scan = desk_scan()
        c.check(scan.values == DILATIONS and np.isfinite(scan.sup_ratio),
                f"sup_ratio = {scan.sup_ratio:.6g} over 13 dilations")
        for s, err in oracle_errors(scan).items():
            c.check(err <= 1e-3, f"s = {s:g} vs brute force: rel err {err:.1e}")
        c.check(scan.drift < 0.05, f"drift = {scan.drift:.4f} in log-ratio (bound 0.05)")


def test_c10_desk_scan_matches_bruteforce_oracle():
    # the oracle half of the uniform-boundedness probe, which must hold on its own
    scan = desk_scan()
    assert scan.values == DILATIONS
    assert all(err <= 1e-3 for err in oracle_errors(scan).values())


def test_c11_proof_inequality_witnesses(criterion):
    base = shipped("t33_desk")
    cmo = shipped("t34_morrey_herz_cmo")
    with criterion(11, "proof-inequality witnesses", 120) as c:
        for coef in (1.0, 2.0):
            sc = base.with_changes(families=[make_family("scalar", dim=1, coef=coef)])
            consts = [proof_inequality_check("shell_transport", sc, k).empirical_constant
                      for k in range(-8, 9)]
            ok = all(np.isfinite(v) for v in consts)
            c.check(ok, f"A(t)={coef:g}t: shell_transport max {max(consts):.3g} over k in [-8, 8]")
        ident = cmo.with_changes(families=[make_family("identity", dim=1)])
        const = cmo.with_changes(symbols=[make_function("constant", value=2.0)])
        for label, sc in (("identity family", ident), ("constant symbol", const)):
            vals = [proof_inequality_check("cmo_gap", sc, k).lhs for k in (-4, 0, 4)]
            c.check(all(v == 0 for v in vals), f"cmo_gap with {label} = {max(vals):g}")
        c.check(True, "shell_transport finite for A(t)=t and 2t on k in [-8, 8]; "
                      "cmo_gap = 0 for identity families and constant symbols")


def test_c12_determinism(criterion, tmp_path):
    with criterion(12, "determinism", 900) as c:
        outs = []
        for j in range(2):
            out = tmp_path / f"suite{j}.json"
            proc = subprocess.run([sys.executable, "-m", "hvexp", "suite", "--workers", "1",
                                   "--out", str(out)], capture_output=True, text=True,
                                  check=False)
            c.check(proc.returncode == 0, f"run {j} exit {proc.returncode} {proc.stderr[-200:]}")
            outs.append(out.read_bytes())
        c.check(outs[0] == outs[1], f"two suite reports bit-identical ({len(outs[0])} bytes)")
