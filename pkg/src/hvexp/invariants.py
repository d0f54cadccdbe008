"""Exact invariants: the checks that gate the CLI exit status.

Everything here is either an identity that holds in floating point to the
exact tolerance (vanishing commutators, homogeneity, shift invariance) or a
seeded sweep of an elementary inequality.  Approximate quantities such as
ratios and constants are reported elsewhere and never gate anything.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from ._common import sample_points
from .exponents import make_exponent, theta_exponent
from .matrixfam import det_bounds_check, make_family, theta_from_rho
from .norms import cmo_norm, modular_norm_bracket_check
from .operators import apply
from .quadrature import PowerWeight, default_grid, make_function
from .verify import _const, ratio_scan, verify_theorem

EXACT_TOL = 1e-12
HOMOGENEITY_VALUES = (1.0 / 3.0, 2.0, 10.0, -1.5)


@dataclass
class InvariantResult:
    name: str
    passed: bool
    detail: str = ""
    data: dict = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)


def _rel(a, b):
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


def _points(sc, count=20):
    pts = sample_points(sc.dim, -6, 6, per_octave=2)
    idx = np.linspace(0, len(pts) - 1, count).round().astype(int)
    return pts[idx]


def commutator_vanishing(sc, tol=EXACT_TOL):
    """Each symbol replaced by a constant gives a zero operator and lhs = 0."""
    X = _points(sc)
    worst, lhs = 0.0, []
    for i in range(sc.arity):
        symbols = list(sc.symbols)
        symbols[i] = make_function("constant", dim=sc.dim, value=1.5)
        v = apply(sc.operator_spec(symbols=symbols), X)
        worst = max(worst, float(np.max(np.abs(v))))
        rep = verify_theorem(sc.with_changes(symbols=symbols))
        lhs.append(rep.lhs)
    ok = worst <= tol and all(v == 0 for v in lhs)
    return InvariantResult("commutator_vanishing", ok, f"max|H|={worst:.3e}, lhs={lhs}",
                           {"max_abs": worst, "lhs": lhs})


def identity_family_vanishing(sc, tol=EXACT_TOL):
    """With ``A_i(t) = I`` every commutator factor is ``b(x) - b(x) = 0``."""
    fams = [make_family("identity", dim=sc.dim) for _ in range(sc.arity)]
    spec = sc.operator_spec().replace(families=fams)
    worst = float(np.max(np.abs(apply(spec, _points(sc)))))
    return InvariantResult("identity_family_vanishing", worst <= tol, f"max|H|={worst:.3e}",
                           {"max_abs": worst})


def homogeneity(sc, family, tol=EXACT_TOL, workers=1):
    """Amplitude or symbol scaling leaves the ratio unchanged."""
    res = ratio_scan(sc, family, HOMOGENEITY_VALUES, workers=workers)
    devs = [_rel(r, res.base_ratio) for r in res.ratios]
    worst = max(devs) if devs else float("inf")
    ok = not res.excluded and worst <= tol
    return InvariantResult(f"{family}_homogeneity", ok,
                           f"max rel dev={worst:.3e} over {len(devs)} members",
                           {"base_ratio": res.base_ratio, "ratios": res.ratios,
                            "max_rel_dev": worst})


def cmo_shift_invariance(sc, shift=2.5, tol=EXACT_TOL):
    """``||b + c||_CMO = ||b||_CMO`` for each symbol."""
    worst = 0.0
    for i, b in enumerate(sc.symbols):
        r = _const(sc.r[i]) if np.isfinite(_const(sc.r[i])) else 2.0
        w = PowerWeight(sc.gamma[i])
        base = float(cmo_norm(b, r, w, sc.x_grid, sc.R_grid))
        shifted = b + make_function("constant", dim=sc.dim, value=shift)
        worst = max(worst, _rel(base, float(cmo_norm(shifted, r, w, sc.x_grid, sc.R_grid))))
    return InvariantResult("cmo_shift_invariance", worst <= tol, f"max rel dev={worst:.3e}",
                           {"max_rel_dev": worst})


def theta_constant_case(sc):
    """Constant ``q_i`` with ``zeta = 1`` makes ``theta`` identically infinite."""
    if sc.zeta != 1 or not all(q.is_constant for q in sc.q):
        return InvariantResult("theta_infinite", True, "not applicable")
    pts = sc.x_grid.points[:: max(1, len(sc.x_grid.points) // 256)]
    ok = True
    for fam, q in zip(sc.families, sc.q):
        for t in (0.125, 0.375, 0.75):
            A = fam(np.full((1, sc.dim), t))[0]
            ok &= bool(np.all(np.isinf(theta_exponent(q, A)(pts))))
    return InvariantResult("theta_infinite", ok, "theta = inf at all probes" if ok else "finite")


def scenario_invariants(sc, workers=1):
    tol = sc.tolerances.get("exact", EXACT_TOL)
    return [commutator_vanishing(sc, tol), identity_family_vanishing(sc, tol),
            homogeneity(sc, "amplitude", tol, workers), homogeneity(sc, "symbol", tol, workers),
            cmo_shift_invariance(sc, tol=tol), theta_constant_case(sc)]


# ---------------------------------------------------------------- seeded sweeps

def theta_bracketing():
    """``2**Theta rho < 1 <= 2**(Theta+1) rho`` on powers of two and irrationals."""
    rhos = [1.0, 2.0] + [2.0 ** k for k in range(-20, 21)]
    rhos += [np.sqrt(2), np.pi, np.e, 1 / np.sqrt(3), 1e-7 * np.pi, 3e5 * np.sqrt(5)]
    bad = []
    for rho in rhos:
        th = theta_from_rho(rho)
        if not (2.0 ** th * rho < 1 <= 2.0 ** (th + 1) * rho):
            bad.append(rho)
    return InvariantResult("theta_bracketing", not bad, f"{len(rhos)} values, {len(bad)} failures",
                           {"failures": bad})


def random_matrices(rng, count=100, cond_max=50.0):
    out = []
    while len(out) < count:
        n = int(rng.choice([2, 3]))
        A = rng.normal(size=(n, n))
        if np.linalg.cond(A) <= cond_max:
            out.append(A)
    return out


def det_bounds(seed=0, count=100):
    rng = np.random.default_rng(seed)
    fails = sum(not det_bounds_check(A).holds for A in random_matrices(rng, count))
    return InvariantResult("det_bounds", fails == 0, f"{count} matrices, {fails} failures")


def random_bracket_case(rng, dim=1):
    """A random catalog triple ``(f, p, omega)`` with a finite positive modular."""
    kind = rng.choice(["gaussian", "bump", "truncated_power", "indicator_annulus"])
    if kind == "gaussian":
        f = make_function("gaussian", dim=dim, scale=float(rng.uniform(0.2, 5)),
                          amplitude=float(rng.uniform(0.1, 20)))
    elif kind == "bump":
        f = make_function("bump", dim=dim, R=float(rng.uniform(0.2, 5)))
    elif kind == "truncated_power":
        f = make_function("truncated_power", dim=dim, a=float(rng.uniform(0, 2)),
                          R=float(rng.uniform(0.5, 4))).scaled(float(rng.uniform(0.1, 20)))
    else:
        r_in = float(rng.uniform(0, 2))
        f = make_function("indicator_annulus", dim=dim, r_in=r_in,
                          r_out=r_in + float(rng.uniform(0.1, 3))).scaled(float(rng.uniform(0.1, 20)))
    p = make_exponent(str(rng.choice(["rational_bump", "clamp_log"])), dim=dim,
                      a=float(rng.uniform(1.1, 3)), b=float(rng.uniform(-0.09, 2)))
    omega = PowerWeight(float(rng.uniform(-0.2, 0.5)))
    return f, p, omega


def modular_bracket(seed=0, count=100, dim=1):
    rng = np.random.default_rng(seed)
    grid = default_grid(dim)
    fails = []
    for j in range(count):
        f, p, omega = random_bracket_case(rng, dim)
        res = modular_norm_bracket_check(f, p, omega, grid)
        if not (res.holds_i and res.holds_ii):
            fails.append(j)
    return InvariantResult("modular_bracket", not fails, f"{count} cases, {len(fails)} failures",
                           {"failures": fails})


def global_invariants(seed=0):
    return [theta_bracketing(), det_bounds(seed), modular_bracket(seed)]


__all__ = ["InvariantResult", "scenario_invariants", "global_invariants", "theta_bracketing",
           "det_bounds", "modular_bracket", "random_bracket_case", "random_matrices"]
