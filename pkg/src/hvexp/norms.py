"""Function-space norms on the polar-dyadic grid.

Every norm reduces to Luxemburg norms of node-value arrays, so each function
is evaluated once per call and the shell structure of the grid is reused for
Herz, Morrey-Herz and central Morrey suprema.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._common import (FlaggedValue, LipschitzError, NormInfiniteError, ZeroInputError,
                      as_points)
from .exponents import (EXPONENT, REAL, ExponentFunction, _map_decreasing, _safe_reciprocal,
                        affine_combination, constant_exponent)
from .quadrature import (TAIL_RTOL, UNIT_WEIGHT, PowerWeight, _values, modular,
                         modular_from_values)

BRACKET_STEPS = 100          # powers of 4 -> 2**(+-200)
MAX_BISECTIONS = 200
DEFAULT_K0 = (-20, 20)
DEFAULT_R_EXPONENTS = (-20, 20)

SUP_AT_BOUNDARY = "SUP_AT_BOUNDARY"
TRUNCATION_SUSPECT = "TRUNCATION_SUSPECT"


def luxemburg_from_values(g, pv, w):
    """Luxemburg norm of node values ``g >= 0`` with exponent values ``pv``.

    The values are normalized by their maximum before the root search, which
    makes the result homogeneous to rounding.  The bracket grows by powers of
    4 from ``eta = 1``; bisection (geometric) runs to full double precision.
    """
    g = np.abs(np.asarray(g, dtype=float))
    if g.size == 0:
        return 0.0
    scale = float(np.max(g))
    if scale == 0.0:
        return 0.0
    h = g / scale
    F = lambda eta: modular_from_values(h, pv, w, eta)  # noqa: E731
    if F(1.0) > 1.0:
        lo, hi = 1.0, 4.0
        for _ in range(BRACKET_STEPS):
            if F(hi) <= 1.0:
                break
            lo, hi = hi, hi * 4.0
        else:
            raise NormInfiniteError("modular exceeds 1 for every eta up to 2**200")
    else:
        lo, hi = 0.25, 1.0
        for _ in range(BRACKET_STEPS):
            if F(lo) > 1.0:
                break
            lo, hi = lo * 0.25, lo
        else:
            return 0.0
    for _ in range(MAX_BISECTIONS):
        mid = np.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        if F(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi * scale


def _tail_flags(contrib, rtol=TAIL_RTOL):
    """TRUNCATION_SUSPECT if the first or last entry is not negligible."""
    contrib = np.abs(np.asarray(contrib, dtype=float))
    total = contrib.sum()
    if total == 0 or len(contrib) < 2:
        return ()
    if contrib[0] >= rtol * total or contrib[-1] >= rtol * total:
        return (TRUNCATION_SUSPECT,)
    return ()


def _sup_over_grid(vals, rtol=1e-9):
    """Maximum of ``vals`` and whether only an endpoint attains it.

    The supremum counts as attained in the interior when an interior value is
    within ``rtol`` of it, so flat profiles are not flagged.
    """
    vals = np.asarray(vals, dtype=float)
    top = float(np.max(vals))
    if top <= 0 or len(vals) < 3:
        return top, ()
    if np.max(vals[1:-1]) >= top * (1 - rtol):
        return top, ()
    return top, (SUP_AT_BOUNDARY,)


def _require_exponent(p, dim):
    if not isinstance(p, ExponentFunction):
        return constant_exponent(float(p), dim=dim)
    if p.kind != EXPONENT:
        raise ValueError(f"{p!r} is real-class; an exponent is required here")
    if p.p_minus < 1:
        raise ValueError("Lebesgue exponents must be >= 1")
    return p


def _weighted_values(f, omega, grid):
    omega = omega or UNIT_WEIGHT
    return np.abs(_values(f, grid)) * omega(grid.points)


def luxemburg_norm(f, p, omega=None, grid=None):
    """``||f omega||`` in the variable Lebesgue space, by bracketed bisection.

    Flags TRUNCATION_SUSPECT when the innermost or outermost shell carries a
    non-negligible share of the modular at the computed norm.
    """
    p = _require_exponent(p, grid.dim)
    g = _weighted_values(f, omega, grid)
    pv = p(grid.points)
    value = luxemburg_from_values(g, pv, grid.weights)
    flags = ()
    if value > 0:
        with np.errstate(over="ignore", invalid="ignore"):
            u = np.where(g == 0, 0.0, (g / value) ** np.where(np.isfinite(pv), pv, 1.0))
        flags = _tail_flags(grid.shell_sums(u))
    return FlaggedValue(value, flags)


@dataclass(frozen=True)
class BracketCheck:
    modular: float
    norm: float
    upper: float
    lower: float
    holds_i: bool
    holds_ii: bool


def modular_norm_bracket_check(f, p, omega=None, grid=None, rtol=1e-9):
    """Check both bracket inequalities between modular and norm.

    With ``C = F_p(f omega)``: ``||f|| <= max(C**(1/p-), C**(1/p+))`` and
    ``||f|| >= min(C**(1/p-), C**(1/p+))``, each up to relative ``rtol``.
    """
    p = _require_exponent(p, grid.dim)
    C = modular(f, p, omega, 1.0, grid)
    if not 0 < C < np.inf:
        raise ValueError(f"bracket check needs 0 < modular < inf, got {C}")
    nrm = float(luxemburg_norm(f, p, omega, grid))
    cands = [C ** (1.0 / p.p_minus), C ** (1.0 / p.p_plus)]
    upper, lower = max(cands), min(cands)
    return BracketCheck(C, nrm, upper, lower,
                        holds_i=nrm <= upper * (1 + rtol),
                        holds_ii=nrm >= lower * (1 - rtol))


# ---------------------------------------------------------------- Herz family

def shell_norms(f, alpha, q, omega, grid):
    """``||2**(k alpha(.)) f chi_k||`` in ``L^q_omega`` for every shell of the grid."""
    q = _require_exponent(q, grid.dim)
    g = _weighted_values(f, omega, grid)
    pv = q(grid.points)
    av = alpha(grid.points) if isinstance(alpha, ExponentFunction) else np.full(grid.size, float(alpha))
    out = np.zeros(grid.k_max - grid.k_min + 1)
    for k, sl in grid.shell_slices().items():
        out[k - grid.k_min] = luxemburg_from_values(g[sl] * np.exp2(k * av[sl]), pv[sl],
                                                    grid.weights[sl])
    return out


def herz_morrey_norm(f, alpha, lam, p, q, omega=None, grid=None, k0_range=None):
    """Morrey-Herz norm; with ``lam = 0`` the full-sum Herz norm.

    ``sup_{k0} 2**(-k0 lam) (sum_{k <= k0} ||2**(k alpha) f chi_k||**p)**(1/p)``
    with ``k0`` over ``k0_range`` (default ``[-20, 20]`` clipped to the grid).
    """
    if p <= 0:
        raise ValueError(f"outer exponent p must be positive, got {p}")
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    flags = []
    if isinstance(q, ExponentFunction) and not (q.p_minus > 1 and np.isfinite(q.p_plus)):
        flags.append("EXPONENT_NOT_Pb")
    nk = shell_norms(f, alpha, q, omega, grid)
    terms = nk ** p
    flags += _tail_flags(terms)
    if lam == 0:
        return FlaggedValue(np.sum(terms) ** (1.0 / p), flags)
    lo, hi = k0_range or (max(DEFAULT_K0[0], grid.k_min), min(DEFAULT_K0[1], grid.k_max))
    if lo < grid.k_min or hi > grid.k_max or lo > hi:
        raise ValueError(f"k0_range [{lo}, {hi}] not covered by grid shells "
                         f"[{grid.k_min}, {grid.k_max}]")
    partial = np.cumsum(terms)
    k0s = np.arange(lo, hi + 1)
    vals = np.exp2(-k0s * lam) * partial[k0s - grid.k_min] ** (1.0 / p)
    top, extra = _sup_over_grid(vals)
    return FlaggedValue(top, flags + list(extra))


def herz_norm(f, alpha, p, q, omega=None, grid=None):
    return herz_morrey_norm(f, alpha, 0.0, p, q, omega, grid)


@dataclass(frozen=True)
class LemmaCheck:
    lhs: float
    rhs_without_constant: float
    ratio: float


def lemma_ve_check(f, alpha, lam, p, q, omega, j, grid):
    """Single-shell bound by the Morrey-Herz norm.

    ``||f chi_j|| <= C 2**(j (lam - alpha(0))) ||f||_MK`` for ``j < 0``, with
    ``alpha_inf`` in place of ``alpha(0)`` for ``j >= 0``.
    """
    mk = float(herz_morrey_norm(f, alpha, lam, p, q, omega, grid))
    if mk == 0:
        raise ZeroInputError("Morrey-Herz norm is zero")
    nk = shell_norms(f, constant_exponent(0.0, f.dim, kind="real"), q, omega, grid)
    lhs = float(nk[j - grid.k_min]) if grid.k_min <= j <= grid.k_max else 0.0
    if isinstance(alpha, ExponentFunction):
        a = alpha.p_zero if j < 0 else alpha.p_infty
    else:
        a = float(alpha)
    rhs = 2.0 ** (j * (lam - a)) * mk
    return LemmaCheck(lhs, rhs, lhs / rhs)


# ---------------------------------------------------------------- central spaces

def _radius_grid(R_grid):
    if R_grid is None:
        return np.exp2(np.arange(DEFAULT_R_EXPONENTS[0], DEFAULT_R_EXPONENTS[1] + 1.0))
    return np.asarray(R_grid, dtype=float)


def central_morrey_norm(f, p, lam, omega1=None, omega2=None, grid=None, R_grid=None):
    """Two-weight central Morrey norm.

    ``sup_R omega1(B(0,R))**(-(lam + 1/p_inf)) ||f chi_B(0,R)||_{L^p_omega2}``
    over ``R_grid`` (default ``2**j``, ``j`` in ``[-20, 20]``).
    """
    p = _require_exponent(p, grid.dim)
    if p.p_infty is None:
        raise ValueError("central Morrey norm needs an exponent with a limit at infinity")
    omega1 = omega1 or UNIT_WEIGHT
    if omega1.power <= -grid.dim:
        raise ValueError(f"ball weight diverges for gamma={omega1.power}")
    g = _weighted_values(f, omega2, grid)
    pv = p(grid.points)
    radii = _radius_grid(R_grid)
    expo = lam + (0.0 if np.isinf(p.p_infty) else 1.0 / p.p_infty)
    vals = np.empty(len(radii))
    for i, R in enumerate(radii):
        m = grid.radii <= R
        n_R = luxemburg_from_values(g[m], pv[m], grid.weights[m])
        vals[i] = omega1.ball_mass(R, grid.dim) ** (-expo) * n_R
    return FlaggedValue(*_sup_over_grid(vals))


def cmo_norm(b, q, omega=None, grid=None, R_grid=None):
    """Central mean oscillation: sup over balls ``B(0,R)`` of the centred
    ``q``-oscillation of ``b`` against the weight ``omega``."""
    if q < 1:
        raise ValueError("CMO exponent must be >= 1")
    omega = omega or UNIT_WEIGHT
    bv = _values(b, grid)
    bv = bv - bv[0]                  # shift-free; constants give exact zeros
    wv = grid.weights * omega(grid.points)
    radii = _radius_grid(R_grid)
    vals = np.zeros(len(radii))
    for i, R in enumerate(radii):
        m = grid.radii <= R
        if not m.any():
            continue
        mass = np.sum(wv[m])
        if not mass > 0:
            raise ValueError(f"omega-mass of B(0,{R}) is {mass}")
        avg = np.sum(wv[m] * bv[m]) / mass
        vals[i] = (np.sum(wv[m] * np.abs(bv[m] - avg) ** q) / mass) ** (1.0 / q)
    return FlaggedValue(*_sup_over_grid(vals))


# ---------------------------------------------------------------- Lipschitz, BMO

@dataclass(frozen=True)
class LipschitzEstimate:
    empirical_lower_bound: float
    declared: Optional[float]
    reconciled: float
    flags: tuple = ()


def sample_pairs(dim, n_pairs=4000, seed=0, j_range=(-12, 12)):
    """Point pairs at many scales, including pairs with the origin and with ``-x``."""
    rng = np.random.default_rng(seed)
    r = np.exp2(rng.uniform(*j_range, n_pairs))
    u = rng.normal(size=(n_pairs, dim))
    x = r[:, None] * u / np.linalg.norm(u, axis=1, keepdims=True)
    v = rng.normal(size=(n_pairs, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    delta = r * np.exp2(rng.uniform(-30, 1, n_pairs))
    y = x + delta[:, None] * v
    k = n_pairs // 4
    xs = np.vstack([x, x[:k], x[:k]])
    ys = np.vstack([y, np.zeros((k, dim)), -x[:k]])
    return xs, ys


def lipschitz_seminorm(b, beta, pair_samples=None, tol=1e-9, seed=0):
    """Sampled lower bound of the ``Lip^beta`` seminorm, reconciled with the declared one.

    ``pair_samples`` is ``(X, Y)`` or ``None`` for :func:`sample_pairs`.
    """
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    X, Y = pair_samples if pair_samples is not None else sample_pairs(b.dim, seed=seed)
    X, Y = as_points(X, b.dim), as_points(Y, b.dim)
    if len(X) == 0:
        raise ValueError("no pairs to sample")
    d = np.linalg.norm(X - Y, axis=1)
    keep = d > 0
    bx, by = b(X[keep]), b(Y[keep])
    # subtract the rounding error of the difference so the bound stays a lower bound
    num = np.abs(bx - by) - 4 * np.finfo(float).eps * (np.abs(bx) + np.abs(by))
    emp = float(np.max(np.maximum(num, 0.0) / d[keep] ** beta)) if keep.any() else 0.0
    declared = None
    if b.declared_lip is not None and b.declared_lip[0] in (None, beta):
        declared = float(b.declared_lip[1])
    if declared is None:
        return LipschitzEstimate(emp, None, emp, ("UNDECLARED",))
    if declared < emp - tol * max(1.0, emp):
        raise LipschitzError(f"declared Lip^{beta} constant {declared} is below the sampled "
                             f"lower bound {emp}")
    return LipschitzEstimate(emp, declared, declared)


def _cube_rule(center, side, nodes, panels):
    xi, wi = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(-0.5, 0.5, panels + 1)
    h = np.diff(edges)
    t = (edges[:-1, None] + (xi[None, :] + 1.0) * 0.5 * h[:, None]).ravel()
    wt = (wi[None, :] * 0.5 * h[:, None]).ravel()
    dim = len(center)
    mesh = np.meshgrid(*([t] * dim), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1) * side + center
    wmesh = np.meshgrid(*([wt] * dim), indexing="ij")
    w = np.prod(np.stack([m.ravel() for m in wmesh], axis=1), axis=1)
    return pts, w


def bmo_norm(b, cube_samples, nodes=8, panels=8):
    """Max mean oscillation over the given axis-parallel cubes ``(center, side)``.

    A lower bound on the BMO norm.  Cubes use composite Gauss-Legendre with an
    even number of panels, so kinks at the cube center are integrated exactly.
    """
    cubes = list(cube_samples)
    if not cubes:
        raise ValueError("no cubes given")
    best = 0.0
    for center, side in cubes:
        center = np.atleast_1d(np.asarray(center, dtype=float))
        pts, w = _cube_rule(center, float(side), nodes, panels)
        v = b(pts)
        v = v - v[0]
        avg = np.sum(w * v)
        best = max(best, float(np.sum(w * np.abs(v - avg))))
    return best


# ---------------------------------------------------------------- embedding

@dataclass(frozen=True)
class EmbeddingReport:
    r_exponent: ExponentFunction
    one_norm: float
    empirical_K: float
    variant: str
    flags: tuple = ()


def embedding_constant(f, p, q, omega=None, grid=None):
    """Empirical constant ``||f||_q / (||1||_r ||f||_p)`` with ``1/r = 1/q - 1/p``.

    When ``r`` is identically infinite the full-space value ``||1||_r = 1`` is
    used; otherwise the norm of the indicator of ``supp f`` on the grid stands
    in for ``||1||_r`` (variant ``support_restricted``).
    """
    p, q = _require_exponent(p, grid.dim), _require_exponent(q, grid.dim)
    pts = grid.points
    pv, qv = p(pts), q(pts)
    bad = np.nonzero(qv > pv + 1e-12)[0]
    if bad.size:
        raise ValueError(f"q > p at x={pts[bad[0]].tolist()}")
    inv_r = affine_combination([(1.0, q.reciprocal()), (-1.0, p.reciprocal())], kind=REAL)
    r = _map_decreasing(inv_r, _safe_reciprocal, EXPONENT, "r")
    fv = _values(f, grid)
    if not np.any(fv != 0):
        return EmbeddingReport(r, np.nan, np.nan, "none", ("ZERO_INPUT",))
    if r.p_minus == np.inf:
        one, variant = 1.0, "full"
    else:
        ind = (fv != 0).astype(float)
        one = luxemburg_from_values(ind, r(pts), grid.weights)
        variant = "support_restricted"
    nq = float(luxemburg_norm(f, q, omega, grid))
    np_ = float(luxemburg_norm(f, p, omega, grid))
    return EmbeddingReport(r, one, nq / (one * np_), variant)


# ---------------------------------------------------------------- descriptors

SPACE_KINDS = ("lebesgue_vexp", "herz", "morrey_herz", "central_morrey", "cmo",
               "lipschitz", "bmo")


@dataclass(frozen=True, eq=False)
class SpaceDescriptor:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SPACE_KINDS:
            raise ValueError(f"unknown space kind {self.kind!r}")
        P = self.params
        if self.kind == "morrey_herz":
            if P.get("lam", 0) < 0 or P.get("p", 1) <= 0:
                raise ValueError("morrey_herz needs lam >= 0 and p > 0")

    def norm(self, f, grid):
        P = self.params
        k = self.kind
        if k == "lebesgue_vexp":
            return luxemburg_norm(f, P["q"], P.get("omega"), grid)
        if k == "herz":
            return herz_morrey_norm(f, P["alpha"], 0.0, P["p"], P["q"], P.get("omega"), grid)
        if k == "morrey_herz":
            return herz_morrey_norm(f, P["alpha"], P["lam"], P["p"], P["q"], P.get("omega"),
                                    grid, P.get("k0_range"))
        if k == "central_morrey":
            return central_morrey_norm(f, P["q"], P["lam"], P.get("omega1"), P.get("omega2"),
                                       grid, P.get("R_grid"))
        if k == "cmo":
            return cmo_norm(f, P["q"], P.get("omega"), grid, P.get("R_grid"))
        if k == "lipschitz":
            est = lipschitz_seminorm(f, P["beta"], seed=P.get("seed", 0))
            return FlaggedValue(est.reconciled, est.flags)
        return FlaggedValue(bmo_norm(f, P["cubes"]), ("LOWER_BOUND",))


__all__ = [
    "PowerWeight", "luxemburg_norm", "luxemburg_from_values", "modular_norm_bracket_check",
    "shell_norms", "herz_morrey_norm", "herz_norm", "lemma_ve_check", "central_morrey_norm",
    "cmo_norm", "lipschitz_seminorm", "sample_pairs", "bmo_norm", "embedding_constant",
    "SpaceDescriptor",
]
