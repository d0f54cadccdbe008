"""Hypothesis checks, left/right-hand sides of the boundedness results, ratio
scans and the proof-level inequality witnesses.

The results only assert ``lhs <~ C * rhs`` with an unspecified constant, so
nothing here compares ``lhs`` against ``C * rhs``; the reports expose the
ratio and the scans measure how uniform it is across a family of inputs.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from typing import Optional

import numpy as np

from ._common import (HypothesisError, InequalityDegenerateError,
                      NormInfiniteError, as_points, flags_of, sample_points)
from .exponents import (ExponentFunction, classify_exponent, compose_central_exponents,
                        compose_theorem_exponents, theta_exponent)
from .matrixfam import (ConstantProblem, FactorParams, factor_arrays, theorem_constant,
                        _snap_pow2)
from .norms import SpaceDescriptor, luxemburg_from_values, cmo_norm
from .operators import OperatorSpec, apply, operator_function
from .quadrature import PowerWeight

THEOREMS = ("T3.1", "T3.2", "T3.3", "T3.4", "T3.5", "T3.6", "T3.7")
CONSTANT_OF = dict(zip(THEOREMS, ("C1", "C2", "C3", "C4", "C5", "C6", "C7")))
LIP_THEOREMS = ("T3.1", "T3.2", "T3.3", "T3.6")
CENTRAL_THEOREMS = ("T3.6", "T3.7")
HYPOTHESIS_FAIL = "HYPOTHESIS_FAIL"
DOMAIN_TRUNCATED = "DOMAIN_TRUNCATED"


# ---------------------------------------------------------------- scenario

@dataclass(frozen=True, eq=False)
class Scenario:
    """One instance of a boundedness result, fully materialized.

    Per-family lists (length ``m``): ``q`` (exponents), ``r`` (numbers,
    exponents or ``inf``), ``alpha`` (real-class functions or numbers; for the
    central Morrey results the power of ``v_i``), ``lam``, ``p``, ``gamma``
    (power of ``omega_i``) and ``beta`` (Lipschitz orders).
    """

    name: str
    theorem_id: str
    kernel: object
    families: list
    inputs: list
    symbols: list
    q: list
    r: list
    alpha: list
    lam: list
    p: list
    gamma: list
    beta: list
    symbol_kind: str = "lip"
    zeta: float = 1.0
    p_target: Optional[float] = None
    gamma_target: Optional[float] = None
    lam_target: Optional[float] = None
    x_grid: object = None
    t_grid: object = None
    R_grid: Optional[np.ndarray] = None
    k0_range: Optional[tuple] = None
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    workers: int = 1
    descriptor: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.kernel.dim

    @property
    def arity(self):
        return len(self.families)

    @property
    def constant_id(self):
        return CONSTANT_OF[self.theorem_id]

    def with_changes(self, **kw):
        return replace(self, **kw)

    # -- composites
    @cached_property
    def composites(self):
        if self.theorem_id in CENTRAL_THEOREMS:
            a = [_const(v) for v in self.alpha]
            alpha, q = compose_central_exponents(self.dim, a, [_const(r) for r in self.r], self.q)
            return {"alpha": alpha, "q": q}
        betas = self.beta if self.symbol_kind == "lip" else [0.0] * self.arity
        te = compose_theorem_exponents(self.dim, betas, self.lam, self.gamma, self.r,
                                       self.q, self.alpha)
        return {"beta": te.beta, "lam": te.lam, "gamma": te.gamma, "q": te.q,
                "alpha_star": te.alpha_star, "alpha_2star": te.alpha_2star}

    @cached_property
    def target_lambda(self):
        """The target ``lambda``; solved from the balance condition when not given."""
        if self.theorem_id not in CENTRAL_THEOREMS:
            return float(sum(self.lam))
        if self.lam_target is not None:
            return float(self.lam_target)
        return _central_balance(self)[1]

    def operator_spec(self, inputs=None, symbols=None):
        return OperatorSpec(self.kernel, list(self.families), list(inputs or self.inputs),
                            list(symbols if symbols is not None else self.symbols), self.t_grid)

    def factor_params(self):
        out = []
        for i in range(self.arity):
            beta = self.beta[i] if self.symbol_kind == "lip" else 0.0
            out.append(FactorParams(q=self.q[i], gamma=self.gamma[i], lam=self.lam[i],
                                    alpha=self.alpha[i], beta=beta, r=_const_or_none(self.r[i]),
                                    zeta=self.zeta))
        return out

    def constant_problem(self):
        central = [_const(a) for a in self.alpha] if self.theorem_id in CENTRAL_THEOREMS else None
        return ConstantProblem(self.kernel, list(self.families), self.factor_params(),
                               self.p_target, self.x_grid, central)

    # -- spaces
    def source_spaces(self):
        out = []
        for i in range(self.arity):
            w = PowerWeight(self.gamma[i])
            tid = self.theorem_id
            zq = self.q[i] if self.zeta == 1 else self.q[i].scaled(self.zeta)
            if tid in ("T3.1", "T3.4"):
                out.append(SpaceDescriptor("morrey_herz", dict(
                    alpha=self.alpha[i], lam=self.lam[i], p=self.p[i], q=zq, omega=w,
                    k0_range=self.k0_range)))
            elif tid in ("T3.2", "T3.5"):
                out.append(SpaceDescriptor("herz", dict(alpha=self.alpha[i], p=self.p[i],
                                                        q=zq, omega=w)))
            elif tid == "T3.3":
                out.append(SpaceDescriptor("lebesgue_vexp", dict(q=zq, omega=w)))
            else:
                out.append(SpaceDescriptor("central_morrey", dict(
                    q=self.q[i], lam=self.lam[i], omega1=w,
                    omega2=PowerWeight(_const(self.alpha[i])), R_grid=self.R_grid)))
        return out

    def target_space(self):
        tid = self.theorem_id
        c = self.composites
        if tid in CENTRAL_THEOREMS:
            return SpaceDescriptor("central_morrey", dict(
                q=c["q"], lam=self.target_lambda, omega1=PowerWeight(self.gamma_target),
                omega2=PowerWeight(c["alpha"]), R_grid=self.R_grid))
        w = PowerWeight(c["gamma"])
        zq = c["q"] if self.zeta == 1 else c["q"].scaled(self.zeta)
        alpha = c["alpha_star"] if tid in ("T3.1", "T3.2", "T3.3") else c["alpha_2star"]
        if tid in ("T3.1", "T3.4"):
            return SpaceDescriptor("morrey_herz", dict(alpha=alpha, lam=c["lam"],
                                                       p=self.p_target, q=zq, omega=w,
                                                       k0_range=self.k0_range))
        if tid in ("T3.2", "T3.5"):
            return SpaceDescriptor("herz", dict(alpha=alpha, p=self.p_target, q=c["q"],
                                                omega=w))
        return SpaceDescriptor("lebesgue_vexp", dict(q=c["q"], omega=w))

    def symbol_spaces(self):
        if self.symbol_kind == "lip":
            return [SpaceDescriptor("lipschitz", dict(beta=b, seed=self.seed))
                    for b in self.beta]
        return [SpaceDescriptor("cmo", dict(q=_const(self.r[i]),
                                            omega=PowerWeight(self.gamma[i]),
                                            R_grid=self.R_grid))
                for i in range(self.arity)]


def _const(v):
    if isinstance(v, ExponentFunction):
        if not v.is_constant:
            raise ValueError(f"{v!r} must be constant here")
        return float(v.constant)
    return float(v)


def _const_or_none(v):
    if v is None:
        return None
    if isinstance(v, ExponentFunction):
        return float(v.constant) if v.is_constant else None
    return float(v)


def _central_balance(sc):
    """Left side of the lambda balance condition and the lambda it forces."""
    n = sc.dim
    c = sc.composites
    q_inf = c["q"].p_infty
    g = sc.gamma_target
    beta = float(sum(sc.beta)) if sc.symbol_kind == "lip" else 0.0
    lhs = beta + c["alpha"] - g / q_inf
    for i in range(sc.arity):
        qi = sc.q[i].p_infty
        lhs += (sc.gamma[i] + n) * sc.lam[i] - _const(sc.alpha[i]) + sc.gamma[i] / qi
    return lhs, lhs / (g + n)


# ---------------------------------------------------------------- hypotheses

@dataclass(frozen=True)
class HypothesisItem:
    name: str
    passed: bool
    detail: str = ""
    witness: Optional[list] = None
    flags: tuple = ()


def _t_samples(sc, count=64):
    grid = sc.kernel.adapt(sc.t_grid)
    T = grid.points[sc.kernel(grid.points) != 0]
    if len(T) == 0:
        return T
    idx = np.unique(np.linspace(0, len(T) - 1, min(count, len(T))).astype(int))
    return T[idx]


def _dilation_item(sc, name, zeta):
    """``q_i(A_i^{-1}(t) x) <= zeta q_i(x)`` on sampled (t, x) and ``||1||_theta < inf``."""
    T = _t_samples(sc)
    X = sample_points(sc.dim)
    flags = []
    for i, (fam, q) in enumerate(zip(sc.families, sc.q)):
        if len(T) == 0:
            continue
        Ainv = fam.inverse(T)
        qx = q(X)
        for j, Ai in enumerate(Ainv):
            lhs = q(X @ Ai.T)
            bad = np.nonzero(lhs > zeta * qx * (1 + 1e-12))[0]
            if bad.size:
                return HypothesisItem(name, False,
                                      f"q_{i + 1}(A^-1 x) > zeta q_{i + 1}(x) at t={T[j].tolist()}",
                                      [T[j].tolist(), X[bad[0]].tolist()])
        variant = "theta1" if zeta == 1 and sc.theorem_id in CENTRAL_THEOREMS else "theta"
        for j, A in enumerate(fam(T)):
            th = theta_exponent(q, A, zeta, variant, check_points=X)
            if th.is_constant and np.isinf(th.constant):
                continue
            if th.is_constant:
                return HypothesisItem(name, False,
                                      f"||1|| in the constant-exponent {th.constant:g} space "
                                      "is infinite", [T[j].tolist()])
            flags.append(DOMAIN_TRUNCATED)
            break
    return HypothesisItem(name, True, "checked on sampled t and x", flags=tuple(set(flags)))


def _ends(a):
    if isinstance(a, ExponentFunction):
        return a.p_zero, a.p_infty
    return float(a), float(a)


def _r_ends(r):
    if isinstance(r, ExponentFunction):
        return r.p_zero, r.p_infty, r.p_minus, r.p_plus
    r = float(r)
    return r, r, r, r


def _gamma_regime(sc):
    n = sc.dim
    g = sc.gamma
    if all(x == -n for x in g):
        return HypothesisItem("gamma_regime", True, "alternative 3: all gamma_i = -n")
    ok_a = all(x > -n for x in g) and all(
        e[0] == e[3] and e[1] == e[2] for e in map(_r_ends, sc.r))
    if ok_a:
        return HypothesisItem("gamma_regime", True, "alternative 1: gamma_i > -n, r_i(0)=r_i+")
    ok_b = all(x < -n for x in g) and all(
        e[0] == e[2] and e[1] == e[3] for e in map(_r_ends, sc.r))
    if ok_b:
        return HypothesisItem("gamma_regime", True, "alternative 2: gamma_i < -n, r_i(0)=r_i-")
    return HypothesisItem("gamma_regime", False, f"no alternative holds for gamma={g}")


def _in_Pb(p):
    return p.p_minus > 1 and np.isfinite(p.p_plus)


def _power_norm_item(sc):
    """``|| |.|^(beta_i + gamma_i/r_i) ||`` in ``L^{r_i}_{omega_i}``, over the x-grid annulus."""
    grid = sc.x_grid
    for i in range(sc.arity):
        r = sc.r[i]
        rv = r(grid.points) if isinstance(r, ExponentFunction) else np.full(grid.size, float(r))
        rad = grid.radii
        with np.errstate(divide="ignore"):
            g = rad ** (sc.beta[i] + sc.gamma[i] / rv) * rad ** sc.gamma[i]
        if not np.all(np.isfinite(g)):
            return HypothesisItem("power_norm_finite", False, f"family {i + 1}: non-finite")
        val = luxemburg_from_values(g, rv, grid.weights)
        if not np.isfinite(val):
            return HypothesisItem("power_norm_finite", False, f"family {i + 1}: infinite")
    return HypothesisItem("power_norm_finite", True, "finite over the x-grid annulus",
                          flags=(DOMAIN_TRUNCATED,))


def check_hypotheses(sc):
    """Itemized hypotheses of the scenario's result, each evaluated independently."""
    tid = sc.theorem_id
    n = sc.dim
    m = sc.arity
    items = []
    add = items.append
    want = "lip" if tid in LIP_THEOREMS else "cmo"
    add(HypothesisItem("symbol_kind", sc.symbol_kind == want,
                       f"{sc.symbol_kind} symbols, result expects {want}"))
    lens = {len(x) for x in (sc.inputs, sc.symbols, sc.q, sc.r, sc.alpha, sc.lam, sc.p,
                             sc.gamma, sc.beta)}
    add(HypothesisItem("arity", lens == {m}, f"all per-family lists of length {m}"))
    if sc.symbol_kind == "lip":
        add(HypothesisItem("beta_range", all(0 < b <= 1 for b in sc.beta), f"beta={sc.beta}"))

    if tid not in CENTRAL_THEOREMS:
        add(HypothesisItem("q_i_in_Pb", all(_in_Pb(q) for q in sc.q), ""))
        try:
            comp = sc.composites
            add(HypothesisItem("q_in_Pb", _in_Pb(comp["q"]),
                               f"q- = {comp['q'].p_minus:g}, q+ = {comp['q'].p_plus:g}"))
        except (ValueError, HypothesisError) as exc:
            add(HypothesisItem("q_in_Pb", False, str(exc)))
            comp = None
        add(_dilation_item(sc, "dilation_condition", sc.zeta))
        if tid in ("T3.1", "T3.2", "T3.4", "T3.5"):
            add(HypothesisItem("alpha_decreasing",
                               all(_ends(a)[0] - _ends(a)[1] >= 0 for a in sc.alpha),
                               "alpha_i(0) - alpha_i,inf >= 0"))
            key = "alpha_star" if tid in ("T3.1", "T3.2") else "alpha_2star"
            if comp is not None and comp.get(key) is not None:
                rep = classify_exponent(comp[key])
                add(HypothesisItem(f"{key}_log_holder",
                                   np.isfinite(rep.c0_log_estimate) and
                                   np.isfinite(rep.cinf_log_estimate),
                                   f"c0={rep.c0_log_estimate:.3g}, "
                                   f"cinf={rep.cinf_log_estimate:.3g}"))
            elif comp is not None:
                add(HypothesisItem(f"{key}_defined", False, "r_i must be constant"))
        if tid in ("T3.1", "T3.2"):
            add(_gamma_regime(sc))
            if comp is not None:
                rep = classify_exponent(comp["gamma"])
                add(HypothesisItem("gamma_log_holder_report", True,
                                   f"c0={rep.c0_log_estimate:.3g}, "
                                   f"cinf={rep.cinf_log_estimate:.3g}"))
        if tid in ("T3.1", "T3.4"):
            add(HypothesisItem("lambda_positive", all(x > 0 for x in sc.lam), f"{sc.lam}"))
            add(HypothesisItem("p_positive", all(x > 0 for x in sc.p) and
                               (sc.p_target or 0) > 0, ""))
        if tid in ("T3.2", "T3.5"):
            add(HypothesisItem("lambda_zero", all(x == 0 for x in sc.lam), f"{sc.lam}"))
            add(HypothesisItem("alpha_constant_ends",
                               all(_ends(a)[0] == _ends(a)[1] for a in sc.alpha), ""))
            add(HypothesisItem("p_at_least_one",
                               all(x >= 1 for x in sc.p) and (sc.p_target or 0) >= 1, ""))
            lhs = sum(1.0 / x for x in sc.p)
            add(HypothesisItem("exponent_sum", sc.p_target is not None and
                               abs(lhs - 1.0 / sc.p_target) <= 1e-12,
                               f"sum 1/p_i = {lhs:g}, 1/p = "
                               f"{1.0 / sc.p_target if sc.p_target else float('nan'):g}"))
        if tid == "T3.3":
            add(HypothesisItem("gamma_negative", all(x < 0 for x in sc.gamma), f"{sc.gamma}"))
            add(_power_norm_item(sc))
        if tid in ("T3.4", "T3.5"):
            add(HypothesisItem("gamma_above_minus_n", all(x > -n for x in sc.gamma), ""))
    else:
        add(_dilation_item(sc, "dilation_condition_zeta1", 1.0))
        add(HypothesisItem("q_i_in_Pinf", all(q.p_infty is not None for q in sc.q), ""))
        add(HypothesisItem("lambda_i_range",
                           all(-1.0 / q.p_infty < lam < 0 for q, lam in zip(sc.q, sc.lam)),
                           "lambda_i in (-1/q_i,inf, 0)"))
        add(HypothesisItem("alpha_gamma_above_minus_n",
                           all(_const(a) > -n for a in sc.alpha) and
                           all(g > -n for g in sc.gamma), ""))
        add(HypothesisItem("r_i_positive", all(0 < _const(r) < np.inf for r in sc.r), ""))
        try:
            lhs, lam_forced = _central_balance(sc)
            ok = sc.lam_target is None or abs(lam_forced - sc.lam_target) <= 1e-12
            add(HypothesisItem("lambda_balance", ok,
                               f"forced lambda = {lam_forced:g}, target = {sc.target_lambda:g}"))
        except (ValueError, TypeError) as exc:
            add(HypothesisItem("lambda_balance", False, str(exc)))
    if tid in ("T3.4", "T3.5", "T3.7"):
        add(HypothesisItem("r_i_constant", all(_const_or_none(r) is not None for r in sc.r), ""))
        add(HypothesisItem("scalar_rotation", all(f.is_scalar_rotation for f in sc.families),
                           "A_i(t) = s_i(t) a_i(t)"))
    try:
        C = theorem_constant(sc.constant_id, sc, sc.t_grid)
        add(HypothesisItem(f"{sc.constant_id}_finite", bool(np.isfinite(C)), f"{float(C):.6g}",
                           flags=flags_of(C)))
    except (ValueError, HypothesisError) as exc:
        add(HypothesisItem(f"{sc.constant_id}_finite", False, str(exc)))
    return items


# ---------------------------------------------------------------- verification

@dataclass
class VerificationReport:
    scenario: str
    theorem_id: str
    hypotheses: list
    constant_id: str
    constant: Optional[float] = None
    lhs: Optional[float] = None
    rhs_core: Optional[float] = None
    ratio: Optional[float] = None
    source_norms: list = field(default_factory=list)
    symbol_norms: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def hypotheses_pass(self):
        return all(h.passed for h in self.hypotheses)

    def as_dict(self, timings=True):
        d = asdict(self)
        if not timings:
            d.pop("timings")
        return d


def _norm(desc, f, grid):
    v = desc.norm(f, grid)
    return float(v), list(flags_of(v))


def _ratio(lhs, rhs):
    if lhs == 0:
        return 0.0
    if rhs == 0:
        return np.inf
    return lhs / rhs


@dataclass(frozen=True)
class _Sides:
    lhs: float
    source: list
    symbol: list
    flags: list


def _sides(sc, inputs=None, symbols=None):
    inputs = list(inputs or sc.inputs)
    symbols = list(symbols if symbols is not None else sc.symbols)
    grid = sc.x_grid
    flags = []
    src = []
    for desc, f in zip(sc.source_spaces(), inputs):
        v, fl = _norm(desc, f, grid)
        src.append(v)
        flags += fl
    sym = []
    for desc, b in zip(sc.symbol_spaces(), symbols):
        v, fl = _norm(desc, b, grid)
        sym.append(v)
        flags += fl
    spec = sc.operator_spec(inputs, symbols)
    _, apply_flags = apply(spec, grid.points[:1], return_flags=True)
    H = operator_function(spec)
    lhs, fl = _norm(sc.target_space(), H, grid)
    flags += fl + apply_flags
    return _Sides(lhs, src, sym, flags)


def verify_theorem(sc, constant=None):
    """Hypotheses, constant, target norm of the operator output and the ratio
    ``lhs / (C * prod source norms * prod symbol norms)``.

    Short-circuits with ``HYPOTHESIS_FAIL`` when any hypothesis fails.
    """
    t0 = time.perf_counter()
    hyp = check_hypotheses(sc)
    rep = VerificationReport(sc.name, sc.theorem_id, hyp, sc.constant_id)
    rep.timings["hypotheses"] = time.perf_counter() - t0
    for h in hyp:
        rep.flags += list(h.flags)
    if not rep.hypotheses_pass:
        rep.flags.append(HYPOTHESIS_FAIL)
        rep.flags = list(dict.fromkeys(rep.flags))
        return rep
    t1 = time.perf_counter()
    C = constant if constant is not None else theorem_constant(sc.constant_id, sc, sc.t_grid)
    rep.constant = float(C)
    rep.flags += list(flags_of(C))
    try:
        sides = _sides(sc)
    except NormInfiniteError as exc:
        raise NormInfiniteError(f"{sc.name}: {exc}") from exc
    rep.lhs = sides.lhs
    rep.source_norms = sides.source
    rep.symbol_norms = sides.symbol
    rep.rhs_core = float(rep.constant * np.prod(sides.source) * np.prod(sides.symbol))
    rep.ratio = float(_ratio(rep.lhs, rep.rhs_core))
    rep.flags = list(dict.fromkeys(rep.flags + sides.flags))
    rep.timings["sides"] = time.perf_counter() - t1
    return rep


# ---------------------------------------------------------------- scans

SCAN_FAMILIES = ("amplitude", "symbol", "dilation")


@dataclass
class ScanResult:
    family: str
    values: list
    ratios: list
    sup_ratio: float
    drift: float
    base_ratio: float
    excluded: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def as_dict(self):
        return asdict(self)


def _member(sc, family, c, C):
    if family == "amplitude":
        inputs, symbols = [f.scaled(c) for f in sc.inputs], None
    elif family == "symbol":
        inputs, symbols = None, [b.scaled(c) for b in sc.symbols]
    else:
        inputs, symbols = [f.dilated(c) for f in sc.inputs], None
    s = _sides(sc, inputs, symbols)
    rhs = C * np.prod(s.source) * np.prod(s.symbol)
    return _ratio(s.lhs, rhs), s.flags


def ratio_scan(sc, family, values=None, workers=None):
    """Ratios over a one-parameter family of inputs.

    ``amplitude``: ``f_i -> c f_i``; ``symbol``: ``b_i -> c b_i``; ``dilation``:
    ``f_i -> f_i(s .)``.  ``drift = max |log ratio - median log ratio|``.
    Members whose norms are infinite are excluded and listed.
    """
    if family not in SCAN_FAMILIES:
        raise ValueError(f"unknown scan family {family!r}; expected one of {SCAN_FAMILIES}")
    if values is None:
        values = ([2.0 ** j for j in range(-6, 7)] if family == "dilation"
                  else [1.0 / 3.0, 2.0, 10.0, -1.5])
    values = [float(v) for v in values]
    C = float(theorem_constant(sc.constant_id, sc, sc.t_grid))
    base, base_flags = _member(sc, "amplitude", 1.0, C)
    workers = workers or sc.workers or 1

    def run(v):
        try:
            return _member(sc, family, v, C)
        except NormInfiniteError as exc:
            return None, [f"NORM_INFINITE: {exc}"]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, values))
    else:
        results = [run(v) for v in values]
    ratios, kept, excluded, flags = [], [], [], list(base_flags)
    for v, (ratio, fl) in zip(values, results):
        flags += fl
        if ratio is None or not np.isfinite(ratio):
            excluded.append(v)
            continue
        ratios.append(float(ratio))
        kept.append(v)
    if ratios and all(r > 0 for r in ratios):
        logs = np.log(ratios)
        drift = float(np.max(np.abs(logs - np.median(logs))))
    else:
        drift = 0.0 if all(r == 0 for r in ratios) else float("inf")
    return ScanResult(family, kept, ratios, max(ratios) if ratios else float("nan"), drift,
                      float(base), excluded, list(dict.fromkeys(flags)))


# ---------------------------------------------------------------- proof inequalities

@dataclass(frozen=True)
class InequalityCheck:
    lhs: float
    rhs_without_constant: float
    empirical_constant: float
    flags: tuple = ()


def _shell_index(norm_A):
    """``l`` with ``2**(l-1) < ||A|| <= 2**l``."""
    v = float(_snap_pow2(norm_A))
    mant, e = np.frexp(v)
    return int(e - 1) if mant == 0.5 else int(e)


def _shell_norm(values, pv, grid, k):
    sl = grid.shell_slices().get(k)
    if sl is None:
        return 0.0
    return luxemburg_from_values(values[sl], pv[sl], grid.weights[sl])


def proof_inequality_check(kind, sc, k, t=None, i=0):
    """Empirical constant of a proof-level inequality at shell/ball index ``k``.

    ``shell_transport``: ``||f_i(A_i(t).) chi_k||`` against
    ``c(t) ||1||_theta sum_{r=Theta-1}^{0} ||f_i chi_{k+l+r}||`` (``zeta q_i``-norm).
    ``cmo_gap``: ``||b_i - b_i(A_i(t).)||_{L^{r_i}(omega_i, B_k)}`` against
    ``2**(k(gamma_i+n)/r_i) (1 + psi^(1/r_i)|s_i|^((gamma_i+n)/r_i) + varphi) ||b_i||_CMO``.
    """
    n = sc.dim
    fam = sc.families[i]
    if t is None:
        t = np.full(n, 0.375) if n > 1 else 0.375
    T = as_points(t, n)[:1]
    grid = sc.x_grid
    if kind == "shell_transport":
        pr = sc.factor_params()[i]
        fa = factor_arrays(fam, pr, T, sc.families, grid, "theta", ("c", "one_norm"))
        A = fam(T)[0]
        f = sc.inputs[i]
        w = PowerWeight(sc.gamma[i])(grid.points)
        q = sc.q[i]
        g = np.abs(f(grid.points @ A.T)) * w
        lhs = _shell_norm(g, q(grid.points), grid, k)
        ell = _shell_index(fa.norm_A[0])
        theta = int(fa.theta[0])
        zq = (q if sc.zeta == 1 else q.scaled(sc.zeta))(grid.points)
        base = np.abs(f(grid.points)) * w
        missing = [j for j in range(k + ell + theta - 1, k + ell + 1)
                   if not grid.k_min <= j <= grid.k_max]
        total = sum(_shell_norm(base, zq, grid, j) for j in range(k + ell + theta - 1, k + ell + 1))
        rhs = float(fa.c[0] * fa.one_norm[0] * total)
        flags = tuple(fa.flags) + (("SHELLS_OFF_GRID",) if missing else ())
    elif kind == "cmo_gap":
        if not fam.is_scalar_rotation:
            raise ValueError("cmo_gap needs a scalar-rotation family")
        r = _const(sc.r[i])
        g_i = sc.gamma[i]
        pr = FactorParams(q=sc.q[i], gamma=g_i)
        fa = factor_arrays(fam, pr, T, sc.families, grid, "theta", ("psi", "varphi"))
        b = sc.symbols[i]
        A = fam(T)[0]
        inside = grid.radii <= 2.0 ** k
        P = grid.points[inside]
        diff = b(P) - b(P @ A.T)
        wt = grid.weights[inside] * PowerWeight(g_i)(P)
        lhs = float(np.sum(wt * np.abs(diff) ** r) ** (1.0 / r))
        cmo = float(cmo_norm(b, r, PowerWeight(g_i), grid, sc.R_grid))
        s = abs(float(fa.s[0]))
        bracket = 1 + fa.psi[0] ** (1 / r) * s ** ((g_i + n) / r) + fa.varphi[0]
        rhs = float(2.0 ** (k * (g_i + n) / r) * bracket * cmo)
        flags = ()
    else:
        raise ValueError(f"unknown inequality {kind!r}")
    if lhs == 0:
        return InequalityCheck(0.0, rhs, 0.0, flags)
    if rhs == 0:
        raise InequalityDegenerateError(f"{kind}: rhs vanishes while lhs = {lhs}")
    return InequalityCheck(lhs, rhs, lhs / rhs, flags)


__all__ = ["Scenario", "HypothesisItem", "check_hypotheses", "VerificationReport",
           "verify_theorem", "ratio_scan", "ScanResult", "proof_inequality_check",
           "InequalityCheck", "THEOREMS", "CONSTANT_OF"]
