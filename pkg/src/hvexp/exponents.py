"""Variable exponents, their classes, and the composite exponents of the theorems.

Exponents are closed-form objects: bounds, the value at the origin and the
limit at infinity are carried analytically, never estimated from samples.
A ``kind`` flag separates exponent-class functions (values in ``[1, inf]``)
from real-class functions such as ``alpha(.)`` or ``gamma(.)``.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._common import (ExponentError, HypothesisError, as_points, sample_directions,
                      sample_points)

EXPONENT = "exponent"
REAL = "real"


@dataclass(frozen=True, eq=False)
class ExponentFunction:
    dim: int
    func: Callable[[np.ndarray], np.ndarray]
    p_minus: float
    p_plus: float
    p_zero: float
    p_infty: Optional[float]
    kind: str = EXPONENT
    constant: Optional[float] = None
    radial: bool = True
    c0_log: Optional[float] = None
    cinf_log: Optional[float] = None
    label: str = ""
    descriptor: dict = field(default_factory=dict)

    def __call__(self, x):
        pts = as_points(x, self.dim)
        if self.constant is not None:
            return np.full(len(pts), self.constant)
        return np.broadcast_to(np.asarray(self.func(pts), dtype=float), (len(pts),)).copy()

    @property
    def is_constant(self):
        return self.constant is not None

    def scaled(self, factor):
        """``factor * p(.)``; keeps the kind."""
        return affine_combination([(factor, self)], kind=self.kind,
                                  label=f"{factor:g}*{self.label}")

    def reciprocal(self):
        """``1/p(.)`` as a real-class function, with ``1/inf = 0``."""
        return _map_decreasing(self, _safe_reciprocal, REAL, f"1/{self.label}")

    def __repr__(self):
        return f"ExponentFunction({self.label or 'custom'}, dim={self.dim}, kind={self.kind})"


def _safe_reciprocal(v):
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(np.isinf(v), 0.0, 1.0 / v)
    return out


def _scalar(fn, v):
    if v is None:
        return None
    return float(fn(np.array([v]))[0])


def _map_decreasing(p, fn, kind, label):
    """Apply a scalar decreasing map ``fn`` to ``p``; bounds swap."""
    const = _scalar(fn, p.constant)
    return ExponentFunction(
        dim=p.dim,
        func=lambda x: fn(p(x)),
        p_minus=_scalar(fn, p.p_plus),
        p_plus=_scalar(fn, p.p_minus),
        p_zero=_scalar(fn, p.p_zero),
        p_infty=_scalar(fn, p.p_infty),
        kind=kind,
        constant=const,
        radial=p.radial,
        label=label,
    )


def constant_exponent(value, dim=1, kind=EXPONENT):
    value = float(value)
    if kind == EXPONENT and value < 1:
        raise ExponentError(f"constant exponent value={value} is below 1")
    return ExponentFunction(dim=dim, func=lambda x: np.full(len(x), value),
                            p_minus=value, p_plus=value, p_zero=value, p_infty=value,
                            kind=kind, constant=value, c0_log=0.0, cinf_log=0.0,
                            label=f"const({value:g})",
                            descriptor={"kind": "constant", "value": value})


def make_exponent(spec=None, dim=1, kind=EXPONENT, **params):
    """Build a catalog exponent from a descriptor.

    ``spec`` is a mapping such as ``{"kind": "rational_bump", "a": 2, "b": 1}``
    (keyword arguments are merged in).  Catalog:

    - ``constant``: ``value``
    - ``rational_bump``: ``a + b/(1+|x|)``
    - ``clamp_log``: ``a + b/log(e+|x|)``

    Both non-constant forms are monotone in ``|x|`` with value ``a+b`` at the
    origin and limit ``a`` at infinity, so their bounds are exact.
    """
    desc = {"kind": spec} if isinstance(spec, str) else dict(spec or {})
    desc.update(params)
    name = desc.pop("kind", None) or desc.pop("name", None)
    dim = int(desc.pop("dim", dim))
    kind = desc.pop("class", kind)
    if name == "constant":
        return constant_exponent(desc["value"], dim=dim, kind=kind)
    if name in ("rational_bump", "clamp_log"):
        a = float(desc["a"])
        b = float(desc["b"])
        if b == 0.0:
            return constant_exponent(a, dim=dim, kind=kind)
        lo, hi = min(a, a + b), max(a, a + b)
        if kind == EXPONENT and lo < 1:
            bad = "a" if a < 1 else "b"
            raise ExponentError(f"{name} with a={a}, b={b} takes values below 1 "
                                f"(offending parameter: {bad})")
        if name == "rational_bump":
            def func(x, a=a, b=b):
                return a + b / (1.0 + np.linalg.norm(x, axis=1))
        else:
            def func(x, a=a, b=b):
                return a + b / np.log(np.e + np.linalg.norm(x, axis=1))
        return ExponentFunction(dim=dim, func=func, p_minus=lo, p_plus=hi,
                                p_zero=a + b, p_infty=a, kind=kind,
                                label=f"{name}({a:g},{b:g})",
                                descriptor={"kind": name, "a": a, "b": b})
    raise ExponentError(f"unknown exponent kind {name!r}")


def affine_combination(terms, offset=0.0, kind=REAL, label=""):
    """``offset + sum(c * p(.))`` with interval-arithmetic bounds.

    Values at the origin and at infinity are exact; ``p_minus``/``p_plus``
    are sound enclosures (exact when at most one term is non-constant).
    """
    terms = [(float(c), p) for c, p in terms if c != 0.0]
    dims = {p.dim for _, p in terms}
    if len(dims) > 1:
        raise ValueError(f"exponents of mixed dimension {sorted(dims)}")
    dim = dims.pop() if dims else 1
    lo = hi = z = float(offset)
    inf_val = float(offset)
    for c, p in terms:
        a, b = (c * p.p_minus, c * p.p_plus) if c > 0 else (c * p.p_plus, c * p.p_minus)
        lo += a
        hi += b
        z += c * p.p_zero
        inf_val = None if (inf_val is None or p.p_infty is None) else inf_val + c * p.p_infty
    if all(p.is_constant for _, p in terms):
        const = float(offset) + sum(c * p.constant for c, p in terms)
        lo = hi = z = inf_val = const
    else:
        const = None
    if kind == EXPONENT and lo < 1:
        raise ExponentError(f"combination {label!r} may take values below 1 (lower bound {lo})")

    def func(x):
        out = np.full(len(x), float(offset))
        for c, p in terms:
            out = out + c * p(x)
        return out

    return ExponentFunction(dim=dim, func=func, p_minus=lo, p_plus=hi, p_zero=z,
                            p_infty=inf_val, kind=kind, constant=const,
                            radial=all(p.radial for _, p in terms), label=label)


def reciprocal_sum(exponents, kind=EXPONENT, label=""):
    """The exponent ``q`` with ``1/q = sum(1/p_i)``."""
    recip = affine_combination([(1.0, p.reciprocal()) for p in exponents], kind=REAL)
    return _map_decreasing(recip, _safe_reciprocal, kind, label)


# ---------------------------------------------------------------- classification

@dataclass(frozen=True)
class ClassReport:
    in_P: bool
    in_P_b: bool
    in_P_infty: bool
    c0_log_estimate: float
    cinf_log_estimate: float
    infty_residual: Optional[float]


def classify_exponent(p, radius_sweep=None):
    """Class membership from cached bounds plus log-Hoelder modulus estimates.

    ``radius_sweep`` is an array of radii (default ``2**j`` for
    ``j`` in ``[-20, 20]`` at four points per octave).  The moduli are suprema
    over the sampled points, so they only grow as the sweep is refined.
    """
    if radius_sweep is None:
        pts = sample_points(p.dim)
    else:
        radii = np.asarray(radius_sweep, dtype=float).ravel()
        if radii.size == 0:
            raise ValueError("radius_sweep is empty")
        dirs = sample_directions(p.dim)
        pts = (radii[:, None, None] * dirs[None]).reshape(-1, p.dim)
    r = np.linalg.norm(pts, axis=1)
    vals = p(pts)
    with np.errstate(divide="ignore", invalid="ignore"):
        dev0 = np.abs(vals - p.p_zero) * np.log(np.e + 1.0 / r)
    c0 = float(np.max(np.where(np.isfinite(dev0), dev0, 0.0))) if p.p_zero is not None else np.inf
    if p.p_infty is None:
        cinf = np.inf
        resid = None
    else:
        devinf = np.abs(vals - p.p_infty)
        cinf = float(np.max(devinf * np.log(np.e + r)))
        resid = float(np.max(devinf[r == r.max()]))
    in_P = p.kind == EXPONENT and p.p_minus >= 1
    in_P_b = in_P and p.p_minus > 1 and np.isfinite(p.p_plus)
    in_P_infty = in_P and p.p_infty is not None
    return ClassReport(in_P=bool(in_P), in_P_b=bool(in_P_b), in_P_infty=bool(in_P_infty),
                       c0_log_estimate=c0, cinf_log_estimate=cinf, infty_residual=resid)


# ---------------------------------------------------------------- composites

@dataclass(frozen=True)
class TheoremExponents:
    beta: float
    lam: float
    gamma: ExponentFunction
    q: ExponentFunction
    alpha_star: ExponentFunction
    alpha_2star: Optional[ExponentFunction]


def _as_exponent(value, dim, kind):
    if isinstance(value, ExponentFunction):
        return value
    if value is None:
        raise ValueError("missing exponent")
    return constant_exponent(float(value), dim=dim, kind=kind)


def _r_reciprocal(r, dim):
    """``1/r(.)`` accepting ``inf`` (and ``None``) as 'no r-term'."""
    if r is None or (not isinstance(r, ExponentFunction) and np.isinf(float(r))):
        return constant_exponent(0.0, dim=dim, kind=REAL)
    return _as_exponent(r, dim, EXPONENT).reciprocal()


def compose_theorem_exponents(n, betas, lambdas, gammas, rs, qs, alphas, check_points=None):
    """Composite parameters shared by the Morrey-Herz, Herz and Lebesgue results.

    Returns ``beta = sum(beta_i)``, ``lam = sum(lambda_i)``,
    ``gamma(.) = sum(gamma_i) + sum(gamma_i / r_i(.))``,
    ``1/q(.) = sum(1/q_i(.)) + sum(1/r_i(.))``,
    ``alpha*(.) = sum(alpha_i(.)) - beta - sum((gamma_i + n)/r_i(.))``, and when
    every ``r_i`` is constant ``alpha**(.) = sum(alpha_i(.)) - sum((gamma_i+n)/r_i)``.

    ``r_i = inf`` is accepted and contributes nothing.
    Raises ``ExponentError`` if ``1/q`` exceeds 1 at a sampled point.
    """
    m = len(qs)
    if not (len(betas) == len(lambdas) == len(gammas) == len(rs) == len(alphas) == m):
        raise ValueError("parameter lists must all have length m")
    qs = [_as_exponent(q, n, EXPONENT) for q in qs]
    alphas = [_as_exponent(a, n, REAL) for a in alphas]
    inv_r = [_r_reciprocal(r, n) for r in rs]
    beta = float(sum(betas))
    lam = float(sum(lambdas))
    gamma = affine_combination(
        [(g, ir) for g, ir in zip(gammas, inv_r)], offset=float(sum(gammas)),
        kind=REAL, label="gamma")
    inv_q = affine_combination(
        [(1.0, q.reciprocal()) for q in qs] + [(1.0, ir) for ir in inv_r], kind=REAL)
    pts = sample_points(n) if check_points is None else as_points(check_points, n)
    iq = inv_q(pts)
    bad = np.nonzero(iq > 1 + 1e-14)[0]
    if bad.size or (inv_q.is_constant and inv_q.constant > 1 + 1e-14):
        where = pts[bad[0]] if bad.size else pts[0]
        raise ExponentError(f"composed 1/q = {iq[bad[0]] if bad.size else inv_q.constant} > 1 "
                            f"at x={where.tolist()}: q(.) leaves the exponent class")
    q = _map_decreasing(inv_q, _safe_reciprocal, EXPONENT, "q")
    alpha_terms = [(1.0, a) for a in alphas] + [(-(g + n), ir) for g, ir in zip(gammas, inv_r)]
    alpha_star = affine_combination(alpha_terms, offset=-beta, kind=REAL, label="alpha*")
    if all(ir.is_constant for ir in inv_r):
        alpha_2star = affine_combination(alpha_terms, kind=REAL, label="alpha**")
    else:
        alpha_2star = None
    return TheoremExponents(beta=beta, lam=lam, gamma=gamma, q=q,
                            alpha_star=alpha_star, alpha_2star=alpha_2star)


def compose_central_exponents(n, alphas, rs, qs):
    """Composites for the central Morrey results (all parameters constant but q_i).

    ``alpha = sum(alpha_i) + sum(alpha_i / r_i)`` and
    ``1/q(.) = sum(1/q_i(.)) + sum(1/r_i)``.
    """
    alpha = float(sum(alphas) + sum(a / r for a, r in zip(alphas, rs)))
    qs = [_as_exponent(q, n, EXPONENT) for q in qs]
    inv_q = affine_combination([(1.0, q.reciprocal()) for q in qs],
                               offset=float(sum(1.0 / r for r in rs)), kind=REAL)
    if inv_q.p_plus > 1 + 1e-14:
        raise ExponentError(f"composed 1/q reaches {inv_q.p_plus} > 1")
    return alpha, _map_decreasing(inv_q, _safe_reciprocal, EXPONENT, "q")


# ---------------------------------------------------------------- theta exponent

def theta_exponent(q, A, zeta=1.0, variant="theta", check_points=None, tol=1e-13):
    """Exponent with ``1/theta(x) = 1/q(A^{-1} x) - 1/(zeta q(x))``.

    ``A`` is one invertible matrix (the family evaluated at a fixed ``t``).
    ``variant="theta1"`` forces ``zeta = 1``.  Where the difference vanishes the
    value is ``+inf``.  A negative difference at a sample point means the
    dilation condition ``q(A^{-1} .) <= zeta q(.)`` fails there and raises
    ``HypothesisError`` with the witnessing point.
    """
    if variant == "theta1":
        zeta = 1.0
    elif variant != "theta":
        raise ValueError(f"unknown variant {variant!r}")
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = q.dim
    if A.shape != (n, n):
        raise ValueError(f"matrix shape {A.shape} does not match dim {n}")
    Ainv = np.linalg.inv(A)
    zeta = float(zeta)

    def recip_diff(x):
        y = x @ Ainv.T
        return 1.0 / q(y) - 1.0 / (zeta * q(x))

    if q.is_constant:
        d = 1.0 / q.constant - 1.0 / (zeta * q.constant)
        if d < -tol:
            raise HypothesisError(f"q(A^-1 x) <= zeta q(x) fails for constant q={q.constant}, "
                                  f"zeta={zeta}", witness=np.zeros(n))
        value = np.inf if d <= tol else 1.0 / d
        return ExponentFunction(dim=n, func=lambda x: np.full(len(x), value),
                                p_minus=value, p_plus=value, p_zero=value, p_infty=value,
                                kind=EXPONENT, constant=value, label=f"theta({value:g})")

    pts = sample_points(n) if check_points is None else as_points(check_points, n)
    d = recip_diff(pts)
    bad = np.nonzero(d < -tol)[0]
    if bad.size:
        x = pts[bad[0]]
        raise HypothesisError(f"q(A^-1 x) <= zeta q(x) fails at x={x.tolist()} "
                              f"(1/theta = {d[bad[0]]:.3g})", witness=x)

    def func(x):
        dd = recip_diff(x)
        with np.errstate(divide="ignore"):
            return np.where(dd <= tol, np.inf, 1.0 / np.maximum(dd, tol))

    lo_d = 1.0 / q.p_plus - 1.0 / (zeta * q.p_minus)
    hi_d = 1.0 / q.p_minus - 1.0 / (zeta * q.p_plus)
    p_minus = 1.0 / hi_d if hi_d > 0 else np.inf
    p_plus = 1.0 / lo_d if lo_d > tol else np.inf
    d0 = 1.0 / q.p_zero - 1.0 / (zeta * q.p_zero)
    p_zero = 1.0 / d0 if d0 > tol else np.inf
    if q.p_infty is not None:
        dinf = 1.0 / q.p_infty - 1.0 / (zeta * q.p_infty)
        p_inf = 1.0 / dinf if dinf > tol else np.inf
    else:
        p_inf = None
    return ExponentFunction(dim=n, func=func, p_minus=max(p_minus, 1.0), p_plus=p_plus,
                            p_zero=p_zero, p_infty=p_inf, kind=EXPONENT, radial=False,
                            label="theta")
