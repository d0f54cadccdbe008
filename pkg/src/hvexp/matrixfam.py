"""Matrix families, kernels, the dyadic index Theta*, structural factors and
the kernel-integral constants C1..C7.

All t-dependent quantities are evaluated on whole arrays of t-nodes at once;
matrix stacks have shape ``(N, n, n)``.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._common import FlaggedValue, HypothesisError, as_points
from .exponents import ExponentFunction, theta_exponent
from .norms import luxemburg_from_values
from .quadrature import TAIL_RTOL, make_grid

POW2_SNAP = 1e-12
DOMAIN_TRUNCATED = "DOMAIN_TRUNCATED"
TRUNCATION_SUSPECT = "TRUNCATION_SUSPECT"
NOT_DECAYING = 0.999


# ---------------------------------------------------------------- matrix norms

def frobenius_norm(A):
    """``(sum |a_ij|**2)**(1/2)``; stacks ``(..., n, n)`` give one value per matrix."""
    A = np.asarray(A, dtype=float)
    if A.ndim < 2:
        A = np.atleast_2d(A)
    out = np.sqrt(np.sum(A * A, axis=(-2, -1)))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class DetBounds:
    lower: float
    mid: float
    upper: float
    holds: bool


def det_bounds_check(A, slack=1e-12):
    """``||A||**(-n) <= |det A^{-1}| <= ||A^{-1}||**n`` with relative slack."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    det = np.linalg.det(A)
    if det == 0 or not np.isfinite(det):
        raise ValueError("matrix is singular")
    Ainv = np.linalg.inv(A)
    lower = frobenius_norm(A) ** (-n)
    mid = abs(1.0 / det)
    upper = frobenius_norm(Ainv) ** n
    holds = lower <= mid * (1 + slack) and mid <= upper * (1 + slack)
    return DetBounds(lower, mid, upper, bool(holds))


# ---------------------------------------------------------------- families

def _signed_power(x, p):
    if p == 1:
        return x
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.sign(x) * np.abs(x) ** p


def _scalar_map(dim, coef=1.0, power=1.0, component=None):
    """``s(t) = coef * t_c**power`` (sign kept), or ``coef * |t|**power``."""
    coef, power = float(coef), float(power)
    if component is None:
        return lambda T: coef * np.linalg.norm(T, axis=1) ** power
    c = int(component)
    if not 0 <= c < dim:
        raise ValueError(f"component {c} out of range for dim {dim}")
    return lambda T: coef * _signed_power(T[:, c], power)


def _planar_rotation(dim, angle):
    """Rotation by ``angle`` (array) in the first coordinate plane."""
    N = len(angle)
    R = np.broadcast_to(np.eye(dim), (N, dim, dim)).copy()
    if dim >= 2:
        c, s = np.cos(angle), np.sin(angle)
        R[:, 0, 0], R[:, 0, 1], R[:, 1, 0], R[:, 1, 1] = c, -s, s, c
    return R


@dataclass(frozen=True, eq=False)
class MatrixFamily:
    """``t -> A(t)``, an invertible ``n x n`` matrix for ``t`` in ``R^n``.

    With ``structure="scalar_rotation"`` the family is ``s(t) a(t)`` with ``a``
    orthogonal; ``scale`` and ``rotation`` then hold ``s`` and ``a``.
    """

    dim: int
    func: Callable[[np.ndarray], np.ndarray]
    structure: str = "general"
    scale: Optional[Callable] = None
    rotation: Optional[Callable] = None
    label: str = ""
    descriptor: dict = field(default_factory=dict)

    def __call__(self, t):
        T = as_points(t, self.dim)
        return np.asarray(self.func(T), dtype=float).reshape(len(T), self.dim, self.dim)

    @property
    def is_scalar_rotation(self):
        return self.structure == "scalar_rotation"

    def s(self, t):
        if not self.is_scalar_rotation:
            raise ValueError(f"family {self.label} has no scalar-rotation structure")
        return np.asarray(self.scale(as_points(t, self.dim)), dtype=float)

    def inverse(self, t):
        T = as_points(t, self.dim)
        if self.is_scalar_rotation:
            s = self.scale(T)
            if np.any(s == 0):
                i = int(np.nonzero(s == 0)[0][0])
                raise ValueError(f"A(t) singular at t={T[i].tolist()}")
            a = self.rotation(T)
            return np.swapaxes(a, 1, 2) / s[:, None, None]
        A = self(T)
        det = np.linalg.det(A)
        bad = np.nonzero((det == 0) | ~np.isfinite(det))[0]
        if bad.size:
            raise ValueError(f"A(t) singular at t={T[bad[0]].tolist()}")
        return np.linalg.inv(A)


def _scalar_rotation_family(dim, s, angle, label, desc):
    rot = lambda T: _planar_rotation(dim, angle(T))  # noqa: E731
    func = lambda T: s(T)[:, None, None] * rot(T)  # noqa: E731
    return MatrixFamily(dim, func, "scalar_rotation", s, rot, label, desc)


def make_family(spec=None, dim=1, **params):
    """Catalog matrix family.

    - ``scalar``: ``A(t) = s(t) I`` with ``s(t) = coef * t_c**power`` (``component``
      given) or ``coef * |t|**power``
    - ``identity``
    - ``diagonal_powers``: ``diag(t_1**d_1, ..., t_n**d_n)``
    - ``rotation_scalar``: ``s(t)`` as for ``scalar`` times the planar rotation
      by ``angle + angle_rate * t_0``
    - ``matrix``: a constant matrix
    """
    desc = {"kind": spec} if isinstance(spec, str) else dict(spec or {})
    desc.update(params)
    d = dict(desc)
    kind = d.pop("kind")
    dim = int(d.pop("dim", dim))
    if kind in ("scalar", "identity"):
        if kind == "identity":
            s = lambda T: np.ones(len(T))  # noqa: E731
            label = "I"
        else:
            s = _scalar_map(dim, d.get("coef", 1.0), d.get("power", 1.0),
                            d.get("component", 0 if dim == 1 else None))
            label = f"scalar({d})"
        return _scalar_rotation_family(dim, s, lambda T: np.zeros(len(T)), label, desc)
    if kind == "rotation_scalar":
        s = _scalar_map(dim, d.get("coef", 1.0), d.get("power", 1.0),
                        d.get("component", 0 if dim == 1 else None))
        a0, rate = float(d.get("angle", 0.0)), float(d.get("angle_rate", 0.0))
        return _scalar_rotation_family(dim, s, lambda T: a0 + rate * T[:, 0],
                                       f"rot_scalar({d})", desc)
    if kind == "diagonal_powers":
        powers = [float(p) for p in d["powers"]]
        if len(powers) != dim:
            raise ValueError(f"diagonal_powers needs {dim} powers, got {len(powers)}")

        def func(T):
            diag = np.stack([_signed_power(T[:, i], p) for i, p in enumerate(powers)], axis=1)
            out = np.zeros((len(T), dim, dim))
            out[:, np.arange(dim), np.arange(dim)] = diag
            return out
        return MatrixFamily(dim, func, "general", label=f"diag_pow({powers})", descriptor=desc)
    if kind == "matrix":
        M = np.asarray(d["matrix"], dtype=float).reshape(dim, dim)
        return MatrixFamily(dim, lambda T: np.broadcast_to(M, (len(T), dim, dim)).copy(),
                            "general", label="matrix", descriptor=desc)
    raise ValueError(f"unknown matrix family kind {kind!r}")


# ---------------------------------------------------------------- kernels

@dataclass(frozen=True, eq=False)
class KernelSpec:
    """``Phi: R^n -> [0, inf)`` with its (star-shaped) support."""

    dim: int
    func: Callable[[np.ndarray], np.ndarray]
    ray_limit: Optional[Callable] = None
    inner_limit: Optional[Callable] = None
    is_zero: bool = False
    label: str = ""
    descriptor: dict = field(default_factory=dict)

    def __call__(self, t):
        T = as_points(t, self.dim)
        if self.is_zero:
            return np.zeros(len(T))
        return np.asarray(self.func(T), dtype=float)

    def adapt(self, grid):
        """The grid clipped to the kernel support, ray by ray."""
        if self.ray_limit is None and self.inner_limit is None:
            return grid
        return make_grid(grid.dim, grid.k_min, grid.k_max, grid.radial_nodes_per_shell,
                         grid.angular_nodes, grid.rule, ray_limit=self.ray_limit,
                         inner_limit=self.inner_limit, tag=f"{grid.tag}|{self.label}")


def _cube_ray(dirs):
    """Distance from 0 to the boundary of ``[0,1]^n`` along each direction."""
    inside = np.all(dirs > 0, axis=1)
    with np.errstate(divide="ignore"):
        lim = 1.0 / np.max(dirs, axis=1)
    return np.where(inside, lim, 0.0)


def _weight_map(dim, w):
    """Kernel weight on the cube: number, ``{"kind": "monomial", "powers": [...]}``
    (``prod t_i**p_i``) or ``{"kind": "radial_power", "a": a}``."""
    if w is None:
        return lambda T: np.ones(len(T))
    if callable(w):
        return w
    if isinstance(w, (int, float)):
        return lambda T: np.full(len(T), float(w))
    w = dict(w)
    kind = w.get("kind")
    if kind == "monomial":
        pw = [float(p) for p in w["powers"]]
        if len(pw) != dim:
            raise ValueError(f"monomial weight needs {dim} powers")
        return lambda T: np.prod(np.abs(T) ** np.asarray(pw)[None, :], axis=1)
    if kind == "radial_power":
        a = float(w["a"])
        return lambda T: np.linalg.norm(T, axis=1) ** a
    if kind == "constant":
        v = float(w["value"])
        return lambda T: np.full(len(T), v)
    raise ValueError(f"unknown kernel weight {w!r}")


def make_kernel(spec=None, dim=1, **params):
    """Catalog kernel.

    - ``power_annulus``: ``|t|**sigma`` on ``r_in < |t| <= r_out``; ``positive``
      restricts to the open positive orthant
    - ``power_cube``: ``|t|**sigma * w(t)`` on ``[0,1]^n`` (see ``_weight_map``)
    - ``gaussian_tail``: ``|t|**sigma * exp(-|t|**2 / scale**2)``
    - ``zero``
    """
    desc = {"kind": spec} if isinstance(spec, str) else dict(spec or {})
    desc.update(params)
    d = dict(desc)
    kind = d.pop("kind")
    dim = int(d.pop("dim", dim))
    amp = float(d.get("amplitude", 1.0))
    if kind == "zero" or amp == 0.0:
        return KernelSpec(dim, lambda T: np.zeros(len(T)), is_zero=True, label="zero",
                          descriptor=desc)
    sigma = float(d.get("sigma", 0.0))
    if kind == "power_annulus":
        r_in, r_out = float(d.get("r_in", 0.0)), float(d.get("r_out", 1.0))
        positive = bool(d.get("positive", False))
        if not 0 <= r_in < r_out:
            raise ValueError(f"need 0 <= r_in < r_out, got {r_in}, {r_out}")

        def func(T):
            r = np.linalg.norm(T, axis=1)
            on = (r > r_in) & (r <= r_out)
            if positive:
                on &= np.all(T > 0, axis=1)
            return np.where(on, amp * r ** sigma, 0.0)

        def ray(dirs):
            if positive:
                return np.where(np.all(dirs > 0, axis=1), r_out, 0.0)
            return np.full(len(dirs), r_out)
        inner = (lambda dirs: np.full(len(dirs), r_in)) if r_in > 0 else None
        return KernelSpec(dim, func, ray, inner, label=f"power_annulus({d})", descriptor=desc)
    if kind == "power_cube":
        w = _weight_map(dim, d.get("weight"))

        def func(T):
            on = np.all((T > 0) & (T <= 1), axis=1)
            out = np.zeros(len(T))
            if on.any():
                Ton = T[on]
                out[on] = amp * np.linalg.norm(Ton, axis=1) ** sigma * w(Ton)
            return out
        return KernelSpec(dim, func, _cube_ray, None, label=f"power_cube({d})", descriptor=desc)
    if kind == "gaussian_tail":
        scale = float(d.get("scale", 1.0))

        def func(T):
            r = np.linalg.norm(T, axis=1)
            return amp * r ** sigma * np.exp(-(r / scale) ** 2)
        return KernelSpec(dim, func, label=f"gaussian_tail({d})", descriptor=desc)
    raise ValueError(f"unknown kernel kind {kind!r}")


# ---------------------------------------------------------------- Theta*

def _snap_pow2(rho):
    """Snap values within ``POW2_SNAP`` (relative) of a power of two onto it."""
    rho = np.asarray(rho, dtype=float)
    e = np.rint(np.log2(rho))
    p2 = np.exp2(e)
    return np.where(np.abs(rho - p2) <= POW2_SNAP * p2, p2, rho)


def condition_numbers(family, T):
    """``||A(t)|| ||A^{-1}(t)||``; exactly ``n`` for scalar-rotation families."""
    T = as_points(T, family.dim)
    if family.is_scalar_rotation:
        family.inverse(T)                      # invertibility check
        return np.full(len(T), float(family.dim))
    return frobenius_norm(family(T)) * frobenius_norm(family.inverse(T))


def theta_from_rho(rho):
    """The unique integer ``Theta`` with ``2**Theta rho < 1 <= 2**(Theta+1) rho``.

    With ``rho = m 2**e`` and ``m`` in ``[1/2, 1)`` this is exactly ``-e``.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)) or np.any(~np.isfinite(rho)):
        raise ValueError("rho* must be positive and finite")
    _, e = np.frexp(rho)
    theta = -e.astype(np.int64)
    return int(theta) if theta.ndim == 0 else theta


def rho_star(families, t):
    rhos = [condition_numbers(f, t) for f in families]
    return _snap_pow2(np.max(np.stack(rhos), axis=0))


def theta_star(families, t):
    """Greatest integer ``Theta`` with ``max_i ||A_i(t)|| ||A_i^{-1}(t)|| < 2**(-Theta)``."""
    single = np.ndim(t) == 0 or (np.ndim(t) == 1 and families[0].dim > 1)
    out = theta_from_rho(rho_star(families, t))
    return int(out[0]) if single else out


# ---------------------------------------------------------------- factors

@dataclass(frozen=True)
class FactorParams:
    """Per-family parameters referenced by the factors.

    ``gamma`` is the power used in ``c`` and ``psi`` (``alpha_i`` for the
    central Morrey constants); ``alpha`` carries ``alpha(0)`` and ``alpha_inf``.
    """

    q: Optional[ExponentFunction] = None
    gamma: Optional[float] = None
    lam: Optional[float] = None
    alpha: Optional[object] = None
    beta: Optional[float] = None
    r: Optional[float] = None
    zeta: float = 1.0


def _alpha_ends(alpha):
    if isinstance(alpha, ExponentFunction):
        return alpha.p_zero, alpha.p_infty
    return float(alpha), float(alpha)


def _geometric_sum(theta, x):
    """``sum_{r=Theta-1}^{0} 2**(r x)`` for an integer array ``Theta``."""
    theta = np.asarray(theta)
    out = np.empty(theta.shape)
    for th in np.unique(theta):
        out[theta == th] = np.sum(np.exp2(np.arange(th - 1, 1) * x))
    return out


@dataclass
class FactorArrays:
    norm_A: np.ndarray
    norm_Ainv: np.ndarray
    det_inv: np.ndarray
    theta: np.ndarray
    c: Optional[np.ndarray] = None
    phi: Optional[np.ndarray] = None
    phi0: Optional[np.ndarray] = None
    psi: Optional[np.ndarray] = None
    varphi: Optional[np.ndarray] = None
    gap: Optional[np.ndarray] = None
    one_norm: Optional[np.ndarray] = None
    s: Optional[np.ndarray] = None
    flags: list = field(default_factory=list)


def _one_norm_theta(family, params, T, x_grid, variant):
    """``||1||`` in the ``theta(t, .)`` space for every t-node.

    Exactly 1 when theta is identically infinite; otherwise the Luxemburg
    norm of 1 over the x-grid annulus (flagged DOMAIN_TRUNCATED).
    """
    q = params.q
    mats = family(T)
    out = np.empty(len(T))
    flags = []
    cache = {}
    for i, A in enumerate(mats):
        key = A.tobytes()
        if key not in cache:
            try:
                th = theta_exponent(q, A, params.zeta, variant,
                                    check_points=None if x_grid is None else x_grid.points[::7])
            except HypothesisError as exc:
                raise HypothesisError(f"{exc} (t={T[i].tolist()})", witness=T[i]) from exc
            if th.is_constant and np.isinf(th.constant):
                cache[key] = 1.0
            else:
                if x_grid is None:
                    raise ValueError("a finite theta exponent needs an x-grid for ||1||")
                cache[key] = luxemburg_from_values(np.ones(x_grid.size), th(x_grid.points),
                                                   x_grid.weights)
                flags.append(DOMAIN_TRUNCATED)
        out[i] = cache[key]
    return out, flags


def factor_arrays(family, params, T, families=None, x_grid=None, variant="theta",
                  need=("c", "phi", "phi0", "psi", "varphi", "gap", "one_norm")):
    """Vectorized structural factors of one family at the t-nodes ``T``."""
    T = as_points(T, family.dim)
    n = family.dim
    A = family(T)
    Ainv = family.inverse(T)
    nA, nAi = frobenius_norm(A), frobenius_norm(Ainv)
    if family.is_scalar_rotation:
        s = family.s(T)
        det_inv = np.abs(s) ** (-n)
    else:
        s = None
        det_inv = np.abs(np.linalg.det(Ainv))
    theta = np.asarray(theta_from_rho(rho_star(families or [family], T)))
    fa = FactorArrays(nA, nAi, det_inv, theta, s=s)
    g = params.gamma
    if "c" in need or "psi" in need:
        _require(params, "gamma")
        wpow = np.maximum(nA ** (-g), nAi ** g)
    if "c" in need:
        _require(params, "q")
        qp, qm = params.q.p_plus, params.q.p_minus
        fa.c = wpow * np.maximum(det_inv ** (1.0 / qp), det_inv ** (1.0 / qm))
    if "phi" in need or "phi0" in need:
        _require(params, "alpha")
        a0, ainf = _alpha_ends(params.alpha)
        lams = []
        if "phi" in need:
            _require(params, "lam")
            lams.append(("phi", params.lam))
        if "phi0" in need:
            lams.append(("phi0", 0.0))
        for name, lam in lams:
            val = (np.maximum(nA ** (lam - a0), nA ** (lam - ainf))
                   * np.maximum(_geometric_sum(theta, lam - a0), _geometric_sum(theta, lam - ainf)))
            setattr(fa, name, val)
    if "psi" in need:
        fa.psi = det_inv * np.maximum(nAi ** g, nA ** (-g))
    if "varphi" in need:
        if s is None:
            fa.flags.append("NO_SCALAR_ROTATION")
        else:
            with np.errstate(divide="ignore"):
                fa.varphi = np.maximum(np.log(4 * np.abs(s)), np.log(2 / np.abs(s)))
    if "gap" in need:
        _require(params, "beta")
        d = frobenius_norm(np.eye(n)[None] - A)
        fa.gap = np.ones(len(T)) if params.beta == 0 else d ** params.beta
    if "one_norm" in need:
        _require(params, "q")
        fa.one_norm, fl = _one_norm_theta(family, params, T, x_grid, variant)
        fa.flags += fl
    return fa


@dataclass(frozen=True)
class FactorBundle:
    c: float
    phi: float
    psi: float
    varphi: Optional[float]
    commutator_gap: float
    one_norm_theta: float
    flags: tuple = ()


def structural_factors(family, params, t, grid=None, families=None, variant="theta"):
    """The factor bundle of one family at a single ``t``.

    ``varphi`` is ``None`` (flag ``NO_SCALAR_ROTATION``) for general families.
    Raises ``HypothesisError`` carrying ``t`` when the dilation condition on
    ``q`` fails there.
    """
    T = as_points(t, family.dim)[:1]
    need = [k for k, v in (("c", params.gamma is not None and params.q is not None),
                           ("phi", params.alpha is not None and params.lam is not None),
                           ("psi", params.gamma is not None), ("varphi", True),
                           ("gap", params.beta is not None),
                           ("one_norm", params.q is not None)) if v]
    fa = factor_arrays(family, params, T, families, grid, variant, need)
    get = lambda a: None if a is None else float(a[0])  # noqa: E731
    return FactorBundle(get(fa.c), get(fa.phi), get(fa.psi), get(fa.varphi), get(fa.gap),
                        get(fa.one_norm), tuple(dict.fromkeys(fa.flags)))


def _require(params, name, index=None):
    if getattr(params, name) is None:
        sym = name if index is None else f"{name}_{index}"
        raise ValueError(f"missing parameter {sym!r}")


# ---------------------------------------------------------------- constants

CONSTANT_IDS = ("C1", "C2", "C3", "C4", "C5", "C6", "C7")

_NEEDS = {
    "C1": ("q", "gamma", "beta", "lam", "alpha"),
    "C2": ("q", "gamma", "beta", "alpha"),
    "C3": ("q", "gamma", "beta"),
    "C4": ("q", "gamma", "lam", "alpha", "r"),
    "C5": ("q", "gamma", "alpha", "r"),
    "C6": ("q", "gamma", "lam", "beta"),
    "C7": ("q", "gamma", "lam", "r"),
}


@dataclass(frozen=True, eq=False)
class ConstantProblem:
    """Everything a kernel-integral constant refers to.

    For C6/C7 ``params[i].gamma`` is the ball-weight power ``gamma_i`` and
    ``central_powers[i]`` the Lebesgue-weight power ``alpha_i`` used in ``c``
    and ``psi``.
    """

    kernel: KernelSpec
    families: list
    params: list
    p: Optional[float] = None
    x_grid: object = None
    central_powers: Optional[list] = None


def _tail_status(contrib, present, k_min, k_max):
    """Return (+inf | None, flags) from per-shell contributions."""
    flags = []
    total = np.sum(np.abs(contrib))
    if total == 0:
        return None, flags
    ks = np.nonzero(present)[0]
    for end, nxt, at_edge in ((ks[0], ks[1] if len(ks) > 1 else None, ks[0] == 0),
                              (ks[-1], ks[-2] if len(ks) > 1 else None,
                               ks[-1] == k_max - k_min)):
        share = abs(contrib[end]) / total
        if not at_edge or share < TAIL_RTOL:
            continue
        if nxt is not None and abs(contrib[end]) >= NOT_DECAYING * abs(contrib[nxt]):
            return np.inf, flags
        flags.append(TRUNCATION_SUSPECT)
    return None, flags


def constant_integrand(cid, problem, T):
    """Integrand of ``cid`` at the t-nodes ``T`` (without the quadrature weights)."""
    if cid not in CONSTANT_IDS:
        raise ValueError(f"unknown constant {cid!r}; expected one of {CONSTANT_IDS}")
    kern = problem.kernel
    n = kern.dim
    T = as_points(T, n)
    phi_t = kern(T) / np.linalg.norm(T, axis=1) ** n
    m = len(problem.families)
    for i, pr in enumerate(problem.params, start=1):
        for name in _NEEDS[cid]:
            _require(pr, name, i)
    if cid in ("C2", "C5") and problem.p is None:
        raise ValueError("missing parameter 'p'")
    if cid in ("C6", "C7") and problem.central_powers is None:
        raise ValueError("missing parameter 'alpha_1'")
    on = phi_t != 0
    out = np.zeros(len(T))
    if not on.any():
        return out, []
    Ton = T[on]
    val = phi_t[on].copy()
    flags = []
    variant = "theta1" if cid in ("C6", "C7") else "theta"
    theta = None
    for i, (fam, pr) in enumerate(zip(problem.families, problem.params)):
        if cid in ("C6", "C7"):
            power = problem.central_powers[i]
            pr_c = FactorParams(q=pr.q, gamma=power, beta=pr.beta, r=pr.r, zeta=1.0)
        else:
            pr_c = pr
        need = ["c", "one_norm"]
        if cid in ("C1", "C3", "C2", "C6"):
            need.append("gap")
        if cid in ("C1", "C4"):
            need.append("phi")
        if cid in ("C2", "C5"):
            need.append("phi0")
        if cid in ("C4", "C5", "C7"):
            need += ["psi", "varphi"]
        fa = factor_arrays(fam, pr_c, Ton, problem.families, problem.x_grid, variant, need)
        flags += fa.flags
        theta = fa.theta
        term = fa.c * fa.one_norm
        if fa.gap is not None:
            term = term * fa.gap
        if cid in ("C1", "C4"):
            term = term * fa.phi
        if cid in ("C2", "C5"):
            term = term * fa.phi0
        if cid in ("C4", "C5", "C7"):
            if fa.varphi is None:
                raise ValueError(f"{cid} needs scalar-rotation families (family {i + 1})")
            g = pr_c.gamma
            term = term * (1 + fa.psi ** (1 / pr.r) * np.abs(fa.s) ** ((g + n) / pr.r)
                           + fa.varphi)
        if cid in ("C6", "C7"):
            if pr.q.p_infty is None:
                raise ValueError(f"missing parameter 'q_{i + 1} at infinity'")
            term = term * fa.norm_A ** ((n + pr.gamma) * (1 / pr.q.p_infty + pr.lam))
        val = val * term
    if cid in ("C2", "C5"):
        val = val * (2.0 - theta) ** (m - 1.0 / problem.p)
    out[on] = val
    return out, flags


def theorem_constant(cid, problem, t_grid):
    """Kernel integral ``cid`` over ``t_grid`` clipped to the kernel support.

    Returns ``+inf`` when the innermost or outermost grid shell still carries a
    non-decaying share of the integral.  ``problem`` may be a
    :class:`ConstantProblem` or any object with a ``constant_problem()`` method.
    """
    if hasattr(problem, "constant_problem"):
        problem = problem.constant_problem()
    if problem.kernel.is_zero:
        return FlaggedValue(0.0)
    grid = problem.kernel.adapt(t_grid)
    vals, flags = constant_integrand(cid, problem, grid.points)
    bad = np.nonzero(~np.isfinite(vals))[0]
    if bad.size:
        return FlaggedValue(np.inf, flags + [f"NON_FINITE_AT_t={grid.points[bad[0]].tolist()}"])
    contrib = grid.shell_sums(vals)
    present = np.bincount(grid.shells - grid.k_min, minlength=len(contrib)) > 0
    if not present.any():
        return FlaggedValue(0.0, flags)
    div, tflags = _tail_status(contrib, present, grid.k_min, grid.k_max)
    if div is not None:
        return FlaggedValue(np.inf, flags + ["DIVERGENT_TAIL"])
    return FlaggedValue(float(np.sum(contrib)), flags + tflags)


def default_t_grid(dim=1):
    """t-grid reaching deep toward the origin so integrable singularities are resolved."""
    return make_grid(dim, -60, 12, 48 if dim == 1 else 24, 64 if dim == 2 else 32,
                     "gauss_legendre", tag="t")


__all__ = [
    "frobenius_norm", "det_bounds_check", "MatrixFamily", "make_family", "KernelSpec",
    "make_kernel", "theta_star", "theta_from_rho", "rho_star", "condition_numbers",
    "FactorParams", "FactorBundle", "structural_factors", "factor_arrays", "ConstantProblem",
    "constant_integrand", "theorem_constant", "default_t_grid", "CONSTANT_IDS",
]
