"""Polar-dyadic quadrature on R^n (n <= 3), test functions, power weights, modulars.

Space is cut into the dyadic shells ``C_k = {2**(k-1) < |x| <= 2**k}``.  Each
shell gets a 1-D radial rule (Gauss-Legendre or midpoint) times an angular
rule, so sums over a shell reproduce the shell integral and Herz-type sums are
exact re-aggregations of shell integrals.
"""

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._common import QuadratureError, as_points

RULES = ("gauss_legendre", "midpoint")
TAIL_RTOL = 1e-8


def _radial_rule(n, rule):
    if rule == "gauss_legendre":
        xi, wi = np.polynomial.legendre.leggauss(n)
        return 0.5 * (xi + 1.0), 0.5 * wi
    if rule == "midpoint":
        return (np.arange(n) + 0.5) / n, np.full(n, 1.0 / n)
    raise ValueError(f"unknown rule {rule!r}; expected one of {RULES}")


def _angular_rule(dim, angular_nodes):
    """Directions and weights on the unit sphere.

    dim=2: Gauss-Legendre in the angle on each of the 8 sectors of width pi/4,
    so sector edges (axes and diagonals) are never sampled and integrands that
    are smooth per octant are integrated spectrally.  dim=3: the same azimuth
    rule times Gauss-Legendre in the polar cosine on each hemisphere.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    per = max(1, angular_nodes // 8)
    xi, wi = np.polynomial.legendre.leggauss(per)
    edges = np.arange(8) * (np.pi / 4)
    theta = (edges[:, None] + (xi[None, :] + 1.0) * (np.pi / 8)).ravel()
    w_theta = np.tile(wi * (np.pi / 8), 8)
    if dim == 2:
        return np.column_stack([np.cos(theta), np.sin(theta)]), w_theta
    npol = max(1, angular_nodes // 16)
    yi, vi = np.polynomial.legendre.leggauss(npol)
    mu = np.concatenate([0.5 * (yi - 1.0), 0.5 * (yi + 1.0)])
    w_mu = np.concatenate([0.5 * vi, 0.5 * vi])
    s = np.sqrt(1.0 - mu ** 2)
    dirs = np.stack([
        (s[:, None] * np.cos(theta)[None, :]).ravel(),
        (s[:, None] * np.sin(theta)[None, :]).ravel(),
        np.repeat(mu, len(theta)),
    ], axis=1)
    return dirs, (w_mu[:, None] * w_theta[None, :]).ravel()


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    dim: int
    k_min: int
    k_max: int
    radial_nodes_per_shell: int
    angular_nodes: int
    rule: str
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    radii: np.ndarray = field(repr=False)
    shells: np.ndarray = field(repr=False)
    clipped: bool = False
    tag: str = ""
    edges: Optional[np.ndarray] = field(default=None, repr=False)   # (blocks, 2) radial ends

    @property
    def size(self):
        return len(self.weights)

    @property
    def shell_range(self):
        return range(self.k_min, self.k_max + 1)

    def shell_slices(self):
        """Map shell index -> slice into the node arrays (nodes are shell-major)."""
        ks, starts = np.unique(self.shells, return_index=True)
        ends = list(starts[1:]) + [len(self.shells)]
        return {int(k): slice(int(a), int(b)) for k, a, b in zip(ks, starts, ends)}

    def shell_sums(self, values):
        """Per-shell sums of ``weights * values`` for shells ``k_min..k_max``."""
        idx = self.shells - self.k_min
        return np.bincount(idx, weights=self.weights * values,
                           minlength=self.k_max - self.k_min + 1)

    def fingerprint(self):
        h = hashlib.sha256()
        h.update(repr((self.dim, self.k_min, self.k_max, self.radial_nodes_per_shell,
                       self.angular_nodes, self.rule, self.tag)).encode())
        h.update(np.ascontiguousarray(self.weights).tobytes())
        return h.hexdigest()[:16]

    def as_dict(self):
        return {"dim": self.dim, "k_min": self.k_min, "k_max": self.k_max,
                "radial_nodes_per_shell": self.radial_nodes_per_shell,
                "angular_nodes": self.angular_nodes, "rule": self.rule}


def make_grid(dim=1, k_min=-32, k_max=32, radial_nodes_per_shell=64, angular_nodes=64,
              rule="gauss_legendre", ray_limit=None, inner_limit=None, tag=""):
    """Materialize a polar-dyadic grid.

    ``ray_limit``/``inner_limit`` optionally map an ``(J, dim)`` array of unit
    directions to the outer/inner radius of a star-shaped integration domain;
    shells are clipped to it ray by ray (used for kernels with bounded support).
    """
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    if not k_min < k_max:
        raise ValueError(f"need k_min < k_max, got [{k_min}, {k_max}]")
    if radial_nodes_per_shell < 2:
        raise ValueError("radial_nodes_per_shell must be >= 2")
    if angular_nodes < 1:
        raise ValueError("angular_nodes must be >= 1")
    xi, wi = _radial_rule(radial_nodes_per_shell, rule)
    dirs, wdir = _angular_rule(dim, angular_nodes)
    ks = np.arange(k_min, k_max + 1)
    a = np.ldexp(1.0, ks - 1)[None, :]
    b = np.ldexp(1.0, ks)[None, :]
    J = len(dirs)
    lo = np.zeros((J, 1)) if inner_limit is None else np.asarray(inner_limit(dirs), float).reshape(J, 1)
    hi = np.full((J, 1), np.inf) if ray_limit is None else np.asarray(ray_limit(dirs), float).reshape(J, 1)
    a = np.maximum(a, lo)
    b = np.minimum(b, hi)
    valid = b > a                                           # (J, K)
    # shell-major ordering: k, then direction, then radial node
    kk, jj = np.nonzero(valid.T)
    aa = a[jj, kk][:, None]
    bb = b[jj, kk][:, None]
    r = aa + (bb - aa) * xi[None, :]
    w = (bb - aa) * wi[None, :] * r ** (dim - 1) * wdir[jj][:, None]
    pts = r[:, :, None] * dirs[jj][:, None, :]
    shells = np.repeat(ks[kk], radial_nodes_per_shell)
    clipped = ray_limit is not None or inner_limit is not None
    return QuadratureGrid(dim=dim, k_min=k_min, k_max=k_max,
                          radial_nodes_per_shell=radial_nodes_per_shell,
                          angular_nodes=angular_nodes, rule=rule,
                          points=pts.reshape(-1, dim), weights=w.ravel(),
                          radii=r.ravel(), shells=shells, clipped=clipped, tag=tag,
                          edges=np.hstack([aa, bb]))


def default_grid(dim=1):
    return make_grid(dim, -32, 32, 64, 64 if dim == 2 else 32, "gauss_legendre")


def annulus_measure(dim, k_min, k_max):
    """Lebesgue measure of ``{2**(k_min-1) < |x| <= 2**k_max}``."""
    surf = {1: 2.0, 2: 2 * np.pi, 3: 4 * np.pi}[dim]
    return surf / dim * (2.0 ** (dim * k_max) - 2.0 ** (dim * (k_min - 1)))


def sphere_area(dim):
    return {1: 2.0, 2: 2 * np.pi, 3: 4 * np.pi}[dim]


# ---------------------------------------------------------------- test functions

@dataclass(frozen=True, eq=False)
class TestFunction:
    """An evaluable real function on R^n with metadata.

    ``declared_lip`` is ``(beta, constant)``; ``beta=None`` means the constant
    holds for every order (only sensible for constant 0).
    """

    __test__ = False

    dim: int
    func: Callable[[np.ndarray], np.ndarray]
    support_radius: float = np.inf
    radial: bool = False
    oracle_norms: dict = field(default_factory=dict)
    declared_lip: Optional[tuple] = None
    label: str = ""
    is_constant: bool = False
    jumps: tuple = ()              # radii where a radial function is discontinuous

    def __call__(self, x):
        pts = as_points(x, self.dim)
        out = np.asarray(self.func(pts), dtype=float)
        return np.broadcast_to(out, (len(pts),)).copy()

    def scaled(self, c):
        c = float(c)
        lip = None if self.declared_lip is None else (self.declared_lip[0], abs(c) * self.declared_lip[1])
        return TestFunction(self.dim, lambda x, f=self.func: c * f(x), self.support_radius,
                            self.radial, {k: abs(c) * v for k, v in self.oracle_norms.items()},
                            lip, f"{c:g}*{self.label}", self.is_constant, self.jumps)

    def shifted(self, c):
        c = float(c)
        return TestFunction(self.dim, lambda x, f=self.func: f(x) + c, np.inf, self.radial,
                            {}, self.declared_lip, f"{self.label}+{c:g}", self.is_constant,
                            self.jumps)

    def dilated(self, s):
        """``x -> f(s x)``."""
        s = float(s)
        lip = None
        if self.declared_lip is not None:
            beta, const = self.declared_lip
            lip = (beta, const * (abs(s) ** beta if beta is not None else 1.0))
        return TestFunction(self.dim, lambda x, f=self.func: f(s * x),
                            self.support_radius / abs(s), self.radial, {}, lip,
                            f"{self.label}(x*{s:g})", self.is_constant,
                            tuple(r / abs(s) for r in self.jumps))

    def composed(self, A):
        """``x -> f(A x)`` for a fixed matrix ``A``."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        return TestFunction(self.dim, lambda x, f=self.func: f(x @ A.T), np.inf, False,
                            label=f"{self.label}(A.)", is_constant=self.is_constant)

    def __add__(self, other):
        if not isinstance(other, TestFunction):
            return NotImplemented
        return TestFunction(self.dim, lambda x, f=self.func, g=other.func: f(x) + g(x),
                            max(self.support_radius, other.support_radius),
                            self.radial and other.radial,
                            label=f"{self.label}+{other.label}",
                            is_constant=self.is_constant and other.is_constant,
                            jumps=tuple(sorted(set(self.jumps) | set(other.jumps))))


def _norm(x):
    return np.linalg.norm(x, axis=1)


def make_function(spec=None, dim=1, **params):
    """Build a catalog test function.

    Catalog (``kind``): ``truncated_power`` (``|x|**a`` on ``|x| <= R``),
    ``gaussian`` (``amplitude * exp(-|x|**2 / scale**2)``), ``bump``
    (``exp(1 - 1/(1-|x|**2/R**2))`` on ``|x| < R``), ``indicator_annulus``
    (``r_in < |x| <= r_out``), ``constant``, ``zero``, ``linear``
    (``coef * x[component]``), ``sign`` (sign of ``x[component]``),
    ``radial_power`` (``|x|**a`` everywhere), ``log_abs`` (``log|x|``).
    """
    desc = {"kind": spec} if isinstance(spec, str) else dict(spec or {})
    desc.update(params)
    kind = desc.pop("kind")
    dim = int(desc.pop("dim", dim))
    scale = float(desc.pop("amplitude_scale", 1.0))
    out = _catalog(kind, dim, desc)
    return out if scale == 1.0 else out.scaled(scale)


def _catalog(kind, dim, p):
    if kind == "truncated_power":
        a, R = float(p.get("a", 0.0)), float(p.get("R", 1.0))

        def f(x):
            r = _norm(x)
            with np.errstate(divide="ignore"):
                return np.where(r <= R, r ** a, 0.0)
        jump = (R,) if R ** a != 0 else ()
        return TestFunction(dim, f, R, True, label=f"trunc_pow(a={a:g},R={R:g})", jumps=jump)
    if kind == "gaussian":
        s, amp = float(p.get("scale", 1.0)), float(p.get("amplitude", 1.0))
        return TestFunction(dim, lambda x: amp * np.exp(-(_norm(x) / s) ** 2), np.inf, True,
                            label=f"gaussian(s={s:g})")
    if kind == "bump":
        R = float(p.get("R", 1.0))

        def f(x):
            u = (_norm(x) / R) ** 2
            with np.errstate(divide="ignore", over="ignore"):
                return np.where(u < 1, np.exp(1.0 - 1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
        return TestFunction(dim, f, R, True, label=f"bump(R={R:g})")
    if kind == "indicator_annulus":
        r_in, r_out = float(p.get("r_in", 0.0)), float(p.get("r_out", 1.0))

        def f(x):
            r = _norm(x)
            return ((r > r_in) & (r <= r_out)).astype(float)
        return TestFunction(dim, f, r_out, True, label=f"chi({r_in:g}<|x|<={r_out:g})",
                            jumps=tuple(r for r in (r_in, r_out) if r > 0))
    if kind == "constant":
        c = float(p.get("value", 1.0))
        return TestFunction(dim, lambda x: np.full(len(x), c), np.inf if c else 0.0, True,
                            declared_lip=(None, 0.0), label=f"const({c:g})", is_constant=True)
    if kind == "zero":
        return TestFunction(dim, lambda x: np.zeros(len(x)), 0.0, True,
                            declared_lip=(None, 0.0), label="zero", is_constant=True)
    if kind == "linear":
        i, c = int(p.get("component", 0)), float(p.get("coef", 1.0))
        return TestFunction(dim, lambda x: c * x[:, i], np.inf, False,
                            declared_lip=(1.0, abs(c)), label=f"{c:g}*x{i}")
    if kind == "sign":
        i = int(p.get("component", 0))
        return TestFunction(dim, lambda x: np.sign(x[:, i]), np.inf, False, label=f"sign(x{i})")
    if kind == "radial_power":
        a = float(p.get("a", 1.0))
        lip = (a, 1.0) if 0 < a <= 1 else None

        def f(x):
            with np.errstate(divide="ignore"):
                return _norm(x) ** a
        return TestFunction(dim, f, np.inf, True, declared_lip=lip, label=f"|x|^{a:g}")
    if kind == "log_abs":
        def f(x):
            with np.errstate(divide="ignore"):
                return np.log(_norm(x))
        return TestFunction(dim, f, np.inf, True, label="log|x|")
    raise ValueError(f"unknown test function kind {kind!r}")


# ---------------------------------------------------------------- power weights

@dataclass(frozen=True, eq=False)
class PowerWeight:
    """``|x|**gamma`` with ``gamma`` a number or a real-class exponent function."""

    gamma: object = 0.0

    @property
    def is_constant(self):
        return not hasattr(self.gamma, "p_minus") or self.gamma.is_constant

    @property
    def power(self):
        """The constant power (raises for a genuinely variable power)."""
        if hasattr(self.gamma, "p_minus"):
            if not self.gamma.is_constant:
                raise ValueError("variable power weight has no single power")
            return float(self.gamma.constant)
        return float(self.gamma)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        r = _norm(x)
        if self.is_constant:
            g = self.power
            if g == 0.0:
                return np.ones(len(r))
            with np.errstate(divide="ignore"):
                return r ** g
        with np.errstate(divide="ignore"):
            return r ** self.gamma(x)

    def ball_mass(self, R, dim):
        """``int_{|x|<=R} |x|**gamma dx`` for a constant power ``gamma > -dim``."""
        g = self.power
        if g <= -dim:
            raise ValueError(f"ball weight diverges for gamma={g} <= -{dim}")
        return sphere_area(dim) * np.asarray(R, dtype=float) ** (g + dim) / (g + dim)

    def __repr__(self):
        return f"PowerWeight({getattr(self.gamma, 'label', self.gamma)})"


UNIT_WEIGHT = PowerWeight(0.0)


# ---------------------------------------------------------------- integrals

def _values(f, grid):
    vals = np.asarray(f(grid.points), dtype=float)
    bad = np.nonzero(~np.isfinite(vals))[0]
    if bad.size:
        i = bad[0]
        raise QuadratureError(f"non-finite integrand {vals[i]} at node {grid.points[i].tolist()}")
    return vals


def integrate(f, grid):
    """Quadrature of ``f`` over the annulus covered by ``grid``."""
    if getattr(f, "dim", grid.dim) != grid.dim:
        raise ValueError(f"function dim {f.dim} != grid dim {grid.dim}")
    return float(np.sum(grid.weights * _values(f, grid)))


def modular_from_values(g, pv, w, eta):
    """``sum w (g/eta)**p`` plus the sup-norm term where ``p = inf``.

    ``g`` must be non-negative.  Overflow yields ``+inf``.
    """
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        u = g / eta
        fin = np.isfinite(pv)
        if fin.all():
            terms = np.where(g == 0.0, 0.0, u ** pv)
            total = np.sum(w * terms)
        else:
            terms = np.where(g[fin] == 0.0, 0.0, u[fin] ** pv[fin])
            total = np.sum(w[fin] * terms) + (np.max(u[~fin]) if (~fin).any() else 0.0)
    return float(total) if np.isfinite(total) else np.inf


def modular(f, p, omega, eta, grid):
    """``F_p(f omega / eta)`` over the grid, with the sup term on ``{p = inf}``."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    omega = omega or UNIT_WEIGHT
    g = np.abs(_values(f, grid)) * omega(grid.points)
    return modular_from_values(g, p(grid.points), grid.weights, float(eta))
