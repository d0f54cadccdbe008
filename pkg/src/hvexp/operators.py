"""Pointwise evaluation of multilinear Hausdorff operators and their commutators.

``H f(x) = int Phi(t)/|t|^n prod f_i(A_i(t) x) prod (b_i(x) - b_i(A_i(t) x)) dt``

The t-integral runs on the kernel-clipped polar-dyadic grid.  The Hardy and
Hardy-Cesaro special forms are evaluated separately by tensor quadrature on
the unit cube so the two discretizations can check each other.
"""

import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from ._common import NormInfiniteError, QuadratureError, as_points
from .matrixfam import (KernelSpec, _weight_map, default_t_grid, frobenius_norm,
                        make_family, make_kernel)
from .quadrature import TAIL_RTOL, TestFunction, _radial_rule

CHUNK_ELEMENTS = 1 << 21
NOT_DECAYING = 0.999


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """Kernel, matrix families, inputs ``f_i`` and optional symbols ``b_i``."""

    kernel: KernelSpec
    families: list
    inputs: list
    symbols: Optional[list] = None
    t_grid: object = None

    def __post_init__(self):
        m = len(self.families)
        if m == 0 or len(self.inputs) != m:
            raise ValueError(f"need m >= 1 families and m inputs, got {m} and {len(self.inputs)}")
        if self.symbols is not None and len(self.symbols) != m:
            raise ValueError(f"symbols present but {len(self.symbols)} != m = {m}")
        dims = {self.kernel.dim} | {f.dim for f in self.families} | {f.dim for f in self.inputs}
        dims |= {b.dim for b in self.symbols or []}
        if len(dims) != 1:
            raise ValueError(f"inconsistent dimensions {sorted(dims)}")

    @property
    def dim(self):
        return self.kernel.dim

    @property
    def arity(self):
        return len(self.families)

    def replace(self, **changes):
        kw = dict(kernel=self.kernel, families=self.families, inputs=self.inputs,
                  symbols=self.symbols, t_grid=self.t_grid)
        kw.update(changes)
        return OperatorSpec(**kw)

    @cached_property
    def _grid(self):
        return self.kernel.adapt(self.t_grid or default_t_grid(self.dim))

    @cached_property
    def _nodes(self):
        """Active t-nodes, weights ``w Phi/|t|^n``, matrices and shell layout."""
        grid = self._grid
        T = grid.points
        w = grid.weights * self.kernel(T) / np.linalg.norm(T, axis=1) ** self.dim
        on = w != 0
        mats = [fam(T[on]) for fam in self.families]
        for fam in self.families:
            fam.inverse(T[on])                       # invertibility on the support
        shells = grid.shells[on] - grid.k_min
        K = grid.k_max - grid.k_min + 1
        return T[on], w[on], mats, shells, K


def _tail_check(contrib, present, K):
    """Raise on a non-decaying edge shell; return flags for a suspect one."""
    flags = []
    ks = np.nonzero(present)[0]
    if len(ks) == 0:
        return flags
    total = np.sum(np.abs(contrib), axis=1)
    for end, nxt, at_edge in ((ks[0], ks[1] if len(ks) > 1 else None, ks[0] == 0),
                              (ks[-1], ks[-2] if len(ks) > 1 else None, ks[-1] == K - 1)):
        if not at_edge:
            continue
        edge = np.abs(contrib[:, end])
        big = (edge > 0) & (edge >= TAIL_RTOL * total)
        if not big.any():
            continue
        if nxt is not None:
            stuck = big & (edge >= NOT_DECAYING * np.abs(contrib[:, nxt]))
            if stuck.any():
                raise NormInfiniteError(
                    "t-integral does not decay at the edge of the t-grid "
                    f"(x index {int(np.nonzero(stuck)[0][0])})")
        flags.append("TRUNCATION_SUSPECT")
    return flags


def apply(spec, x, return_flags=False):
    """Operator values at the points ``x`` (one value per point).

    Exactly 0 for a zero kernel, or when any symbol is constant.  Raises
    ``QuadratureError`` naming ``t`` when the integrand is not finite, and
    ``NormInfiniteError`` when the t-integral diverges at the grid's edge.
    """
    n = spec.dim
    X = as_points(x, n)
    out = np.zeros(len(X))
    if spec.kernel.is_zero or any(getattr(b, "is_constant", False) for b in spec.symbols or []):
        return (out, []) if return_flags else out
    T, w, mats, shells, K = spec._nodes
    if len(T) == 0:
        return (out, []) if return_flags else out
    present = np.bincount(shells, minlength=K) > 0
    contrib = np.zeros((len(X), K))
    step = max(1, CHUNK_ELEMENTS // max(1, len(T)))
    for lo in range(0, len(X), step):
        Xc = X[lo:lo + step]
        integrand = np.broadcast_to(w, (len(Xc), len(T))).copy()
        for i, A in enumerate(mats):
            Y = np.einsum("tij,xj->xti", A, Xc).reshape(-1, n)
            integrand *= spec.inputs[i](Y).reshape(len(Xc), len(T))
            if spec.symbols is not None:
                b = spec.symbols[i]
                integrand *= b(Xc)[:, None] - b(Y).reshape(len(Xc), len(T))
        bad = ~np.isfinite(integrand)
        if bad.any():
            xi, ti = np.argwhere(bad)[0]
            raise QuadratureError(f"non-finite integrand at t={T[ti].tolist()} "
                                  f"(x={Xc[xi].tolist()})")
        for k in np.nonzero(present)[0]:
            contrib[lo:lo + len(Xc), k] = integrand[:, shells == k].sum(axis=1)
    _split_jumps(spec, X, contrib)
    out = contrib.sum(axis=1)
    flags = _tail_check(contrib, present, K)
    return (out, flags) if return_flags else out


def _integrand(spec, X, T, w):
    """``w * prod f_i(A_i(t) x) * prod gaps`` for paired rows of ``X`` and ``T``."""
    vals = w.copy()
    for i, fam in enumerate(spec.families):
        Y = np.einsum("tij,tj->ti", fam(T), X)
        vals *= spec.inputs[i](Y)
        if spec.symbols is not None:
            b = spec.symbols[i]
            vals *= b(X) - b(Y)
    return vals


def _split_jumps(spec, X, contrib):
    """Re-integrate the shells where a discontinuous input jumps (dim 1).

    For ``f_i`` jumping at ``|y| = R`` the integrand jumps where
    ``|A_i(t) x| = R``.  A fixed rule on a shell containing such a ``t`` is only
    first-order accurate, so those shells are split at the jump (located by
    bisection) and each piece gets the shell's own rule.
    """
    jumps = [tuple(getattr(f, "jumps", ()) or ()) for f in spec.inputs]
    grid = spec._grid
    if spec.dim != 1 or not any(jumps) or grid.edges is None or len(X) == 0:
        return
    N = grid.radial_nodes_per_shell
    xi, wi = _radial_rule(N, grid.rule)
    sgn = np.sign(grid.points[::N, 0])
    shell = grid.shells[::N] - grid.k_min
    ends = grid.edges
    # signed t along each block: left end, nodes, right end
    tb = sgn[:, None] * np.hstack([ends[:, :1], grid.radii.reshape(-1, N), ends[:, 1:]])
    roots = {}
    for fam, radii in zip(spec.families, jumps):
        if not radii:
            continue
        a = fam(tb.reshape(-1, 1))[:, 0, 0].reshape(tb.shape)
        for R in radii:
            for lo in range(0, len(X), 512):
                x = X[lo:lo + 512, 0]
                h = np.sign(np.abs(a[None] * x[:, None, None]) - R)
                xs, ms, js = np.nonzero(h[..., :-1] * h[..., 1:] < 0)
                if len(xs) == 0:
                    continue
                t0, t1 = tb[ms, js], tb[ms, js + 1]
                xv = x[xs]
                side0 = np.abs(fam(t0[:, None])[:, 0, 0] * xv) - R
                for _ in range(60):
                    mid = 0.5 * (t0 + t1)
                    hm = np.abs(fam(mid[:, None])[:, 0, 0] * xv) - R
                    same = np.sign(hm) == np.sign(side0)
                    t0, t1 = np.where(same, mid, t0), np.where(same, t1, mid)
                for xk, m, t in zip(xs + lo, ms, 0.5 * (t0 + t1)):
                    roots.setdefault((int(xk), int(m)), []).append(abs(float(t)))
    if not roots:
        return
    keys = list(roots)
    # pieces: one row per sub-interval, tagged with its (x, block) key
    own, lo_r, hi_r = [], [], []
    for j, (xk, m) in enumerate(keys):
        cuts = np.concatenate([[ends[m, 0]], np.sort(roots[(xk, m)]), [ends[m, 1]]])
        own += [j] * (len(cuts) - 1)
        lo_r += list(cuts[:-1])
        hi_r += list(cuts[1:])
    own, lo_r, hi_r = np.array(own), np.array(lo_r), np.array(hi_r)
    xk = np.array([k[0] for k in keys])
    m = np.array([k[1] for k in keys])
    r = lo_r[:, None] + (hi_r - lo_r)[:, None] * xi[None, :]
    T = (sgn[m[own]][:, None] * r).reshape(-1, 1)
    w = ((hi_r - lo_r)[:, None] * wi[None, :]).ravel()
    w = w * spec.kernel(T) / np.abs(T[:, 0])
    new = _integrand(spec, np.repeat(X[xk[own]], N, axis=0), T, w).reshape(-1, N).sum(axis=1)
    new = np.bincount(own, weights=new, minlength=len(keys))
    # the block's fixed-rule value, recomputed the same way
    idx = (m[:, None] * N + np.arange(N)[None, :]).ravel()
    T_old = grid.points[idx]
    w_old = grid.weights[idx] * spec.kernel(T_old) / np.abs(T_old[:, 0])
    old = _integrand(spec, np.repeat(X[xk], N, axis=0), T_old, w_old).reshape(-1, N).sum(axis=1)
    np.add.at(contrib, (xk, shell[m]), new - old)


def _support_radius(spec):
    """Conservative radius outside which the operator output vanishes."""
    radii = [f.support_radius for f in spec.inputs]
    if not np.all(np.isfinite(radii)):
        return np.inf
    T, _, _, _, _ = spec._nodes
    if len(T) == 0:
        return 0.0
    inv_norm = max(float(np.max(frobenius_norm(f.inverse(T)))) for f in spec.families)
    return inv_norm * max(radii)


class _Memo:
    """Thread-safe point -> value cache; each point is computed at most once."""

    def __init__(self, fn, dim):
        self.fn = fn
        self.dim = dim
        self.cache = {}
        self.lock = threading.Lock()

    def __call__(self, X):
        X = np.ascontiguousarray(as_points(X, self.dim))
        keys = [row.tobytes() for row in X]
        with self.lock:
            todo = [i for i, k in enumerate(keys) if k not in self.cache]
            if todo:
                uniq = dict.fromkeys(keys[i] for i in todo)
                idx = [keys.index(k) for k in uniq]
                vals = self.fn(X[idx])
                self.cache.update(zip(uniq, vals))
            return np.array([self.cache[k] for k in keys])


def operator_function(spec):
    """The operator output as a memoized :class:`TestFunction`."""
    memo = _Memo(lambda X: apply(spec, X), spec.dim)
    return TestFunction(spec.dim, memo, _support_radius(spec), False,
                        label="H(f)" if spec.symbols is None else "H^b(f)")


# ---------------------------------------------------------------- special forms

def cube_rule(dim, nodes=12, depth=30):
    """Tensor composite Gauss-Legendre on ``(0,1]^dim`` with dyadic panels
    ``[2**(-j-1), 2**(-j)]``, ``j < depth``, graded toward the origin."""
    xi, wi = np.polynomial.legendre.leggauss(nodes)
    a = np.exp2(-np.arange(1, depth + 1, dtype=float))
    b = 2 * a
    t = (a[:, None] + (b - a)[:, None] * 0.5 * (xi[None, :] + 1)).ravel()
    wt = ((b - a)[:, None] * 0.5 * wi[None, :]).ravel()
    mesh = np.meshgrid(*([t] * dim), indexing="ij")
    wmesh = np.meshgrid(*([wt] * dim), indexing="ij")
    T = np.stack([g.ravel() for g in mesh], axis=1)
    W = np.prod(np.stack([g.ravel() for g in wmesh], axis=1), axis=1)
    return T, W


HARDY_KINDS = ("hardy_14", "hardy_cesaro_15")


@dataclass(frozen=True, eq=False)
class HardySpec:
    """Weighted multilinear Hardy form (``kind="hardy_14"``: ``A_i(t) = t_i I``, ``m = n``)
    or Hardy-Cesaro form (``"hardy_cesaro_15"``: ``A_i(t) = s_i(t) I``).

    ``weight`` is the cube weight (omega resp. psi) in the kernel-weight
    format; ``scales`` are ``scalar`` family descriptors for ``s_i``.
    """

    kind: str
    dim: int
    inputs: list
    symbols: Optional[list] = None
    weight: object = None
    scales: Optional[list] = None
    nodes: int = 12
    depth: int = 30
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in HARDY_KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {HARDY_KINDS}")
        m = len(self.inputs)
        if self.kind == "hardy_14" and m != self.dim:
            raise ValueError(f"hardy_14 needs m = n, got m={m}, n={self.dim}")
        if self.kind == "hardy_cesaro_15" and (self.scales is None or len(self.scales) != m):
            raise ValueError("hardy_cesaro_15 needs one scale s_i per input")

    def family_specs(self):
        if self.kind == "hardy_14":
            return [{"kind": "scalar", "component": i} for i in range(self.dim)]
        return [dict(s, kind="scalar") for s in self.scales]

    def general_form(self, t_grid=None):
        """The same operator as a general Hausdorff commutator:
        ``Phi(t) = |t|^n weight(t) chi_cube(t)`` and scalar families."""
        kernel = make_kernel({"kind": "power_cube", "sigma": self.dim, "weight": self.weight},
                             dim=self.dim)
        fams = [make_family(s, dim=self.dim) for s in self.family_specs()]
        return OperatorSpec(kernel, fams, list(self.inputs), self.symbols, t_grid)


def special_apply(kind, params, x):
    """Direct unit-cube quadrature of the Hardy (``hardy_14``) or Hardy-Cesaro
    (``hardy_cesaro_15``) form.  ``params`` is a :class:`HardySpec` or a dict of
    its fields."""
    spec = params if isinstance(params, HardySpec) else HardySpec(kind=kind, **params)
    if spec.kind != kind:
        raise ValueError(f"kind mismatch: {kind!r} vs {spec.kind!r}")
    n = spec.dim
    X = as_points(x, n)
    T, W = cube_rule(n, spec.nodes, spec.depth)
    W = W * _weight_map(n, spec.weight)(T)
    out = np.zeros(len(X))
    if not np.any(W):
        return out
    scales = [make_family(s, dim=n).scale for s in spec.family_specs()]
    S = [sc(T) for sc in scales]
    step = max(1, CHUNK_ELEMENTS // len(T))
    for lo in range(0, len(X), step):
        Xc = X[lo:lo + step]
        integrand = np.broadcast_to(W, (len(Xc), len(T))).copy()
        for i, s in enumerate(S):
            Y = (s[None, :, None] * Xc[:, None, :]).reshape(-1, n)
            integrand *= spec.inputs[i](Y).reshape(len(Xc), len(T))
            if spec.symbols is not None:
                b = spec.symbols[i]
                integrand *= b(Xc)[:, None] - b(Y).reshape(len(Xc), len(T))
        bad = ~np.isfinite(integrand)
        if bad.any():
            xi, ti = np.argwhere(bad)[0]
            raise QuadratureError(f"non-finite integrand at t={T[ti].tolist()}")
        out[lo:lo + len(Xc)] = integrand.sum(axis=1)
    return out


def reduction_check(spec, x_samples, t_grid=None):
    """``max |apply(general form) - special_apply|`` over the sample points."""
    X = as_points(x_samples, spec.dim)
    general = apply(spec.general_form(t_grid), X)
    direct = special_apply(spec.kind, spec, X)
    return float(np.max(np.abs(general - direct))) if len(X) else 0.0


__all__ = ["OperatorSpec", "apply", "operator_function", "HardySpec", "special_apply",
           "reduction_check", "cube_rule"]
