"""Scenario files: JSON with a closed schema.

Every section and every catalog descriptor has a fixed key set; unknown keys
raise :class:`ScenarioError` with the path of the offending field.
"""

import copy
import json
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .exponents import REAL, constant_exponent, make_exponent
from .matrixfam import default_t_grid, make_family, make_kernel
from .norms import SpaceDescriptor
from .operators import OperatorSpec
from .quadrature import PowerWeight, make_function, make_grid
from .verify import THEOREMS, Scenario

SCHEMA_VERSION = 1

TOP_KEYS = {"schema_version", "name", "dimension", "arity", "kernel", "families", "exponents",
            "weights", "symbols", "inputs", "grids", "tolerances", "theorem", "seed",
            "workers", "norm", "apply", "scan", "description"}

FUNCTION_KEYS = {
    "truncated_power": {"a", "R"}, "gaussian": {"scale", "amplitude"}, "bump": {"R"},
    "indicator_annulus": {"r_in", "r_out"}, "constant": {"value"}, "zero": set(),
    "linear": {"component", "coef"}, "sign": {"component"}, "radial_power": {"a"},
    "log_abs": set(),
}
EXPONENT_KEYS = {"constant": {"value"}, "rational_bump": {"a", "b"}, "clamp_log": {"a", "b"}}
FAMILY_KEYS = {
    "scalar": {"coef", "power", "component"}, "identity": set(),
    "diagonal_powers": {"powers"}, "matrix": {"matrix"},
    "rotation_scalar": {"coef", "power", "component", "angle", "angle_rate"},
}
KERNEL_KEYS = {
    "power_annulus": {"sigma", "r_in", "r_out", "positive", "amplitude"},
    "power_cube": {"sigma", "weight", "amplitude"},
    "gaussian_tail": {"sigma", "scale", "amplitude"}, "zero": set(),
}
GRID_KEYS = {"k_min", "k_max", "radial_nodes_per_shell", "angular_nodes", "rule"}
GRIDS_KEYS = {"x", "t", "R_grid", "k0_range"}
EXPONENT_ENTRY_KEYS = {"q", "r", "alpha", "lambda", "p"}
WEIGHT_ENTRY_KEYS = {"gamma"}
SYMBOL_KEYS = {"kind", "beta", "function", "lip_constant"}
THEOREM_KEYS = {"id", "zeta", "p", "gamma", "lambda"}
TOLERANCE_KEYS = {"exact", "closed_form", "oracle", "drift"}
NORM_KEYS = {"space", "function"}
SPACE_KEYS = {
    "lebesgue_vexp": {"q", "gamma"}, "herz": {"alpha", "p", "q", "gamma"},
    "morrey_herz": {"alpha", "lambda", "p", "q", "gamma", "k0_range"},
    "central_morrey": {"q", "lambda", "gamma1", "gamma2"}, "cmo": {"q", "gamma"},
    "lipschitz": {"beta"}, "bmo": {"cubes"},
}
APPLY_KEYS = {"points"}
SCAN_KEYS = {"family", "values"}

DEFAULT_TOLERANCES = {"exact": 1e-12, "closed_form": 1e-6, "oracle": 1e-3, "drift": 0.05}


class ScenarioError(ValueError):
    code = "SCENARIO_INVALID"


def _closed(d, allowed, path):
    if not isinstance(d, dict):
        raise ScenarioError(f"{path}: expected an object, got {type(d).__name__}")
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ScenarioError(f"{path}: unknown key {extra[0]!r} (allowed: {sorted(allowed)})")


def _catalog(d, table, path):
    _closed(d, {"kind"} | set().union(*table.values()) | {"dim"}, path)
    kind = d.get("kind")
    if kind not in table:
        raise ScenarioError(f"{path}.kind: unknown kind {kind!r} (allowed: {sorted(table)})")
    _closed(d, {"kind"} | table[kind], path)


def _number(v, path, allow_inf=False):
    if allow_inf and v in ("inf", "Infinity", float("inf")):
        return float("inf")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{path}: expected a number, got {v!r}")
    return float(v)


def _exponent(v, dim, path, kind="exponent", allow_inf=False):
    if isinstance(v, (int, float, str)) and not isinstance(v, bool):
        x = _number(v, path, allow_inf)
        if np.isinf(x):
            return x
        try:
            return constant_exponent(x, dim, kind)
        except ValueError as exc:
            raise ScenarioError(f"{path}: {exc}") from exc
    _catalog(v, EXPONENT_KEYS, path)
    try:
        return make_exponent(v, dim=dim, kind=kind)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def _function(d, dim, path):
    _catalog(d, FUNCTION_KEYS, path)
    try:
        return make_function(d, dim=dim)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def _grid(d, dim, path, default):
    if d is None:
        return default
    _closed(d, GRID_KEYS, path)
    kw = dict(dim=dim, k_min=-24, k_max=24, radial_nodes_per_shell=32,
              angular_nodes=32, rule="gauss_legendre")
    kw.update(d)
    try:
        return make_grid(**kw, tag=path)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def _space(d, dim, path, k0_range):
    _closed(d, {"kind"} | set().union(*SPACE_KEYS.values()), path)
    kind = d.get("kind")
    if kind not in SPACE_KEYS:
        raise ScenarioError(f"{path}.kind: unknown space {kind!r}")
    _closed(d, {"kind"} | SPACE_KEYS[kind], path)
    P = {}
    for key in ("q",):
        if key in d:
            P["q"] = (_exponent(d["q"], dim, f"{path}.q") if kind != "cmo"
                      else _number(d["q"], f"{path}.q"))
    if "alpha" in d:
        P["alpha"] = _exponent(d["alpha"], dim, f"{path}.alpha", REAL)
    if "lambda" in d:
        P["lam"] = _number(d["lambda"], f"{path}.lambda")
    if "p" in d:
        P["p"] = _number(d["p"], f"{path}.p")
    if "gamma" in d:
        P["omega"] = PowerWeight(_number(d["gamma"], f"{path}.gamma"))
    if "gamma1" in d:
        P["omega1"] = PowerWeight(_number(d["gamma1"], f"{path}.gamma1"))
    if "gamma2" in d:
        P["omega2"] = PowerWeight(_number(d["gamma2"], f"{path}.gamma2"))
    if "beta" in d:
        P["beta"] = _number(d["beta"], f"{path}.beta")
    if "cubes" in d:
        P["cubes"] = [(np.atleast_1d(np.asarray(c["center"], float)), float(c["side"]))
                      for c in d["cubes"]]
    if kind == "morrey_herz":
        P["k0_range"] = tuple(d.get("k0_range", k0_range)) if (d.get("k0_range") or k0_range) else None
    needed = {"lebesgue_vexp": ["q"], "herz": ["alpha", "p", "q"],
              "morrey_herz": ["alpha", "lam", "p", "q"], "central_morrey": ["q", "lam"],
              "cmo": ["q"], "lipschitz": ["beta"], "bmo": ["cubes"]}[kind]
    for k in needed:
        if k not in P:
            raise ScenarioError(f"{path}: missing parameter {k!r} for {kind}")
    try:
        return SpaceDescriptor(kind, P)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


@dataclass(frozen=True, eq=False)
class ScenarioFile:
    """A parsed scenario file; ``scenario`` is set when a theorem is named."""

    raw: dict
    path: str
    dim: int
    x_grid: object
    t_grid: object
    kernel: object = None
    families: Optional[list] = None
    inputs: Optional[list] = None
    symbols: Optional[list] = None
    scenario: Optional[Scenario] = None
    norm_space: Optional[SpaceDescriptor] = None
    norm_function: object = None
    apply_points: Optional[np.ndarray] = None
    scan: Optional[dict] = None
    tolerances: Optional[dict] = None

    @property
    def name(self):
        return self.raw.get("name", Path(self.path).stem)

    def operator_spec(self):
        if self.kernel is None or self.families is None or self.inputs is None:
            raise ScenarioError(f"{self.path}: kernel, families and inputs are required")
        return OperatorSpec(self.kernel, self.families, self.inputs, self.symbols, self.t_grid)


def parse_scenario(raw, path="<scenario>"):
    """Validate a decoded scenario object and materialize it."""
    _closed(raw, TOP_KEYS, path)
    ver = raw.get("schema_version", SCHEMA_VERSION)
    if ver != SCHEMA_VERSION:
        raise ScenarioError(f"{path}.schema_version: unsupported version {ver!r}")
    if "dimension" not in raw:
        raise ScenarioError(f"{path}: missing required key 'dimension'")
    dim = raw["dimension"]
    if dim not in (1, 2, 3):
        raise ScenarioError(f"{path}.dimension: must be 1, 2 or 3, got {dim!r}")
    grids = raw.get("grids", {})
    _closed(grids, GRIDS_KEYS, f"{path}.grids")
    x_grid = _grid(grids.get("x"), dim, "grids.x", None) or make_grid(
        dim, -24, 24, 32, 32, "gauss_legendre", tag="grids.x")
    t_grid = _grid(grids.get("t"), dim, "grids.t", None) or default_t_grid(dim)
    R = grids.get("R_grid")
    if R is None:
        R_grid = None
    elif isinstance(R, dict):
        _closed(R, {"j_min", "j_max"}, f"{path}.grids.R_grid")
        R_grid = np.exp2(np.arange(int(R["j_min"]), int(R["j_max"]) + 1, dtype=float))
    else:
        R_grid = np.asarray([_number(v, f"{path}.grids.R_grid") for v in R])
    k0 = grids.get("k0_range")
    k0_range = tuple(int(v) for v in k0) if k0 is not None else None
    tol = dict(DEFAULT_TOLERANCES)
    if "tolerances" in raw:
        _closed(raw["tolerances"], TOLERANCE_KEYS, f"{path}.tolerances")
        tol.update({k: _number(v, f"{path}.tolerances.{k}") for k, v in raw["tolerances"].items()})

    kw = dict(raw=raw, path=path, dim=dim, x_grid=x_grid, t_grid=t_grid, tolerances=tol)
    m = raw.get("arity")
    if "kernel" in raw:
        _catalog(raw["kernel"], KERNEL_KEYS, f"{path}.kernel")
        kw["kernel"] = make_kernel(raw["kernel"], dim=dim)
    if "families" in raw:
        fams = []
        for j, d in enumerate(raw["families"]):
            _catalog(d, FAMILY_KEYS, f"{path}.families[{j}]")
            try:
                fams.append(make_family(d, dim=dim))
            except (ValueError, KeyError) as exc:
                raise ScenarioError(f"{path}.families[{j}]: {exc}") from exc
        kw["families"] = fams
    if "inputs" in raw:
        kw["inputs"] = [_function(d, dim, f"{path}.inputs[{j}]")
                        for j, d in enumerate(raw["inputs"])]
    symbol_kind, betas = None, []
    if "symbols" in raw:
        syms = []
        for j, d in enumerate(raw["symbols"]):
            sp = f"{path}.symbols[{j}]"
            _closed(d, SYMBOL_KEYS, sp)
            kind = d.get("kind")
            if kind not in ("lip", "cmo"):
                raise ScenarioError(f"{sp}.kind: expected 'lip' or 'cmo', got {kind!r}")
            if symbol_kind not in (None, kind):
                raise ScenarioError(f"{sp}.kind: symbols must all be of one kind")
            symbol_kind = kind
            b = _function(d.get("function", {}), dim, f"{sp}.function")
            beta = _number(d.get("beta", 1.0), f"{sp}.beta")
            if "lip_constant" in d:
                b = replace(b, declared_lip=(beta, _number(d["lip_constant"],
                                                           f"{sp}.lip_constant")))
            syms.append(b)
            betas.append(beta)
        kw["symbols"] = syms
    for sec in ("families", "inputs", "symbols", "exponents", "weights"):
        if m is not None and sec in raw and len(raw[sec]) != m:
            raise ScenarioError(f"{path}.{sec}: expected {m} entries (arity), got {len(raw[sec])}")

    if "norm" in raw:
        _closed(raw["norm"], NORM_KEYS, f"{path}.norm")
        kw["norm_space"] = _space(raw["norm"].get("space", {}), dim, f"{path}.norm.space",
                                  k0_range)
        kw["norm_function"] = _function(raw["norm"].get("function", {}), dim,
                                        f"{path}.norm.function")
    if "apply" in raw:
        _closed(raw["apply"], APPLY_KEYS, f"{path}.apply")
        kw["apply_points"] = np.asarray(raw["apply"].get("points", []), dtype=float)
    if "scan" in raw:
        _closed(raw["scan"], SCAN_KEYS, f"{path}.scan")
        kw["scan"] = dict(raw["scan"])

    if "theorem" in raw:
        kw["scenario"] = _build_scenario(raw, path, dim, kw, symbol_kind, betas, R_grid, k0_range)
    return ScenarioFile(**kw)


def _build_scenario(raw, path, dim, kw, symbol_kind, betas, R_grid, k0_range):
    th = raw["theorem"]
    _closed(th, THEOREM_KEYS, f"{path}.theorem")
    tid = th.get("id")
    if tid not in THEOREMS:
        raise ScenarioError(f"{path}.theorem.id: unknown result {tid!r} (allowed: {THEOREMS})")
    for sec in ("kernel", "families", "inputs", "symbols", "exponents", "weights"):
        if sec not in raw:
            raise ScenarioError(f"{path}: section {sec!r} is required with a theorem")
    m = len(kw["families"])
    q, r, alpha, lam, p, gamma = [], [], [], [], [], []
    for j, e in enumerate(raw["exponents"]):
        ep = f"{path}.exponents[{j}]"
        _closed(e, EXPONENT_ENTRY_KEYS, ep)
        if "q" not in e:
            raise ScenarioError(f"{ep}: missing 'q'")
        q.append(_exponent(e["q"], dim, f"{ep}.q"))
        r.append(_exponent(e.get("r", "inf"), dim, f"{ep}.r", allow_inf=True))
        alpha.append(_exponent(e.get("alpha", 0.0), dim, f"{ep}.alpha", REAL))
        lam.append(_number(e.get("lambda", 0.0), f"{ep}.lambda"))
        p.append(_number(e.get("p", 1.0), f"{ep}.p"))
    for j, w in enumerate(raw["weights"]):
        _closed(w, WEIGHT_ENTRY_KEYS, f"{path}.weights[{j}]")
        gamma.append(_number(w.get("gamma", 0.0), f"{path}.weights[{j}].gamma"))
    if not (len(q) == len(gamma) == len(kw["inputs"]) == len(kw["symbols"]) == m):
        raise ScenarioError(f"{path}: per-family sections disagree on the arity")
    opt = lambda k: None if th.get(k) is None else _number(th[k], f"{path}.theorem.{k}")  # noqa: E731
    return Scenario(
        name=raw.get("name", Path(path).stem), theorem_id=tid, kernel=kw["kernel"],
        families=kw["families"], inputs=kw["inputs"], symbols=kw["symbols"],
        q=q, r=r, alpha=alpha, lam=lam, p=p, gamma=gamma, beta=betas,
        symbol_kind=symbol_kind or "lip", zeta=_number(th.get("zeta", 1.0), f"{path}.theorem.zeta"),
        p_target=opt("p"), gamma_target=opt("gamma"), lam_target=opt("lambda"),
        x_grid=kw["x_grid"], t_grid=kw["t_grid"], R_grid=R_grid, k0_range=k0_range,
        tolerances=kw["tolerances"], seed=int(raw.get("seed", 0)),
        workers=int(raw.get("workers", 1)), descriptor=raw)


def apply_overrides(raw, overrides):
    """Apply ``section.key=value`` overrides (values parsed as JSON)."""
    raw = copy.deepcopy(raw)
    for item in overrides or []:
        if "=" not in item:
            raise ScenarioError(f"override {item!r}: expected KEY=VALUE")
        key, val = item.split("=", 1)
        try:
            value = json.loads(val)
        except json.JSONDecodeError:
            value = val
        node = raw
        parts = key.split(".")
        for part in parts[:-1]:
            node = node[int(part)] if isinstance(node, list) else node.setdefault(part, {})
        last = parts[-1]
        if isinstance(node, list):
            node[int(last)] = value
        else:
            node[last] = value
    return raw


def load_scenario(path, overrides=None):
    """Read and validate a scenario file; JSON errors report line and column."""
    path = str(path)
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_scenario(apply_overrides(raw, overrides), path)


def shipped_scenario_paths(subdir=None):
    """Paths of the scenario files bundled with the package."""
    root = resources.files("hvexp") / "scenarios"
    if subdir:
        root = root / subdir
    return sorted(str(p) for p in root.iterdir() if p.name.endswith(".json"))


def load_shipped(name):
    """Load a bundled scenario by file stem (searching subdirectories too)."""
    root = resources.files("hvexp") / "scenarios"
    for p in [root] + [d for d in root.iterdir() if d.is_dir()]:
        f = p / f"{name}.json"
        if f.is_file():
            return load_scenario(str(f))
    raise FileNotFoundError(f"no shipped scenario named {name!r}")


__all__ = ["SCHEMA_VERSION", "ScenarioError", "ScenarioFile", "parse_scenario",
           "load_scenario", "apply_overrides", "shipped_scenario_paths", "load_shipped"]
