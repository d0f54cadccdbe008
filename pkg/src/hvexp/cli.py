"""Batch front end: ``hvexp COMMAND [TARGET] --scenario PATH``.

Commands: ``norm``, ``apply``, ``constant``, ``verify``, ``scan``, ``suite``.
The exit status is 0 exactly when every exact invariant in the report passed;
approximate quantities (ratios, constants, drifts) are reported only.
Input errors exit with status 2.
"""

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from ._common import HvexpError, flags_of, sample_points
from .invariants import global_invariants, scenario_invariants
from .matrixfam import CONSTANT_IDS, theorem_constant
from .operators import apply
from .scenario import SCHEMA_VERSION, ScenarioError, load_scenario, shipped_scenario_paths
from .verify import SCAN_FAMILIES, ratio_scan, verify_theorem

COMMANDS = ("norm", "apply", "constant", "verify", "scan", "suite")


def _clean(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def _load(path, overrides, seed, workers):
    sf = load_scenario(path, overrides)
    sc = sf.scenario
    if sc is not None:
        changes = {}
        if seed is not None:
            changes["seed"] = seed
        if workers is not None:
            changes["workers"] = workers
        if changes:
            sc = sc.with_changes(**changes)
    return sf, sc


def _need_theorem(sf, sc):
    if sc is None:
        raise ScenarioError(f"{sf.path}: this command needs a 'theorem' section")
    return sc


def cmd_norm(sf, sc, args):
    if sf.norm_space is None:
        raise ScenarioError(f"{sf.path}: 'norm' needs a 'norm' section")
    v = sf.norm_space.norm(sf.norm_function, sf.x_grid)
    return {"space": sf.norm_space.kind, "function": sf.norm_function.label,
            "value": float(v), "flags": list(flags_of(v))}, []


def cmd_apply(sf, sc, args):
    spec = sc.operator_spec() if sc is not None else sf.operator_spec()
    X = sf.apply_points if sf.apply_points is not None else sample_points(spec.dim, -4, 4, 1)
    X = np.asarray(X, dtype=float).reshape(-1, spec.dim)
    vals, flags = apply(spec, X, return_flags=True)
    return {"points": X, "values": vals, "flags": flags}, []


def cmd_constant(sf, sc, args):
    sc = _need_theorem(sf, sc)
    cid = args.target or sc.constant_id
    if cid not in CONSTANT_IDS:
        raise ScenarioError(f"unknown constant {cid!r}; expected one of {CONSTANT_IDS}")
    C = theorem_constant(cid, sc, sc.t_grid)
    return {"constant_id": cid, "value": float(C), "flags": list(flags_of(C))}, []


def _invariants(sc, workers):
    out = [r.as_dict() for r in scenario_invariants(sc, workers=workers)]
    return out


def cmd_verify(sf, sc, args):
    sc = _need_theorem(sf, sc)
    rep = verify_theorem(sc)
    exact = [{"name": f"hypothesis:{h.name}", "passed": h.passed, "detail": h.detail}
             for h in rep.hypotheses]
    if rep.hypotheses_pass:
        exact += _invariants(sc, sc.workers)
    return {"verification": rep.as_dict(timings=not args.no_timings)}, exact


def cmd_scan(sf, sc, args):
    sc = _need_theorem(sf, sc)
    scan = sf.scan or {}
    family = args.target or scan.get("family", "dilation")
    if family not in SCAN_FAMILIES:
        raise ScenarioError(f"unknown scan family {family!r}; expected one of {SCAN_FAMILIES}")
    res = ratio_scan(sc, family, scan.get("values") if family == scan.get("family") else None,
                     workers=sc.workers)
    return {"scan": res.as_dict()}, []


def cmd_suite(args):
    paths = args.scenario or shipped_scenario_paths()
    seed = 0 if args.seed is None else args.seed
    workers = args.workers or 1
    scenarios, exact = [], []
    for p in paths:
        sf, sc = _load(p, args.override, seed, workers)
        if sc is None:
            continue
        rep = verify_theorem(sc)
        inv = _invariants(sc, workers) if rep.hypotheses_pass else []
        hyp_ok = rep.hypotheses_pass
        exact.append({"name": f"{sc.name}:hypotheses", "passed": hyp_ok, "detail": ""})
        exact += [dict(r, name=f"{sc.name}:{r['name']}") for r in inv]
        scenarios.append({"scenario": sc.name, "verification": rep.as_dict(timings=False),
                          "invariants": inv})
    exact += [r.as_dict() for r in global_invariants(seed)]
    return {"scenarios": scenarios, "seed": seed}, exact


HANDLERS = {"norm": cmd_norm, "apply": cmd_apply, "constant": cmd_constant,
            "verify": cmd_verify, "scan": cmd_scan}


def build_parser():
    ap = argparse.ArgumentParser(prog="hvexp", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", nargs="?", choices=COMMANDS, help="command to run")
    ap.add_argument("target", nargs="?", help="constant id for 'constant', family for 'scan'")
    ap.add_argument("--command", dest="command_flag", choices=COMMANDS)
    ap.add_argument("--id", dest="target_flag", help="same as TARGET")
    ap.add_argument("--scenario", action="append", help="scenario JSON file (repeat for suite)")
    ap.add_argument("--override", action="append", default=[], metavar="KEY=JSON",
                    help="override a scenario field, e.g. grids.x.k_min=-16")
    ap.add_argument("--out", type=Path, help="write the report here instead of stdout")
    ap.add_argument("--format", choices=("json", "plain"), default="json")
    ap.add_argument("--workers", type=int, help="worker threads for scans (1 = reference)")
    ap.add_argument("--seed", type=int, help="seed for randomized checks")
    ap.add_argument("--no-timings", action="store_true", help="omit timings from verify reports")
    return ap


def _plain(d, prefix=""):
    lines = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            lines += _plain(v, key + ".")
        elif isinstance(v, list) and v and all(isinstance(x, dict) for x in v):
            for i, x in enumerate(v):
                lines += _plain(x, f"{key}[{i}].")
        else:
            lines.append(f"{key}: {v}")
    return lines


def render(report, fmt):
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    return "\n".join(_plain(report)) + "\n"


def run(args):
    """Execute one command; returns ``(exit_status, report)``."""
    command = args.command or args.command_flag
    if command is None:
        raise ScenarioError("no command given")
    args.target = args.target or args.target_flag
    t0 = time.perf_counter()
    if command == "suite":
        body, exact = cmd_suite(args)
    else:
        if not args.scenario or len(args.scenario) != 1:
            raise ScenarioError(f"'{command}' needs exactly one --scenario")
        sf, sc = _load(args.scenario[0], args.override, args.seed, args.workers)
        body, exact = HANDLERS[command](sf, sc, args)
        body["scenario"] = sf.name
    ok = all(r["passed"] for r in exact)
    report = {"schema_version": SCHEMA_VERSION, "command": command, **body,
              "exact_invariants": exact, "passed": ok}
    if command not in ("suite",) and not args.no_timings:
        report["elapsed_s"] = time.perf_counter() - t0
    return (0 if ok else 1), _clean(report)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        status, report = run(args)
    except (ScenarioError, HvexpError, FileNotFoundError) as exc:
        print(f"hvexp: error: {exc}", file=sys.stderr)
        return 2
    text = render(report, args.format)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
