"""Checking the bounds on the shipped scenarios, and what a dilation scan shows.

Run:  python demos/04_verify_and_scan.py
"""
import numpy as np

from hvexp.scenario import load_shipped, shipped_scenario_paths
from hvexp.verify import proof_inequality_check, ratio_scan, verify_theorem

print(f"{'scenario':<22}{'C':>12}{'lhs':>14}{'ratio':>12}  flags")
for path in shipped_scenario_paths():
    name = path.rsplit("/", 1)[-1][:-5]
    rep = verify_theorem(load_shipped(name).scenario)
    print(f"{name:<22}{rep.constant:>12.5g}{rep.lhs:>14.6g}{rep.ratio:>12.4g}  "
          f"{','.join(rep.flags)}")

# The constants are only known up to "<~", so a single ratio says little.
# Scaling f or b by c must leave it unchanged exactly
sc = load_shipped("t33_desk").scenario
for family in ("amplitude", "symbol"):
    res = ratio_scan(sc, family)
    print(f"\n{family:<10} base {res.base_ratio:.12g}  members {np.round(res.ratios, 12)}")

# Dilating f is the real probe.  Here the source norm of f(s .) stays 1 while the
# output flattens to a constant 1/(2s) far out, whose weighted L^(4/3) mass on
# the truncated grid grows like 1/s; the ratio follows.
res = ratio_scan(sc, "dilation")
for s, r in zip(res.values, res.ratios):
    print(f"s = 2^{int(np.log2(s)):>3}   ratio {r:12.6g}   s * ratio {s * r:.6g}")
print("drift", res.drift, res.flags)

# The shell-transport step of the proof, per dyadic shell
for k in (-4, 0, 4):
    chk = proof_inequality_check("shell_transport", sc, k)
    print(f"shell_transport k={k:>2}  empirical constant {chk.empirical_constant:.4g}")
