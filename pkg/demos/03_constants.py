"""Structural factors, Theta and the theorem constants C1..C7.

Run:  python demos/03_constants.py
"""
import numpy as np

from hvexp.exponents import constant_exponent
from hvexp.matrixfam import (ConstantProblem, FactorParams, default_t_grid, make_family,
                             make_kernel, rho_star, structural_factors, theorem_constant,
                             theta_star)

# rho* is the worst condition number over the families; Theta is the greatest
# integer with rho* < 2^(-Theta)
fams = [make_family("scalar", dim=2), make_family("matrix", dim=2, matrix=[[1, 0], [0, 4]])]
t = np.array([[0.5, 0.5]])
print("rho*               ", rho_star(fams, t)[0], "= 17/4")
print("Theta*             ", theta_star(fams, t[0]))

# c(t) collects ||A(t)||, ||A(t)^-1|| and the weight; for A(t) = t in dim 1
# with q = 2 and gamma = 0 it is |t|^(-1/2)
q = constant_exponent(2.0)
pr = FactorParams(q=q, gamma=0.0, beta=1.0, lam=0.25, alpha=0.5, r=4.0)
for s in (0.25, 0.5, 1.0):
    fb = structural_factors(make_family("scalar", dim=1), pr, s)
    print(f"c({s})             ", fb.c, " gap", fb.commutator_gap)

# C3 for Phi(t) = t chi_(0,1]: int_0^1 t^(-1/2) (1 - t) dt = B(1/2, 2) = 4/3
prob = ConstantProblem(make_kernel("power_cube", dim=1, sigma=1.0),
                       [make_family("scalar", dim=1)], [pr], p=1.0)
tg = default_t_grid(1)
# C2 and C5 weight each shell by a power of 2 growing with alpha; at alpha = 1/2
# this kernel no longer decays fast enough and they diverge
for cid in ("C1", "C2", "C3", "C4", "C5"):
    C = theorem_constant(cid, prob, tg)
    print(f"{cid}                 ", float(C), list(getattr(C, "flags", ())))

# a kernel without decay at t -> 0 is reported divergent instead of truncated
flat = ConstantProblem(make_kernel("power_cube", dim=1, sigma=0.0),
                       [make_family("scalar", dim=1)],
                       [FactorParams(q=q, gamma=0.0, beta=0.0)], p=1.0)
C = theorem_constant("C3", flat, tg)
print("\nflat kernel C3     ", float(C), list(C.flags))
