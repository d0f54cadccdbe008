"""Luxemburg, Herz and Morrey-Herz norms with a variable exponent.

Run:  python demos/01_variable_exponent_norms.py
"""
import numpy as np

from hvexp.exponents import make_exponent
from hvexp.norms import (herz_morrey_norm, herz_norm, luxemburg_norm,
                         modular_norm_bracket_check)
from hvexp.quadrature import PowerWeight, default_grid, make_function, modular

grid = default_grid(1)
f = make_function("gaussian", scale=2.0, amplitude=3.0)

# A constant exponent reproduces the classical norm; for a gaussian
# ||f||_2 = 3 (pi/2)^(1/4) sqrt(2)
print("||f||_2            ", float(luxemburg_norm(f, 2.0, None, grid)))
print("closed form        ", 3 * (np.pi / 2) ** 0.25 * np.sqrt(2))

# p(x) = 2 + 1/(1+|x|) moves between 3 at the origin and 2 at infinity
p = make_exponent("rational_bump", a=2.0, b=1.0)
w = PowerWeight(0.25)
nrm = luxemburg_norm(f, p, w, grid)
print("\nvariable exponent  ", float(nrm), "flags:", list(getattr(nrm, "flags", ())))
# at the norm the modular is exactly one
print("modular at norm    ", modular(f, p, w, float(nrm), grid))

# the norm-modular bracket, with p- = 2 and p+ = 3
br = modular_norm_bracket_check(f, p, w, grid)
print("bracket            ", f"lower={br.lower:.6g} norm={br.norm:.6g} upper={br.upper:.6g}",
      br.holds_i and br.holds_ii)

# Herz and Morrey-Herz norms sum shell pieces 2^(k alpha) ||f chi_k||
alpha = make_exponent("rational_bump", a=-0.25, b=0.5, **{"class": "real"})
print("\nHerz K^{alpha,1}_p  ", float(herz_norm(f, alpha, 1.0, p, w, grid)))
for lam in (0.0, 0.25, 0.5):
    v = herz_morrey_norm(f, alpha, lam, 1.0, p, w, grid)
    print(f"Morrey-Herz lam={lam:<4}", float(v), list(getattr(v, "flags", ())))
