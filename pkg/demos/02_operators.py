"""Hausdorff operators, their commutators and the Hardy special forms.

Run:  python demos/02_operators.py
"""
import numpy as np

from hvexp.matrixfam import make_family, make_kernel
from hvexp.operators import HardySpec, OperatorSpec, apply, reduction_check, special_apply
from hvexp.quadrature import make_function

x = np.array([0.5, 1.0, 1.7, 2.0, 3.0])
scalar = make_family("scalar", dim=1)            # A(t) = t

# Phi = chi_(0,1] and A(t) = t give the Hardy average int_0^1 f(t x) dt / t
hardy = make_kernel("power_cube", dim=1, sigma=0.0)
f = make_function("radial_power", a=2.0)
print("Hardy on |y|^2     ", apply(OperatorSpec(hardy, [scalar], [f]), x))
print("|x|^2 / 2          ", x ** 2 / 2)

# The commutator with b(x) = x inserts the gap b(x) - b(t x) = x (1 - t)
kern = make_kernel("power_cube", dim=1, sigma=1.0)
f = make_function("truncated_power", a=1.0, R=1.0)
b = make_function("linear")
H = apply(OperatorSpec(kern, [scalar], [f], [b]), x)
u = np.abs(x)
closed = np.where(u <= 1, x * u / 6, x * (1 / (2 * u) - 1 / (3 * u * u)))
print("\ncommutator         ", H)
print("closed form        ", closed)
# f jumps at |y| = 1, so the integrand jumps at t = 1/|x|; the shell holding
# that t is split there, which keeps non-dyadic x (1.7, 3.0) exact

# A constant symbol or the identity family kills the commutator exactly
print("b = 7              ", apply(OperatorSpec(kern, [scalar], [f],
                                                [make_function("constant", value=7.0)]), x))
print("A(t) = I           ", apply(OperatorSpec(kern, [make_family("identity", dim=1)], [f],
                                                [b]), x))

# A bilinear form in dim 2 against its unit-cube special case
b2 = make_function("radial_power", dim=2, a=1.0)
one = make_function("constant", dim=2, value=1.0)
spec = HardySpec("hardy_14", 2, [one, one], [b2, b2])
pts = np.array([[1.0, 1.0], [0.5, -0.25], [-2.0, 0.3]])
print("\nhardy_14 at (1,1)  ", special_apply("hardy_14", spec, pts[:1])[0], "(|x|^2 / 4 = 0.5)")
print("reduction gap      ", reduction_check(spec, pts))
