"""Brute-force ratio for the one-dimensional weighted Lebesgue desk instance.

Standalone: nested adaptive ``scipy.integrate.quad`` only, no package code.

    Phi(t) = t on (0, 1],  A(t) = t,  b(x) = x,  f_s(y) = |s y| 1{|s y| <= 1}
    H(x)   = int_0^1 Phi(t)/t f_s(t x) (b(x) - b(t x)) dt
    lhs    = || H |x|^gamma ||_{L^q}   over  2**(K_MIN-1) < |x| <= 2**K_MAX
    rhs    = C * || f_s |x|^gamma_1 ||_{L^q_1} * Lip(b)

with ``q1 = 2``, ``r1 = 4``, ``gamma_1 = -1/2``, so ``1/q = 1/q1 + 1/r1`` and
``gamma = gamma_1 + gamma_1/r1``, and ``C = int_0^1 Phi(t)/t |1-t| t**(-gamma_1 - 1/q1) dt``.

Run as a script to print the ratios at s = 2**-6 and 2**6.
"""
import sys

import numpy as np
from scipy.integrate import quad

K_MIN, K_MAX = -24, 24
Q1, R1, GAMMA1 = 2.0, 4.0, -0.5
Q = 1.0 / (1.0 / Q1 + 1.0 / R1)
GAMMA = GAMMA1 + GAMMA1 / R1


def f(y, s):
    u = abs(s * y)
    return u if u <= 1.0 else 0.0


def H(x, s):
    """The commutator at ``x > 0``; the integrand jumps where ``s t x = 1``."""
    cut = 1.0 / (s * x)
    upper = min(1.0, cut)
    val, _ = quad(lambda t: f(t * x, s) * (x - t * x), 0.0, upper, epsabs=0, epsrel=1e-12)
    return val


def octaves(g):
    """``int`` of an even integrand over the annulus, one adaptive quad per octave."""
    total = 0.0
    for k in range(K_MIN, K_MAX + 1):
        total += quad(g, 2.0 ** (k - 1), 2.0 ** k, epsabs=0, epsrel=1e-11, limit=200)[0]
    return 2.0 * total


def lhs(s):
    return octaves(lambda x: (abs(H(x, s)) * x ** GAMMA) ** Q) ** (1.0 / Q)


def source_norm(s):
    # f_s vanishes beyond 1/s, so integrate up to there with a break at the jump
    def g(x):
        return (f(x, s) * x ** GAMMA1) ** Q1
    total = 0.0
    for k in range(K_MIN, K_MAX + 1):
        a, b = 2.0 ** (k - 1), min(2.0 ** k, 1.0 / s)
        if a < b:
            total += quad(g, a, b, epsabs=0, epsrel=1e-12)[0]
    return (2.0 * total) ** (1.0 / Q1)


def constant():
    e = -GAMMA1 - 1.0 / Q1
    return quad(lambda t: (1.0 - t) * t ** e, 0.0, 1.0, epsabs=0, epsrel=1e-13)[0]


def ratio(s, lip=1.0):
    return lhs(s) / (constant() * source_norm(s) * lip)


if __name__ == "__main__":
    for s in [float(v) for v in sys.argv[1:]] or [2.0 ** -6, 2.0 ** 6]:
        print(f"s={s:g} ratio={ratio(s):.12g}")
