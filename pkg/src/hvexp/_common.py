"""Shared error types, flagged values and point handling."""

import numpy as np


class HvexpError(Exception):
    """Base class; ``code`` is a stable machine-readable tag."""

    code = "ERROR"


class ExponentError(HvexpError, ValueError):
    code = "EXPONENT_CLASS"


class QuadratureError(HvexpError, ValueError):
    code = "NONFINITE_INTEGRAND"


class NormInfiniteError(HvexpError, ArithmeticError):
    code = "NORM_INFINITE"


class HypothesisError(HvexpError, ValueError):
    code = "HYPOTHESIS_VIOLATION"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ZeroInputError(HvexpError, ValueError):
    code = "ZERO_INPUT"


class LipschitzError(HvexpError, ValueError):
    code = "DECLARED_INCONSISTENT"


class InequalityDegenerateError(HvexpError, ArithmeticError):
    code = "INEQUALITY_DEGENERATE"


class FlaggedValue(float):
    """A float carrying a tuple of diagnostic flags.

    Arithmetic on it returns plain floats, so flags never leak into
    derived quantities by accident.
    """

    def __new__(cls, value, flags=()):
        obj = super().__new__(cls, value)
        obj.flags = tuple(dict.fromkeys(flags))
        return obj

    def __repr__(self):
        if self.flags:
            return f"{float(self)!r} {list(self.flags)}"
        return repr(float(self))


def flags_of(value):
    return tuple(getattr(value, "flags", ()))


def as_points(x, dim):
    """Coerce ``x`` to an ``(N, dim)`` float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        if dim != 1:
            raise ValueError(f"scalar point given for dim={dim}")
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        if dim == 1:
            return arr.reshape(-1, 1)
        if arr.shape[0] != dim:
            raise ValueError(f"point of length {arr.shape[0]} for dim={dim}")
        return arr.reshape(1, dim)
    if arr.shape[-1] != dim:
        raise ValueError(f"points have trailing size {arr.shape[-1]}, expected {dim}")
    return arr.reshape(-1, dim)


def sample_directions(dim):
    """Unit directions used for pointwise hypothesis sampling."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        ang = np.arange(8) * (np.pi / 4) + np.pi / 16
        return np.column_stack([np.cos(ang), np.sin(ang)])
    axes = np.vstack([np.eye(3), -np.eye(3)])
    diag = np.array([[a, b, c] for a in (1, -1) for b in (1, -1) for c in (1, -1)]) / np.sqrt(3)
    return np.vstack([axes, diag])


def sample_points(dim, j_min=-20, j_max=20, per_octave=4):
    """Log-spaced radii times a fixed direction set, as an ``(N, dim)`` array."""
    radii = 2.0 ** np.linspace(j_min, j_max, (j_max - j_min) * per_octave + 1)
    dirs = sample_directions(dim)
    return (radii[:, None, None] * dirs[None, :, :]).reshape(-1, dim)
