"""Numerics for multilinear Hausdorff operators on variable-exponent spaces."""
