"""Small polynomial helpers shared by the map calculus and the solver.

Coefficient lists are ascending.  The generic routines work for python
complex, Fraction and mpmath scalars alike; hot archimedean paths use the
numpy variants.
"""

from __future__ import annotations

import numpy as np


def strip_trailing_zeros(coeffs):
    """Drop exactly-zero leading (highest-order) coefficients."""
    out = list(coeffs)
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def poly_mul(a, b):
    """Convolution product of two ascending coefficient lists."""
    if isinstance(a, np.ndarray) and isinstance(b, np.ndarray):
        return np.convolve(a, b)
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] = out[i + j] + ai * bj
    return out


def poly_add(a, b, scale_b=1):
    out = list(a) + [0] * max(0, len(b) - len(a))
    for j, bj in enumerate(b):
        out[j] = out[j] + scale_b * bj
    return out


def poly_derivative(a):
    return [a[i] * i for i in range(1, len(a))] or [0 * a[0]]


def poly_eval(a, z):
    acc = 0
    for c in reversed(a):
        acc = acc * z + c
    return acc


def poly_eval_many(a: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Horner evaluation of one polynomial at many points (vectorized)."""
    acc = np.zeros_like(z)
    for c in a[::-1]:
        acc = acc * z + c
    return acc


def wronskian_coeffs(num, den):
    """Ascending coefficients of p' q - p q' (degree <= 2d - 2)."""
    dp = poly_derivative(num)
    dq = poly_derivative(den)
    w = poly_add(poly_mul(dp, den), poly_mul(num, dq), scale_b=-1)
    # degree-(2d-2) object; trailing entries may legitimately be zero
    target = 2 * (max(len(num), len(den)) - 1) - 1
    w = (list(w) + [0] * target)[:max(target, 1)]
    return w
