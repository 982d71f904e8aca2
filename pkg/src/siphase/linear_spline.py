"""Closed-form phase retrieval for piecewise linear signals in ``V(B_2)``.

Independent of MEPS: three samples in one unit interval fix the two end
values up to sign via 3x3 determinants, and two samples per further unit
interval propagate them forward and backward.  Point values ``f(j)`` are
the coefficients shifted by one, ``f(j) = c(j - 1)``.

The propagation roughly doubles any perturbation of the current value per
unit interval, so double precision only carries a dozen or so intervals.
All arithmetic is generic: pass ``mpmath.mpf`` samples and nodes (with a
matching ``sqrt``) to run long signals in extended precision.
"""
from __future__ import annotations

import math

from .errors import InvalidArgumentError

__all__ = ["interval_magnitudes", "linear_spline_oracle"]


def _det3(a, b, c):
    """Determinant of the 3x3 matrix with columns ``a``, ``b``, ``c``."""
    return (a[0] * (b[1] * c[2] - b[2] * c[1])
            - b[0] * (a[1] * c[2] - a[2] * c[1])
            + c[0] * (a[1] * b[2] - a[2] * b[1]))


def interval_magnitudes(z3, x):
    """``(|f(k0)|^2, 2 f(k0) f(k0+1), |f(k0+1)|^2)`` from ``z3[i] = |f(k0 + x_i)|^2``.

    Solves ``z = (1-x)^2 A + x(1-x) B + x^2 C`` by Cramer's rule.
    """
    z3, x = list(z3), list(x)
    if len(x) != 3 or len(set(x)) != 3:
        raise InvalidArgumentError("need three distinct nodes")
    a = [(1 - t) ** 2 for t in x]
    b = [t * (1 - t) for t in x]
    c = [t * t for t in x]
    den = _det3(a, b, c)
    if den == 0:
        raise InvalidArgumentError("nodes must be distinct")
    return _det3(z3, b, c) / den, _det3(a, z3, c) / den, _det3(a, b, z3) / den


def _step(cur, prev, za, zb, xa, xb, tol, sqrt):
    """Next point value from the current one and two samples in between.

    Samples satisfy ``z = (cur + x * (next - cur))^2`` at ``x in {xa, xb}``.
    """
    if abs(cur) > tol:
        num = xa**2 * (zb - cur**2) - xb**2 * (za - cur**2)
        return cur + num / (2 * xa * xb * (xa - xb) * cur)
    if abs(prev) > tol:
        # a nonseparable signal cannot restart after an isolated zero
        return 0 * cur
    s = za + zb
    return sqrt(s / (xa**2 + xb**2)) if s > 0 else 0 * cur


def linear_spline_oracle(z_center, z_side: dict, x, k0: int = 0, zero_tol: float = 1e-9,
                         sqrt=math.sqrt) -> dict:
    """Recover ``c(k)`` up to a global sign from noiseless samples.

    Parameters
    ----------
    z_center : three values ``|f(k0 + x_i)|^2``, ``i = 1, 2, 3``.
    z_side : mapping ``j -> (|f(j + x_1)|^2, |f(j + x_2)|^2)`` for the other
        unit intervals ``[j, j+1]``; must be contiguous on each side of ``k0``.
    x : the three distinct nodes in (0, 1).
    zero_tol : point values with ``|f| <= zero_tol * max|f|`` are treated
        as exact zeros.
    sqrt : square root matching the number type of the inputs.

    Returns
    -------
    dict mapping ``k`` to ``c(k)`` (same number type as the inputs).
    """
    x = list(x)
    if len(x) != 3 or len(set(x)) != 3:
        raise InvalidArgumentError("need three distinct nodes")
    x1, x2 = x[0], x[1]
    f0sq, cross, f1sq = interval_magnitudes(z_center, x)
    zero = 0 * f0sq
    f0sq, f1sq = max(f0sq, zero), max(f1sq, zero)
    # anchor on the larger end value so the cross term is divided safely
    if f0sq >= f1sq:
        f0 = sqrt(f0sq)
        f1 = cross / (2 * f0) if f0 > 0 else zero
    else:
        f1 = sqrt(f1sq)
        f0 = cross / (2 * f1)
    allz = list(z_center) + [v for pair in z_side.values() for v in pair]
    zmax = max(allz)
    tol = zero_tol * sqrt(zmax) if zmax > 0 else zero

    vals = {k0: f0, k0 + 1: f1}
    j = k0 + 1
    while j in z_side:
        za, zb = z_side[j]
        vals[j + 1] = _step(vals[j], vals[j - 1], za, zb, x1, x2, tol, sqrt)
        j += 1
    j = k0 - 1
    while j in z_side:
        za, zb = z_side[j]
        # mirror: t -> 1 - t turns [j, j+1] into a forward step from f(j+1)
        vals[j] = _step(vals[j + 1], vals[j + 2], za, zb, 1 - x1, 1 - x2, tol, sqrt)
        j -= 1
    return {k - 1: v for k, v in sorted(vals.items())}
