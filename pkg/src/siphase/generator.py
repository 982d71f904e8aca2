"""Compactly supported generators and the sample matrix built from them.

A generator ``phi`` vanishes outside ``[0, N]`` where ``N`` is its support
length.  Two kinds are provided: the cardinal B-spline of order ``N`` and a
tabulated function interpolated linearly between uniform grid values.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, InvalidSchemeError

__all__ = [
    "bspline_eval",
    "Generator",
    "generator_eval",
    "PhiMatrix",
    "build_phi_matrix",
    "is_full_spark",
    "phi_n_inverse_norm",
    "submatrix_min_singular_values",
]


def bspline_eval(order, t):
    """Evaluate the cardinal B-spline ``B_order`` at ``t``.

    Uses the uniform-knot Cox-de Boor recursion

        B_1 = 1_[0, 1),
        B_N(t) = (t B_{N-1}(t) + (N - t) B_{N-1}(t - 1)) / (N - 1),

    which is the piecewise-polynomial form of repeated convolution with the
    unit indicator.  Accepts scalars or arrays; returns the same shape.
    """
    order = int(order)
    if order < 1:
        raise InvalidArgumentError(f"B-spline order must be >= 1, got {order}")
    t = np.asarray(t, dtype=float)
    # shifted copies t - j, j = 0..order-1; row j holds B_r(t - j)
    shifts = t[np.newaxis, ...] - np.arange(order).reshape((-1,) + (1,) * t.ndim)
    vals = ((shifts >= 0.0) & (shifts < 1.0)).astype(float)
    for r in range(2, order + 1):
        s = shifts[: order - r + 1]
        vals = (s * vals[:-1] + (r - s) * vals[1:]) / (r - 1)
    out = vals[0]
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class Generator:
    """A generator supported on ``[0, N]``.

    Build one with :meth:`bspline` or :meth:`tabulated`.  Tabulated
    generators interpolate linearly and are therefore only approximate
    stand-ins for smooth functions.
    """

    kind: str
    support_length: int
    values: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def bspline(cls, order: int) -> "Generator":
        if int(order) < 1:
            raise InvalidArgumentError(f"B-spline order must be >= 1, got {order}")
        return cls("bspline", int(order))

    @classmethod
    def tabulated(cls, values, support: int) -> "Generator":
        """Tabulated generator from samples on a uniform grid over ``[0, support]``.

        The first and last values must be 0 so the generator is continuous.
        """
        v = np.array(values, dtype=float)
        if support < 1:
            raise InvalidArgumentError("support must be a positive integer")
        if v.ndim != 1 or v.size < 2:
            raise InvalidArgumentError("need at least two tabulated values")
        if v[0] != 0.0 or v[-1] != 0.0:
            raise InvalidArgumentError("tabulated generator must vanish at both endpoints")
        v.setflags(write=False)
        return cls("tabulated", int(support), v)

    @property
    def order(self) -> int:
        return self.support_length

    def __call__(self, t):
        return generator_eval(self, t)

    def to_dict(self) -> dict:
        if self.kind == "bspline":
            return {"kind": "bspline", "order": self.support_length}
        return {"kind": "tabulated", "values": self.values.tolist(), "support": self.support_length}

    @classmethod
    def from_dict(cls, d: dict) -> "Generator":
        kind = d.get("kind")
        if kind == "bspline":
            return cls.bspline(d["order"])
        if kind == "tabulated":
            return cls.tabulated(d["values"], d["support"])
        raise InvalidArgumentError(f"unknown generator kind {kind!r}")

    def __eq__(self, other):
        if not isinstance(other, Generator):
            return NotImplemented
        if (self.kind, self.support_length) != (other.kind, other.support_length):
            return False
        if self.values is None:
            return other.values is None
        return other.values is not None and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.kind, self.support_length))


def generator_eval(g: Generator, t):
    """Evaluate ``g`` at ``t``; exactly 0 for ``t <= 0`` or ``t >= N``."""
    t = np.asarray(t, dtype=float)
    N = g.support_length
    if g.kind == "bspline":
        out = np.asarray(bspline_eval(N, t), dtype=float)
    else:
        grid = np.linspace(0.0, N, g.values.size)
        out = np.interp(t, grid, g.values)
    out = np.where((t > 0.0) & (t < N), out, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class PhiMatrix:
    """The ``(2N-1) x N`` matrix with entries ``phi(x_m + n)``."""

    entries: np.ndarray
    nodes: np.ndarray

    @property
    def N(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self):
        return self.entries.shape


def _check_nodes(X, N):
    X = np.asarray(X, dtype=float)
    if X.ndim != 1 or X.size != 2 * N - 1:
        raise InvalidSchemeError(f"need exactly 2N-1 = {2 * N - 1} nodes, got {X.size}")
    if np.any(X <= 0.0) or np.any(X >= 1.0):
        raise InvalidSchemeError("nodes must lie strictly inside (0, 1)")
    if np.unique(X).size != X.size:
        raise InvalidSchemeError("nodes must be distinct")
    return X


def build_phi_matrix(g: Generator, X) -> PhiMatrix:
    N = g.support_length
    X = _check_nodes(X, N)
    entries = generator_eval(g, X[:, None] + np.arange(N)[None, :])
    entries = np.asarray(entries, dtype=float).reshape(X.size, N)
    entries.setflags(write=False)
    X = X.copy()
    X.setflags(write=False)
    return PhiMatrix(entries, X)


def _as_array(phi) -> np.ndarray:
    return phi.entries if isinstance(phi, PhiMatrix) else np.asarray(phi, dtype=float)


def submatrix_min_singular_values(phi) -> np.ndarray:
    """Smallest singular value of every ``N``-row submatrix, in
    ``itertools.combinations`` order."""
    A = _as_array(phi)
    N = A.shape[1]
    idx = np.array(list(itertools.combinations(range(A.shape[0]), N)))
    sv = np.linalg.svd(A[idx], compute_uv=False)
    return sv[:, -1]


def is_full_spark(phi, tol: float | None = None) -> bool:
    """True iff every ``N x N`` submatrix has smallest singular value ``> tol``.

    The default ``tol`` is ``1e-10`` times the largest singular value of the
    whole matrix.
    """
    A = _as_array(phi)
    if tol is None:
        tol = 1e-10 * np.linalg.norm(A, 2)
    elif tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    return bool(np.all(submatrix_min_singular_values(A) > tol))


def phi_n_inverse_norm(phi, tol: float | None = None) -> float:
    """Largest spectral norm of the inverse of an ``N``-row submatrix.

    Returns ``math.inf`` when some submatrix is singular (``is_full_spark``
    fails at ``tol``).
    """
    A = _as_array(phi)
    smin = submatrix_min_singular_values(A)
    if tol is None:
        tol = 1e-10 * np.linalg.norm(A, 2)
    if np.any(smin <= tol):
        return math.inf
    return float(1.0 / smin.min())
