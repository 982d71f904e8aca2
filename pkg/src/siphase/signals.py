"""Finite-duration signals ``f(t) = sum_k c(k) phi(t - k)`` and their
stability diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySignalError, InvalidArgumentError
from .generator import Generator, PhiMatrix, generator_eval, phi_n_inverse_norm

__all__ = [
    "SISSignal",
    "evaluate",
    "support_bounds",
    "is_nonseparable",
    "window_energies",
    "separability_gap",
    "max_energy_ratio",
    "StabilityReport",
    "compute_stability_report",
]


@dataclass(frozen=True, eq=False)
class SISSignal:
    """Coefficients ``c(k)`` for ``k_low <= k < k_low + len(coeffs)`` over a
    generator.  Coefficients outside the stored window are zero; the window
    may carry explicit zeros."""

    generator: Generator
    coeffs: np.ndarray
    k_low: int = 0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "k_low", int(self.k_low))

    @classmethod
    def from_mapping(cls, generator: Generator, mapping: dict) -> "SISSignal":
        if not mapping:
            return cls(generator, np.zeros(0), 0)
        lo, hi = min(mapping), max(mapping)
        c = np.zeros(hi - lo + 1)
        for k, v in mapping.items():
            c[k - lo] = v
        return cls(generator, c, lo)

    @property
    def N(self) -> int:
        return self.generator.support_length

    @property
    def k_high(self) -> int:
        """Last stored index (inclusive)."""
        return self.k_low + self.coeffs.size - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.k_low, self.k_low + self.coeffs.size)

    def coeff(self, k):
        """``c(k)`` for an int or integer array; zero outside the window."""
        k = np.asarray(k)
        i = k - self.k_low
        inside = (i >= 0) & (i < self.coeffs.size)
        out = np.where(inside, self.coeffs[np.clip(i, 0, max(self.coeffs.size - 1, 0))]
                       if self.coeffs.size else 0.0, 0.0)
        return float(out) if out.ndim == 0 else out

    def on_range(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients on ``lo..hi`` inclusive."""
        return self.coeff(np.arange(lo, hi + 1))

    def __call__(self, t):
        return evaluate(self, t)

    def shift(self, k0: int) -> "SISSignal":
        """The signal ``f(. - k0)``."""
        return SISSignal(self.generator, self.coeffs, self.k_low + int(k0))

    def scale(self, lam: float) -> "SISSignal":
        return SISSignal(self.generator, lam * self.coeffs, self.k_low)

    def __neg__(self):
        return self.scale(-1.0)

    def __add__(self, other: "SISSignal") -> "SISSignal":
        if other.generator != self.generator:
            raise InvalidArgumentError("signals live over different generators")
        lo = min(self.k_low, other.k_low)
        hi = max(self.k_high, other.k_high)
        return SISSignal(self.generator, self.on_range(lo, hi) + other.on_range(lo, hi), lo)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs != 0.0)


def evaluate(f: SISSignal, t):
    """``f(t) = sum_k c(k) phi(t - k)``; only ``t - N < k < t`` contribute."""
    t = np.asarray(t, dtype=float)
    if f.coeffs.size == 0:
        out = np.zeros_like(t)
    else:
        N = f.N
        # k ranges over floor(t) - N + 1 .. floor(t); everything else has phi == 0
        base = np.floor(t).astype(np.int64)
        out = np.zeros_like(t)
        for j in range(N):
            k = base - j
            out = out + f.coeff(k) * generator_eval(f.generator, t - k)
    return float(out) if np.ndim(out) == 0 else out


def support_bounds(f: SISSignal, tol: float = 0.0) -> tuple[int, int]:
    """First and last index with ``|c(k)| > tol``."""
    nz = np.flatnonzero(np.abs(f.coeffs) > tol)
    if nz.size == 0:
        raise EmptySignalError("the zero signal has no support")
    return f.k_low + int(nz[0]), f.k_low + int(nz[-1])


def window_energies(f: SISSignal):
    """Window energies ``sum_{l=0}^{N-2} c(k+l)^2`` over the criterion range
    ``K_- - N + 1 < k < K_+ + 1``.

    Returns ``(ks, energies)``.
    """
    N = f.N
    kmin, kmax = support_bounds(f)
    ks = np.arange(kmin - N + 2, kmax + 1)
    c2 = f.on_range(ks[0], ks[-1] + N - 2) ** 2
    e = np.array([c2[i:i + N - 1].sum() for i in range(ks.size)])
    return ks, e


def is_nonseparable(f: SISSignal, tol: float = 0.0) -> bool:
    """Coefficient-window test for nonseparability (needs ``N >= 2``).

    ``f`` is nonseparable iff every length ``N-1`` window of coefficients
    starting at ``K_- - N + 1 < k < K_+ + 1`` carries nonzero energy.  The
    comparison is exact by default; pass ``tol`` for imported data.
    """
    if f.N < 2:
        raise InvalidArgumentError("nonseparability criterion needs N >= 2")
    if tol > 0:
        f = SISSignal(f.generator, np.where(np.abs(f.coeffs) > tol, f.coeffs, 0.0), f.k_low)
    _, e = window_energies(f)
    return bool(np.all(e > 0.0))


def separability_gap(f: SISSignal) -> float:
    """``S_f``: smallest window energy; zero iff ``f`` is separable."""
    _, e = window_energies(f)
    return float(e.min())


def max_energy_ratio(f: SISSignal) -> float:
    """``M_f``: largest ratio of the widened window energy
    ``sum_{l=-1}^{N-1} c(k+l)^2`` to the inner one.  ``inf`` when some inner
    window vanishes."""
    N = f.N
    ks, inner = window_energies(f)
    c2 = f.on_range(ks[0] - 1, ks[-1] + N - 1) ** 2
    outer = np.array([c2[i:i + N + 1].sum() for i in range(ks.size)])
    if np.any(inner == 0.0):
        return math.inf
    return float(np.max(outer / inner))


@dataclass(frozen=True)
class StabilityReport:
    """Stability constants of a signal for a given scheme.

    ``error_bound(eps)`` is the guaranteed coefficient error once the noise
    level is at most ``noise_budget``.
    """

    S_f: float
    M_f: float
    C_f_phi: float
    M0: float
    phi_n_inv_norm: float
    phi_norm: float
    noise_budget: float
    N: int
    L: int
    separable: bool

    def error_bound(self, eps: float) -> float:
        if self.separable or not math.isfinite(self.C_f_phi):
            return math.inf
        expo = self.N - 1 + (self.L - 1) // 2
        logb = (math.log(self.N) + math.log(self.phi_n_inv_norm)
                + expo * math.log(self.C_f_phi))
        return math.exp(logb) * math.sqrt(8.0 * eps)


def compute_stability_report(f: SISSignal, phi: PhiMatrix, scheme, L: int | None = None) -> StabilityReport:
    """Compute ``S_f``, ``M_f``, ``C_{f,phi}``, the branch threshold ``M0``
    and the admissible noise level for ``f`` sampled with ``scheme``.

    ``L`` defaults to ``scheme.L``.
    """
    if f.is_zero():
        raise EmptySignalError("stability report needs a nonzero signal")
    L = scheme.L if L is None else int(L)
    N = f.N
    inv = phi_n_inverse_norm(phi)
    pnorm = float(np.linalg.norm(phi.entries, 2))
    S = separability_gap(f)
    M = max_energy_ratio(f)
    g = f.generator
    node_min = min(np.min(np.abs(generator_eval(g, scheme.gamma))),
                   np.min(np.abs(generator_eval(g, scheme.gamma_star_star))))
    separable = S == 0.0
    if separable or not math.isfinite(inv):
        C = math.inf
        M0 = 0.0 if separable else S / (4.0 * inv**2)
        budget = 0.0
    else:
        C = 2.0**8 * pnorm**4 * inv**3 * M / node_min
        M0 = S / (4.0 * inv**2)
        # log space: C ** (4N + L - 5) overflows for moderate L
        logb = (math.log(S) - 7 * math.log(2.0) - 3 * math.log(N) - 2 * math.log(inv)
                - (4 * N + L - 5) * math.log(C))
        budget = math.exp(logb) if logb > -745.0 else 0.0
    return StabilityReport(S_f=S, M_f=M, C_f_phi=C, M0=M0, phi_n_inv_norm=inv,
                           phi_norm=pnorm, noise_budget=budget, N=N, L=L, separable=separable)
