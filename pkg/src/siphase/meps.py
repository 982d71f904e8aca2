"""MEPS reconstruction: Minimization, Extension, Phase adjustment, Sewing.

Each block ``kprime`` of the sample set yields a local estimate of ``+-c``:

1. a global phaseless least-squares fit of ``N`` coefficients from the
   ``2N-1`` samples at ``X + kprime*L`` (exhaustive sign enumeration);
2. forward then backward extension by ``(L-1)/2`` coefficients each, driven
   by the Gamma / Gamma* samples and the auxiliary functions
   :func:`h1`, :func:`h2` (and starred variants);
3. a sign per block chosen so overlapping neighbours agree;
4. assembly of the global sequence, block ``kprime`` owning
   ``k`` with ``floor((2k + L - 1) / (2L)) == kprime``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidArgumentError, SchemeDegenerateError, SiphaseError
from .generator import Generator, PhiMatrix, phi_n_inverse_norm
from .sampling import NoisySamples, SamplingScheme, validate_scheme
from .signals import SISSignal, compute_stability_report

__all__ = [
    "h1",
    "h1_star",
    "h2",
    "h2_star",
    "sew_index",
    "BlockEstimate",
    "MEPSConfig",
    "Reconstruction",
    "local_minimize",
    "extend_forward_step",
    "extend_backward_step",
    "adjust_phases",
    "sew",
    "meps_reconstruct",
]

STAGE_C0, STAGE_C_HALF, STAGE_C1 = "C0", "C_HALF", "C1"
SMALL, LARGE = "SMALL", "LARGE"


def h1(e, nodes) -> float:
    """Cauchy-Schwarz gap of ``e`` against the node vector.

    ``(|p|^2 |e|^2 - <p, e>^2) / |p|^2`` with ``p = nodes``; equal to the
    squared distance from ``e`` to the line spanned by ``p``.
    """
    e = np.asarray(e, dtype=float)
    p = np.asarray(nodes, dtype=float)
    pp = p @ p
    if pp == 0.0:
        raise InvalidArgumentError("node values are all zero")
    pe = p @ e
    return float((pp * (e @ e) - pe * pe) / pp)


def h2(e1, e2, nodes) -> float:
    """``(|p|^2 sum(e1 e2 / p) - sum(e2) <p, e1>) / |p|^2`` with ``p = nodes``."""
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    p = np.asarray(nodes, dtype=float)
    if np.any(p == 0.0):
        raise InvalidArgumentError("node values must be nonzero")
    pp = p @ p
    return float((pp * np.sum(e1 * e2 / p) - e2.sum() * (p @ e1)) / pp)


# The starred variants are the same expressions over the phi(gamma* + N - 1)
# node values; callers pass those values.
h1_star = h1
h2_star = h2


def sew_index(k, L: int):
    """Block that owns coefficient ``k``: ``floor((2k + L - 1) / (2L))``."""
    return (2 * np.asarray(k) + L - 1) // (2 * L)


@dataclass
class BlockEstimate:
    """Local coefficient estimate of one block.

    ``coeffs`` covers the full extended window ``[kprime*L - N + 1 - h,
    kprime*L + h]`` (``h = (L-1)/2``); entries outside the window of the
    current ``stage`` are zero.
    """

    kprime: int
    L: int
    N: int
    coeffs: np.ndarray
    stage: str = STAGE_C0
    objective: float = 0.0
    branches: list = field(default_factory=list)
    h1_values: list = field(default_factory=list)
    steps_forward: int = 0
    steps_backward: int = 0

    @property
    def half(self) -> int:
        return (self.L - 1) // 2

    @property
    def lo(self) -> int:
        """First index of the full extended window."""
        return self.kprime * self.L - self.N + 1 - self.half

    @property
    def hi(self) -> int:
        return self.kprime * self.L + self.half

    def stage_window(self) -> tuple[int, int]:
        base = self.kprime * self.L
        return base - self.N + 1 - self.steps_backward, base + self.steps_forward

    def get(self, k):
        k = np.asarray(k)
        i = k - self.lo
        ok = (i >= 0) & (i < self.coeffs.size)
        out = np.where(ok, self.coeffs[np.clip(i, 0, self.coeffs.size - 1)], 0.0)
        return float(out) if out.ndim == 0 else out

    def copy(self) -> "BlockEstimate":
        return replace(self, coeffs=self.coeffs.copy(), branches=list(self.branches),
                       h1_values=list(self.h1_values))


@dataclass
class MEPSConfig:
    """Reconstruction settings.

    ``m0_mode`` selects the branch threshold: ``"explicit"`` uses
    ``m0_value``; ``"oracle"`` computes ``S_f / (4 ||(Phi_N)^-1||^2)`` from
    ``oracle_signal``; ``"auto"`` estimates ``S_f`` from the first-stage
    block estimates (smallest window energy among windows with at least
    ``auto_floor`` times the largest one).
    """

    m0_mode: str = "explicit"
    m0_value: float = 0.0
    oracle_signal: SISSignal | None = None
    spark_tol: float = 1e-10
    sew_overlap_tol: float = 0.0
    refine: bool = False
    auto_floor: float = 1e-2

    def __post_init__(self):
        if self.m0_mode not in ("explicit", "oracle", "auto"):
            raise InvalidArgumentError(f"unknown M0 mode {self.m0_mode!r}")
        if self.m0_mode == "explicit" and not self.m0_value >= 0:
            raise InvalidArgumentError("explicit M0 must be >= 0")
        if self.m0_mode == "oracle" and self.oracle_signal is None:
            raise InvalidArgumentError("oracle M0 needs the true signal")

    @classmethod
    def explicit(cls, value: float, **kw) -> "MEPSConfig":
        return cls(m0_mode="explicit", m0_value=float(value), **kw)

    @classmethod
    def oracle(cls, signal: SISSignal, **kw) -> "MEPSConfig":
        return cls(m0_mode="oracle", oracle_signal=signal, **kw)

    @classmethod
    def auto(cls, **kw) -> "MEPSConfig":
        return cls(m0_mode="auto", **kw)


@dataclass
class Reconstruction:
    """Recovered coefficients ``c_eps(k)`` on ``k_low..`` plus diagnostics."""

    generator: Generator
    k_low: int
    coeffs: np.ndarray
    signs: dict
    blocks: list
    M0: float
    L: int

    @property
    def signal(self) -> SISSignal:
        return SISSignal(self.generator, self.coeffs, self.k_low)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.k_low, self.k_low + self.coeffs.size)

    def diagnostics(self) -> dict:
        """JSON-ready diagnostics.  Per block, ``branch_taken`` and
        ``h1_values`` list the forward steps ``l = 1..h`` then the backward
        steps ``l' = 1..h``."""
        return {
            "M0": self.M0,
            "L": self.L,
            "blocks": [
                {
                    "kprime": b.kprime,
                    "objective": b.objective,
                    "branch_taken": list(b.branches),
                    "h1_values": [float(v) for v in b.h1_values],
                    "sign": int(self.signs[b.kprime]),
                }
                for b in self.blocks
            ],
        }


def _sign_patterns(m: int) -> np.ndarray:
    """All ``+-1`` vectors of length ``m`` with first entry ``+1``."""
    tail = np.array(list(itertools.product((1.0, -1.0), repeat=m - 1))).reshape(-1, m - 1)
    return np.hstack([np.ones((tail.shape[0], 1)), tail])


def _phi_entries(phi) -> np.ndarray:
    return phi.entries if isinstance(phi, PhiMatrix) else np.asarray(phi, dtype=float)


def local_minimize(z, phi, kprime: int = 0, L: int = 1, refine: bool = False) -> BlockEstimate:
    """Global minimizer of ``sum_m (|(A c)_m| - sqrt(z_m))^2`` for one block.

    ``A`` is the sample matrix: column ``j`` multiplies ``c(kprime*L - j)``.
    Minimizing over ``c`` and over sign patterns ``s`` of
    ``|A c - s sqrt(z)|^2`` jointly is equivalent, so every pattern (up to a
    global flip) is solved by least squares and the best kept.
    """
    A = _phi_entries(phi)
    M, N = A.shape
    z = np.asarray(z, dtype=float)
    if z.shape != (M,):
        raise InvalidArgumentError(f"need {M} samples, got {z.shape}")
    r = np.sqrt(np.maximum(z, 0.0))
    block = BlockEstimate(kprime, L, N, np.zeros(N + L - 1))
    if not np.any(r > 0):
        return block
    S = _sign_patterns(M)
    rhs = S * r
    sol, *_ = np.linalg.lstsq(A, rhs.T, rcond=None)
    res = np.sum((A @ sol - rhs.T) ** 2, axis=0)
    best = int(np.argmin(res))
    c = sol[:, best]
    if refine:
        s = S[best].copy()
        for _ in range(50):
            fit = A @ c
            s_new = np.where(fit != 0.0, np.sign(fit), s)
            if np.array_equal(s_new, s):
                break
            s = s_new
            c = np.linalg.lstsq(A, s * r, rcond=None)[0]
    block.objective = float(np.sum((np.abs(A @ c) - r) ** 2))
    # column j <-> index kprime*L - j <-> position N - 1 - j + h in the block array
    h = (L - 1) // 2
    block.coeffs[h:h + N] = c[::-1]
    return block


def _checked_solver(G: np.ndarray, tol: float, scale: float):
    sv = np.linalg.svd(G, compute_uv=False)
    if sv[-1] <= tol * scale:
        raise SchemeDegenerateError(
            f"N x N extension system is singular (smallest singular value {sv[-1]:.3e})")
    return G


def _node_matrices(scheme: SamplingScheme):
    """``G[n, m] = phi(gamma_n + m)`` and ``Gs[n, m] = phi(gamma*_n + m)``."""
    Phi = scheme.phi.entries
    return Phi[list(scheme.gamma_idx)], Phi[list(scheme.gamma_star_idx)]


def extend_forward_step(block: BlockEstimate, l: int, z, scheme: SamplingScheme, M0: float,
                        spark_tol: float = 1e-10, _G=None) -> BlockEstimate:
    """Extend the block by coefficient ``kprime*L + l`` from the samples
    ``z[n]`` at ``gamma_n + kprime*L + l``."""
    if _G is None:
        G = _node_matrices(scheme)[0]
        _checked_solver(G, spark_tol, np.linalg.norm(scheme.phi.entries, 2))
    else:
        G = _G
    N = block.N
    if block.steps_forward != l - 1:
        raise InvalidArgumentError(f"forward step {l} out of order")
    out = block.copy()
    z = np.asarray(z, dtype=float)
    rz = np.sqrt(np.maximum(z, 0.0))
    top = block.kprime * block.L + l
    prev = block.get(top - np.arange(1, N))  # c(top - n'), n' = 1..N-1
    p = G[:, 0]
    alpha = G[:, 1:] @ prev
    hv = h1(alpha, p)
    out.h1_values.append(hv)
    if abs(hv) <= M0:
        out.branches.append(SMALL)
        out.coeffs[top - out.lo] = np.abs(p) @ rz / (p @ p)
    else:
        out.branches.append(LARGE)
        eta = z - alpha**2
        d = h2(alpha, eta, p) / (2.0 * hv)
        signs = np.sign(alpha + d * p)
        dvec = np.linalg.solve(G, signs * rz)
        out.coeffs[top - np.arange(N) - out.lo] = dvec
    out.steps_forward = l
    out.stage = STAGE_C_HALF
    return out


def extend_backward_step(block: BlockEstimate, l: int, z, scheme: SamplingScheme, M0: float,
                         spark_tol: float = 1e-10, _Gs=None) -> BlockEstimate:
    """Extend the block by coefficient ``kprime*L + 1 - N - l`` from the
    samples ``z[n]`` at ``gamma*_n + kprime*L - l``."""
    if _Gs is None:
        Gs = _node_matrices(scheme)[1]
        _checked_solver(Gs, spark_tol, np.linalg.norm(scheme.phi.entries, 2))
    else:
        Gs = _Gs
    N = block.N
    if block.steps_backward != l - 1:
        raise InvalidArgumentError(f"backward step {l} out of order")
    out = block.copy()
    z = np.asarray(z, dtype=float)
    rz = np.sqrt(np.maximum(z, 0.0))
    right = block.kprime * block.L - l
    known = block.get(right - np.arange(N - 1))  # c(right - n'), n' = 0..N-2
    p = Gs[:, N - 1]
    alpha = Gs[:, :N - 1] @ known
    hv = h1_star(alpha, p)
    out.h1_values.append(hv)
    if abs(hv) <= M0:
        out.branches.append(SMALL)
        out.coeffs[right - (N - 1) - out.lo] = np.abs(p) @ rz / (p @ p)
    else:
        out.branches.append(LARGE)
        eta = z - alpha**2
        d = h2_star(alpha, eta, p) / (2.0 * hv)
        signs = np.sign(alpha + d * p)
        dvec = np.linalg.solve(Gs, signs * rz)
        out.coeffs[right - np.arange(N) - out.lo] = dvec
    out.steps_backward = l
    out.stage = STAGE_C1
    return out


def adjust_phases(blocks, overlap_tol: float = 0.0):
    """Choose a sign per block so consecutive blocks have nonnegative inner
    product on their overlap.

    The first block keeps sign ``+1``.  If ``|<prev, next>| <= overlap_tol``
    the next block inherits the previous sign.  Returns ``(signed_blocks,
    signs)`` with ``signs`` keyed by ``kprime``.
    """
    blocks = sorted(blocks, key=lambda b: b.kprime)
    signs = {}
    signed = []
    prev = None
    for b in blocks:
        if prev is None:
            s = 1
        else:
            lo, hi = max(prev.lo, b.lo), min(prev.hi, b.hi)
            ks = np.arange(lo, hi + 1)
            ip = float(prev.get(ks) @ b.get(ks)) if ks.size else 0.0
            # prev is already signed, so ip > 0 means b agrees with it as is
            s = signs[prev.kprime] if abs(ip) <= overlap_tol else (1 if ip > 0 else -1)
        signs[b.kprime] = s
        nb = b.copy()
        nb.coeffs = s * nb.coeffs
        signed.append(nb)
        prev = nb
    return signed, signs


def sew(signed_blocks, generator: Generator | None = None, signs=None, M0: float = 0.0) -> Reconstruction:
    """Assemble ``c_eps(k)`` from the block owning each ``k``."""
    blocks = sorted(signed_blocks, key=lambda b: b.kprime)
    if not blocks:
        return Reconstruction(generator, 0, np.zeros(0), {}, [], M0, 1)
    L = blocks[0].L
    h = (L - 1) // 2
    kps = [b.kprime for b in blocks]
    if kps != list(range(kps[0], kps[-1] + 1)):
        raise SiphaseError("internal error: block range has gaps")
    k_low = kps[0] * L - h
    k_high = kps[-1] * L + h
    ks = np.arange(k_low, k_high + 1)
    owner = sew_index(ks, L)
    out = np.zeros(ks.size)
    for b in blocks:
        sel = owner == b.kprime
        out[sel] = b.get(ks[sel])
    if signs is None:
        signs = {b.kprime: 1 for b in blocks}
    return Reconstruction(generator, k_low, out, dict(signs), blocks, M0, L)


def _auto_m0(c0_blocks, inv_norm: float, floor: float) -> float:
    energies = []
    for b in c0_blocks:
        base = b.kprime * b.L
        c = b.get(np.arange(base - b.N + 1, base + 1))
        c2 = c**2
        energies.append(c2[:-1].sum())
        energies.append(c2[1:].sum())
    e = np.array(energies)
    if e.size == 0 or e.max() == 0.0:
        return 0.0
    S_est = e[e >= floor * e.max()].min()
    return float(S_est / (4.0 * inv_norm**2))


def meps_reconstruct(samples: NoisySamples, scheme: SamplingScheme, g: Generator | None = None,
                     config: MEPSConfig | None = None) -> Reconstruction:
    """Run all MEPS stages over every block present in ``samples``."""
    config = config or MEPSConfig()
    if g is not None and g != scheme.generator:
        scheme = SamplingScheme(g, scheme.X, scheme.gamma_idx, scheme.gamma_star_idx, scheme.L)
    validate_scheme(scheme)
    if samples.L != scheme.L:
        raise InvalidArgumentError(f"samples were taken with L={samples.L}, scheme has L={scheme.L}")
    N, L, h = scheme.N, scheme.L, scheme.half
    phi = scheme.phi
    kps = samples.blocks()
    if not kps:
        return Reconstruction(scheme.generator, 0, np.zeros(0), {}, [], 0.0, L)

    scale = np.linalg.norm(phi.entries, 2)
    G, Gs = _node_matrices(scheme)
    _checked_solver(G, config.spark_tol, scale)
    _checked_solver(Gs, config.spark_tol, scale)

    values = {kp: samples.block_values(kp, N, h) for kp in kps}
    c0 = [local_minimize(values[kp][0], phi, kp, L, refine=config.refine) for kp in kps]

    if config.m0_mode == "explicit":
        M0 = config.m0_value
    elif config.m0_mode == "oracle":
        M0 = compute_stability_report(config.oracle_signal, phi, scheme).M0
    else:
        M0 = _auto_m0(c0, phi_n_inverse_norm(phi), config.auto_floor)

    c1 = []
    for b in c0:
        _, zF, zB = values[b.kprime]
        for l in range(1, h + 1):
            b = extend_forward_step(b, l, zF[l - 1], scheme, M0, _G=G)
        for l in range(1, h + 1):
            b = extend_backward_step(b, l, zB[l - 1], scheme, M0, _Gs=Gs)
        b.stage = STAGE_C1
        c1.append(b)

    signed, signs = adjust_phases(c1, config.sew_overlap_tol)
    return sew(signed, scheme.generator, signs, M0)
