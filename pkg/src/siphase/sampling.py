"""Sampling schemes, the periodic sample sets ``Y_L`` and noisy phaseless
samples taken on them.

A location in ``Y_L`` is stored exactly as ``(kprime, role, idx, offset)``:

* role ``X``:   ``x_idx + kprime*L``
* role ``FWD``: ``gamma_idx + kprime*L + offset``,        ``1 <= offset <= (L-1)/2``
* role ``BWD``: ``gamma_star_idx + kprime*L - offset``,   ``1 <= offset <= (L-1)/2``

For ``FWD``/``BWD``, ``idx`` counts within ``Gamma`` / ``Gamma*``, not ``X``.
Real positions are only materialized for output.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidArgumentError, InvalidSchemeError
from .generator import Generator, PhiMatrix, build_phi_matrix, generator_eval, is_full_spark
from .signals import SISSignal, evaluate, support_bounds

__all__ = [
    "ROLE_X",
    "ROLE_FWD",
    "ROLE_BWD",
    "ROLE_NAMES",
    "SamplingScheme",
    "StabilityCheck",
    "validate_scheme",
    "SampleLocations",
    "build_YL",
    "sampling_rate",
    "NoisySamples",
    "take_phaseless_samples",
    "sup_norm",
]

ROLE_X, ROLE_FWD, ROLE_BWD = 0, 1, 2
ROLE_NAMES = ("X", "FWD", "BWD")


@dataclass(frozen=True, eq=False)
class SamplingScheme:
    """Nodes ``X`` in (0, 1), the index subsets selecting ``Gamma`` and
    ``Gamma*`` from ``X``, and the odd period ``L``."""

    generator: Generator
    X: tuple
    gamma_idx: tuple
    gamma_star_idx: tuple
    L: int = 1

    def __post_init__(self):
        object.__setattr__(self, "X", tuple(float(x) for x in self.X))
        object.__setattr__(self, "gamma_idx", tuple(int(i) for i in self.gamma_idx))
        object.__setattr__(self, "gamma_star_idx", tuple(int(i) for i in self.gamma_star_idx))
        object.__setattr__(self, "L", int(self.L))

    @property
    def N(self) -> int:
        return self.generator.support_length

    @property
    def half(self) -> int:
        """Extension length ``(L - 1) / 2``."""
        return (self.L - 1) // 2

    @property
    def nodes(self) -> np.ndarray:
        return np.array(self.X)

    @property
    def gamma(self) -> np.ndarray:
        return self.nodes[list(self.gamma_idx)]

    @property
    def gamma_star(self) -> np.ndarray:
        return self.nodes[list(self.gamma_star_idx)]

    @property
    def gamma_star_star(self) -> np.ndarray:
        return self.gamma_star + self.N - 1

    @cached_property
    def phi(self) -> PhiMatrix:
        return build_phi_matrix(self.generator, self.X)

    def with_L(self, L: int) -> "SamplingScheme":
        return SamplingScheme(self.generator, self.X, self.gamma_idx, self.gamma_star_idx, L)

    def to_dict(self) -> dict:
        return {
            "generator": self.generator.to_dict(),
            "X": list(self.X),
            "gamma_idx": list(self.gamma_idx),
            "gamma_star_idx": list(self.gamma_star_idx),
            "L": self.L,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingScheme":
        try:
            return cls(Generator.from_dict(d["generator"]), d["X"], d["gamma_idx"],
                       d["gamma_star_idx"], d.get("L", 1))
        except KeyError as exc:
            raise InvalidSchemeError(f"scheme is missing field {exc.args[0]!r}") from None

    @classmethod
    def default(cls, L: int = 7) -> "SamplingScheme":
        """Cubic splines, ``X = {m/8}``, ``Gamma = Gamma* = {1/8, 3/8, 5/8, 7/8}``."""
        return cls(Generator.bspline(4), [m / 8 for m in range(1, 8)],
                   [0, 2, 4, 6], [0, 2, 4, 6], L)


@dataclass(frozen=True)
class StabilityCheck:
    full_spark: bool
    min_phi_gamma: float
    min_phi_gamma_star_star: float

    @property
    def node_min(self) -> float:
        return min(self.min_phi_gamma, self.min_phi_gamma_star_star)


def validate_scheme(scheme: SamplingScheme, g: Generator | None = None,
                    spark_tol: float | None = None) -> StabilityCheck:
    """Check every requirement on a scheme; raise :class:`InvalidSchemeError`
    naming the first violation."""
    if g is not None and g != scheme.generator:
        scheme = SamplingScheme(g, scheme.X, scheme.gamma_idx, scheme.gamma_star_idx, scheme.L)
    N = scheme.N
    if N < 2:
        raise InvalidSchemeError(f"support length must be at least 2, got {N}")
    if scheme.L < 1 or scheme.L % 2 == 0:
        raise InvalidSchemeError(f"L must be an odd positive integer, got {scheme.L}")
    phi = build_phi_matrix(scheme.generator, scheme.X)
    for name, ids in (("gamma_idx", scheme.gamma_idx), ("gamma_star_idx", scheme.gamma_star_idx)):
        if len(ids) != N:
            raise InvalidSchemeError(f"{name} must select exactly N = {N} nodes, got {len(ids)}")
        if len(set(ids)) != N:
            raise InvalidSchemeError(f"{name} has repeated indices")
        if min(ids) < 0 or max(ids) >= 2 * N - 1:
            raise InvalidSchemeError(f"{name} indexes outside X")
    if not is_full_spark(phi, spark_tol):
        raise InvalidSchemeError("Phi is not of full spark on X")
    g_vals = np.abs(generator_eval(scheme.generator, scheme.gamma))
    gss_vals = np.abs(generator_eval(scheme.generator, scheme.gamma_star_star))
    if np.any(g_vals == 0.0):
        raise InvalidSchemeError("phi vanishes at a Gamma node")
    if np.any(gss_vals == 0.0):
        raise InvalidSchemeError("phi vanishes at a Gamma* + N - 1 node")
    return StabilityCheck(True, float(g_vals.min()), float(gss_vals.min()))


@dataclass(frozen=True, eq=False)
class SampleLocations:
    """Exact, sorted sample locations.  All arrays have equal length."""

    kprime: np.ndarray
    role: np.ndarray
    idx: np.ndarray
    offset: np.ndarray
    node: np.ndarray
    L: int

    def __len__(self):
        return self.kprime.size

    @property
    def integer_part(self) -> np.ndarray:
        sign = np.where(self.role == ROLE_BWD, -1, 1)
        return self.kprime * self.L + sign * self.offset

    @property
    def y(self) -> np.ndarray:
        return self.integer_part + self.node


def _empty_locations(L):
    e = np.zeros(0, dtype=np.int64)
    return SampleLocations(e, e.copy(), e.copy(), e.copy(), np.zeros(0), L)


def build_YL(scheme: SamplingScheme, kprime_range) -> SampleLocations:
    """Enumerate ``Y_L`` over blocks ``kprime_range = (lo, hi)`` (inclusive).

    Locations come out sorted by position.  Coincident locations are kept
    once.
    """
    lo, hi = (int(v) for v in kprime_range)
    if hi < lo:
        return _empty_locations(scheme.L)
    N, h = scheme.N, scheme.half
    X, gam, gams = scheme.nodes, scheme.gamma, scheme.gamma_star
    rows = []
    for kp in range(lo, hi + 1):
        for m in range(2 * N - 1):
            rows.append((kp, ROLE_X, m, 0, X[m]))
        for l in range(1, h + 1):
            for n in range(N):
                rows.append((kp, ROLE_FWD, n, l, gam[n]))
        for l in range(1, h + 1):
            for n in range(N):
                rows.append((kp, ROLE_BWD, n, l, gams[n]))
    kp = np.array([r[0] for r in rows], dtype=np.int64)
    role = np.array([r[1] for r in rows], dtype=np.int64)
    idx = np.array([r[2] for r in rows], dtype=np.int64)
    off = np.array([r[3] for r in rows], dtype=np.int64)
    node = np.array([r[4] for r in rows], dtype=float)
    ipart = kp * scheme.L + np.where(role == ROLE_BWD, -off, off)
    order = np.lexsort((node, ipart))
    ipart, node = ipart[order], node[order]
    keep = np.ones(order.size, dtype=bool)
    keep[1:] = (ipart[1:] != ipart[:-1]) | (node[1:] != node[:-1])
    sel = order[keep]
    return SampleLocations(kp[sel], role[sel], idx[sel], off[sel], node[keep], scheme.L)


def sampling_rate(locations, window) -> float:
    """``#(locations in [a, b]) / (b - a)``."""
    a, b = window
    if b <= a:
        raise InvalidArgumentError("window must satisfy b > a")
    y = locations.y if isinstance(locations, SampleLocations) else np.asarray(locations, dtype=float)
    if y.size == 0:
        return 0.0
    return float(np.count_nonzero((y >= a) & (y <= b)) / (b - a))


def sup_norm(f: SISSignal, per_unit: int = 64) -> float:
    """``max |f|`` on a grid of ``per_unit`` points per unit interval over
    the support of ``f``.  Approximate."""
    if f.is_zero():
        return 0.0
    kmin, kmax = support_bounds(f)
    a, b = kmin, kmax + f.N
    t = np.linspace(a, b, per_unit * (b - a) + 1)
    return float(np.max(np.abs(evaluate(f, t))))


@dataclass(frozen=True, eq=False)
class NoisySamples:
    """Phaseless samples ``z(y) >= 0`` on ``Y_L`` over a block range."""

    locations: SampleLocations
    z: np.ndarray
    noise_level: float
    block_range: tuple

    def __len__(self):
        return self.z.size

    @property
    def y(self) -> np.ndarray:
        return self.locations.y

    @property
    def L(self) -> int:
        return self.locations.L

    def blocks(self) -> list[int]:
        return sorted(set(self.locations.kprime.tolist()))

    @cached_property
    def _index(self):
        loc = self.locations
        table = {}
        for i in range(loc.kprime.size):
            table[(int(loc.kprime[i]), int(loc.role[i]), int(loc.offset[i]), int(loc.idx[i]))] = i
        return table

    def value(self, kprime: int, role: int, offset: int, idx: int) -> float:
        return float(self.z[self._index[(kprime, role, offset, idx)]])

    def block_values(self, kprime: int, N: int, half: int):
        """Samples of one block as ``(zX, zF, zB)``.

        ``zX[m]`` is at ``x_m + kprime*L``; ``zF[l-1, n]`` at
        ``gamma_n + kprime*L + l``; ``zB[l-1, n]`` at ``gamma*_n + kprime*L - l``.
        """
        get = self._index
        zX = np.array([self.z[get[(kprime, ROLE_X, 0, m)]] for m in range(2 * N - 1)])
        zF = np.array([[self.z[get[(kprime, ROLE_FWD, l, n)]] for n in range(N)]
                       for l in range(1, half + 1)]).reshape(half, N)
        zB = np.array([[self.z[get[(kprime, ROLE_BWD, l, n)]] for n in range(N)]
                       for l in range(1, half + 1)]).reshape(half, N)
        return zX, zF, zB


def take_phaseless_samples(f: SISSignal, scheme: SamplingScheme, kprime_range, eps: float = 0.0,
                           model: str = "absolute", seed=None) -> NoisySamples:
    """Sample ``|f|^2`` on ``Y_L`` and add bounded uniform noise.

    ``model="absolute"`` adds ``u``; ``model="relative"`` adds ``u * ||f||_inf^2``
    with ``u ~ U[-eps, eps]`` drawn once per location in sorted order from
    ``numpy.random.default_rng(seed)``.  Results are clamped at 0.
    """
    if eps < 0:
        raise InvalidArgumentError("noise level must be nonnegative")
    if model not in ("absolute", "relative"):
        raise InvalidArgumentError(f"unknown noise model {model!r}")
    loc = build_YL(scheme, kprime_range)
    clean = np.asarray(evaluate(f, loc.y), dtype=float).reshape(-1) ** 2
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = rng.uniform(-eps, eps, size=clean.size) if clean.size else np.zeros(0)
    scale = sup_norm(f) ** 2 if model == "relative" else 1.0
    z = np.maximum(clean + u * scale, 0.0) if eps > 0 else clean
    z.setflags(write=False)
    return NoisySamples(loc, z, float(eps), tuple(int(v) for v in kprime_range))
