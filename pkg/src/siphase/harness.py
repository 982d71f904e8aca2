"""Random signals, error metrics and Monte-Carlo success-rate experiments."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .generator import Generator
from .meps import MEPSConfig, meps_reconstruct, sew_index
from .sampling import SamplingScheme, take_phaseless_samples
from .signals import SISSignal, is_nonseparable

log = logging.getLogger(__name__)

__all__ = [
    "TWO_SIDED",
    "ONE_PHASE",
    "random_signal",
    "max_reconstruction_error",
    "max_squared_error",
    "interior_error",
    "sample_block_range",
    "ExperimentSpec",
    "CellResult",
    "m0_config",
    "run_trial",
    "run_experiment",
    "results_to_csv",
    "run_scaling_experiment",
    "RESULTS_HEADER",
]

TWO_SIDED = "two_sided"
ONE_PHASE = "one_phase"
RESULTS_HEADER = ["epsilon", "L", "trials", "success_rate", "mean_e", "max_e", "mean_e2"]


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_signal(model: str, support, N: int | Generator, seed=None) -> SISSignal:
    """Draw ``c(k)``, ``K_- <= k <= K_+``, i.i.d. from the coefficient model.

    ``two_sided``: uniform on ``[-1, 1]`` minus ``(-0.1, 0.1)`` (rejection
    sampling).  ``one_phase``: uniform on ``[0.1, 1]``.
    """
    kmin, kmax = (int(v) for v in support)
    if kmax < kmin:
        raise InvalidArgumentError("support must satisfy K_- <= K_+")
    g = N if isinstance(N, Generator) else Generator.bspline(N)
    rng = _rng(seed)
    n = kmax - kmin + 1
    while True:
        if model == TWO_SIDED:
            c = np.empty(0)
            while c.size < n:
                draw = rng.uniform(-1.0, 1.0, size=2 * n)
                c = np.concatenate([c, draw[np.abs(draw) >= 0.1]])
            c = c[:n]
        elif model == ONE_PHASE:
            c = rng.uniform(0.1, 1.0, size=n)
        else:
            raise InvalidArgumentError(f"unknown coefficient model {model!r}")
        f = SISSignal(g, c, kmin)
        if g.support_length < 2 or is_nonseparable(f):
            return f
        raise AssertionError("coefficients bounded away from zero cannot be separable")


def _common(c_rec: SISSignal, c_true: SISSignal):
    lo = min(c_rec.k_low, c_true.k_low)
    hi = max(c_rec.k_high, c_true.k_high)
    return c_rec.on_range(lo, hi), c_true.on_range(lo, hi), lo


def _as_signal(c, ref):
    if isinstance(c, SISSignal):
        return c
    if hasattr(c, "signal"):
        return c.signal
    return SISSignal(ref.generator, c, ref.k_low)


def max_reconstruction_error(c_rec, c_true) -> float:
    """``min_{delta = +-1} max_k |c_rec(k) - delta c_true(k)|``."""
    c_true = _as_signal(c_true, None) if isinstance(c_true, SISSignal) else c_true
    a, b, _ = _common(_as_signal(c_rec, c_true), c_true)
    if a.size == 0:
        return 0.0
    return float(min(np.max(np.abs(a - b)), np.max(np.abs(a + b))))


def max_squared_error(c_rec, c_true) -> float:
    """``max_k |c_rec(k)^2 - c_true(k)^2|``."""
    a, b, _ = _common(_as_signal(c_rec, c_true), c_true)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a**2 - b**2)))


def interior_error(c_rec, c_true: SISSignal, margin: int | None = None) -> float:
    """Sign-matched error on ``K_- + N <= k <= K_+ - N``.

    The sign is the one minimizing the global error.
    """
    from .signals import support_bounds

    a, b, lo = _common(_as_signal(c_rec, c_true), c_true)
    delta = 1.0 if np.max(np.abs(a - b)) <= np.max(np.abs(a + b)) else -1.0
    kmin, kmax = support_bounds(c_true)
    m = c_true.N if margin is None else margin
    ks = np.arange(kmin + m, kmax - m + 1)
    if ks.size == 0:
        return 0.0
    i = ks - lo
    return float(np.max(np.abs(a[i] - delta * b[i])))


def sample_block_range(support, L: int) -> tuple[int, int]:
    """Blocks owning ``K_-..K_+``, padded by one block on each side."""
    kmin, kmax = support
    return int(sew_index(kmin, L)) - 1, int(sew_index(kmax, L)) + 1


@dataclass
class ExperimentSpec:
    """Monte-Carlo grid over noise levels and periods ``L``.

    The scheme's own ``L`` is ignored; each cell uses its grid value.
    """

    scheme: SamplingScheme = field(default_factory=SamplingScheme.default)
    model: str = TWO_SIDED
    support: tuple = (5, 32)
    epsilons: tuple = (1e-5, 1e-6, 1e-7, 1e-8, 1e-9)
    Ls: tuple = (7, 11, 15, 23, 31, 47)
    trials: int = 200
    threshold: float = 0.1
    seed: int = 0
    m0: str | float = "oracle"
    noise_model: str = "relative"

    def __post_init__(self):
        self.support = tuple(int(v) for v in self.support)
        self.epsilons = tuple(float(e) for e in self.epsilons)
        self.Ls = tuple(int(L) for L in self.Ls)
        if self.trials < 1:
            raise InvalidArgumentError("trials must be >= 1")
        if not self.threshold > 0:
            raise InvalidArgumentError("threshold must be positive")
        if any(L < 1 or L % 2 == 0 for L in self.Ls):
            raise InvalidArgumentError("every L must be odd and positive")
        if self.model not in (TWO_SIDED, ONE_PHASE):
            raise InvalidArgumentError(f"unknown coefficient model {self.model!r}")
        if self.m0 not in ("oracle", "auto"):
            try:
                self.m0 = float(self.m0)
            except (TypeError, ValueError):
                raise InvalidArgumentError("M0 must be 'oracle', 'auto' or a number") from None
            if not self.m0 >= 0:
                raise InvalidArgumentError("explicit M0 must be >= 0")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        scheme = d.pop("scheme", None)
        gen = d.pop("generator", None)
        if scheme is not None:
            if gen is not None and "generator" not in scheme:
                scheme = {**scheme, "generator": gen}
            d["scheme"] = SamplingScheme.from_dict(scheme)
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scheme"] = self.scheme.to_dict()
        d["support"] = list(self.support)
        d["epsilons"] = list(self.epsilons)
        d["Ls"] = list(self.Ls)
        return d


@dataclass(frozen=True)
class CellResult:
    epsilon: float
    L: int
    trials: int
    success_rate: float
    mean_e: float
    max_e: float
    mean_e2: float
    successes: int
    seed: int


def _signal_seed(spec: ExperimentSpec, trial: int):
    return np.random.SeedSequence([spec.seed, 0, trial])


def _noise_seed(spec: ExperimentSpec, i_eps: int, i_L: int, trial: int):
    return np.random.SeedSequence([spec.seed, 1, i_eps, i_L, trial])


def m0_config(m0, f: SISSignal) -> MEPSConfig:
    """``"oracle"``, ``"auto"`` or a nonnegative number (explicit threshold)."""
    if m0 == "oracle":
        return MEPSConfig.oracle(f)
    if m0 == "auto":
        return MEPSConfig.auto()
    return MEPSConfig.explicit(float(m0))


def run_trial(f: SISSignal, scheme: SamplingScheme, eps: float, noise_seed, m0="oracle",
              noise_model: str = "relative"):
    """Sample ``f``, reconstruct, and return ``(reconstruction, e, e2)``."""
    from .signals import support_bounds

    kr = sample_block_range(support_bounds(f), scheme.L)
    samples = take_phaseless_samples(f, scheme, kr, eps, noise_model, np.random.default_rng(noise_seed))
    rec = meps_reconstruct(samples, scheme, config=m0_config(m0, f))
    return rec, max_reconstruction_error(rec.signal, f), max_squared_error(rec.signal, f)


def _run_cell(args):
    spec, i_eps, i_L = args
    eps, L = spec.epsilons[i_eps], spec.Ls[i_L]
    scheme = spec.scheme.with_L(L)
    es, e2s = [], []
    for t in range(spec.trials):
        f = random_signal(spec.model, spec.support, spec.scheme.generator,
                          np.random.default_rng(_signal_seed(spec, t)))
        _, e, e2 = run_trial(f, scheme, eps, _noise_seed(spec, i_eps, i_L, t), spec.m0, spec.noise_model)
        es.append(e)
        e2s.append(e2)
    es = np.array(es)
    wins = int(np.count_nonzero(es < spec.threshold))
    return CellResult(eps, L, spec.trials, wins / spec.trials, float(es.mean()), float(es.max()),
                      float(np.mean(e2s)), wins, spec.seed)


def run_experiment(spec: ExperimentSpec, workers: int = 1, out=None) -> list[CellResult]:
    """Success rate of every ``(epsilon, L)`` cell.

    Trial ``t`` uses the same signal in every cell (seeded from the master
    seed and ``t``); its noise is seeded from the master seed, the cell
    coordinates and ``t``.  Results do not depend on ``workers``.  When
    ``out`` is a path, rows are flushed to it as cells complete.
    """
    jobs = [(spec, i, j) for i in range(len(spec.epsilons)) for j in range(len(spec.Ls))]
    results = []
    fh = open(out, "w", newline="") if out is not None else None
    try:
        writer = None
        if fh is not None:
            writer = csv.writer(fh)
            writer.writerow(RESULTS_HEADER)
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                it = pool.map(_run_cell, jobs)
                for r in it:
                    results.append(r)
                    _emit(writer, fh, r)
        else:
            for job in jobs:
                r = _run_cell(job)
                results.append(r)
                _emit(writer, fh, r)
    finally:
        if fh is not None:
            fh.close()
    return results


def _row(r: CellResult):
    return [repr(r.epsilon), r.L, r.trials, repr(r.success_rate), repr(r.mean_e), repr(r.max_e),
            repr(r.mean_e2)]


def _emit(writer, fh, r):
    log.info("eps=%g L=%d success=%.3f", r.epsilon, r.L, r.success_rate)
    if writer is not None:
        writer.writerow(_row(r))
        fh.flush()


def results_to_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULTS_HEADER)
    for r in results:
        w.writerow(_row(r))
    return buf.getvalue()


def _slope(x, y) -> float:
    x, y = np.log10(np.asarray(x)), np.log10(np.asarray(y))
    return float(np.polyfit(x, y, 1)[0])


def run_scaling_experiment(spec: ExperimentSpec, L: int | None = None, signal_seed: int | None = None,
                           noise_seed: int | None = None) -> dict:
    """Log-log slopes of the global, interior and squared errors against
    epsilon for one fixed signal.

    One noise draw is reused across the epsilon grid (scaled by epsilon), so
    the slopes reflect the reconstruction rather than sampling variation.
    """
    eps = np.array(sorted(spec.epsilons))
    if eps.size < 2 or math.log10(eps[-1] / eps[0]) < 3:
        raise InvalidArgumentError("epsilon grid must span at least 3 decades")
    L = spec.Ls[0] if L is None else int(L)
    scheme = spec.scheme.with_L(L)
    sseed = spec.seed if signal_seed is None else signal_seed
    nseed = spec.seed + 1 if noise_seed is None else noise_seed
    f = random_signal(spec.model, spec.support, spec.scheme.generator, sseed)
    rows = []
    for e in eps:
        rec, err, err2 = run_trial(f, scheme, float(e), nseed, spec.m0, spec.noise_model)
        rows.append({"epsilon": float(e), "e": err, "interior": interior_error(rec.signal, f), "e2": err2})
    return {
        "L": L,
        "signal_seed": int(sseed),
        "noise_seed": int(nseed),
        "rows": rows,
        "slope_e": _slope(eps, [r["e"] for r in rows]),
        "slope_interior": _slope(eps, [r["interior"] for r in rows]),
        "slope_e2": _slope(eps, [r["e2"] for r in rows]),
    }


def load_spec(path) -> ExperimentSpec:
    with open(path) as fh:
        return ExperimentSpec.from_dict(json.load(fh))
