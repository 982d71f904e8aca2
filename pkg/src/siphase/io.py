"""CSV and JSON readers and writers for coefficients, schemes, samples and
reconstructions."""
from __future__ import annotations

import csv
import json

import numpy as np

from .errors import InvalidArgumentError
from .generator import Generator
from .sampling import ROLE_NAMES, NoisySamples, SampleLocations, SamplingScheme
from .signals import SISSignal

__all__ = [
    "read_coeffs",
    "write_coeffs",
    "read_scheme",
    "write_scheme",
    "read_samples",
    "write_samples",
    "write_reconstruction",
    "read_reconstruction",
    "write_json",
]


def _read_rows(path, required):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in required if c not in (reader.fieldnames or [])]
        if missing:
            raise InvalidArgumentError(f"{path}: missing column(s) {', '.join(missing)}")
        return list(reader)


def _read_indexed(path, value_col, generator: Generator) -> SISSignal:
    rows = _read_rows(path, ["k", value_col])
    mapping = {}
    for r in rows:
        k = int(r["k"])
        if k in mapping:
            raise InvalidArgumentError(f"{path}: duplicate index k={k}")
        mapping[k] = float(r[value_col])
    return SISSignal.from_mapping(generator, mapping)


def _write_indexed(path, value_col, f: SISSignal):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", value_col])
        for k, v in zip(f.indices.tolist(), f.coeffs.tolist()):
            w.writerow([k, repr(v)])


def read_coeffs(path, generator: Generator) -> SISSignal:
    """Coefficient CSV with header ``k,c``; rows may come in any order."""
    return _read_indexed(path, "c", generator)


def write_coeffs(path, f: SISSignal):
    _write_indexed(path, "c", f)


def read_reconstruction(path, generator: Generator) -> SISSignal:
    return _read_indexed(path, "c_epsilon", generator)


def write_reconstruction(path, f: SISSignal):
    _write_indexed(path, "c_epsilon", f)


def read_scheme(path) -> SamplingScheme:
    with open(path) as fh:
        return SamplingScheme.from_dict(json.load(fh))


def write_scheme(path, scheme: SamplingScheme):
    write_json(path, scheme.to_dict())


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def write_samples(path, samples: NoisySamples):
    """Samples CSV with header ``y,z,kprime,role,idx``."""
    loc = samples.locations
    y = loc.y
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y", "z", "kprime", "role", "idx"])
        for i in range(len(loc)):
            w.writerow([repr(float(y[i])), repr(float(samples.z[i])), int(loc.kprime[i]),
                        ROLE_NAMES[int(loc.role[i])], int(loc.idx[i])])


def read_samples(path, scheme: SamplingScheme, noise_level: float = float("nan")) -> NoisySamples:
    """Samples CSV back into :class:`NoisySamples` for ``scheme``.

    The offset of each forward/backward sample is recovered from ``y``; the
    noise level is not stored in the file.
    """
    rows = _read_rows(path, ["y", "z", "kprime", "role", "idx"])
    if not rows:
        raise InvalidArgumentError(f"{path}: no samples")
    L = scheme.L
    X = np.asarray(scheme.X, dtype=float)
    node_sets = (X, scheme.gamma, scheme.gamma_star)
    kp, role, idx, off, node, z = [], [], [], [], [], []
    for r in rows:
        name = r["role"].strip().upper()
        if name not in ROLE_NAMES:
            raise InvalidArgumentError(f"{path}: unknown role {r['role']!r}")
        ro = ROLE_NAMES.index(name)
        i, k = int(r["idx"]), int(r["kprime"])
        nodes = node_sets[ro]
        if not 0 <= i < nodes.size:
            raise InvalidArgumentError(f"{path}: node index {i} out of range for role {name}")
        t = float(nodes[i])
        y = float(r["y"])
        if ro == 0:
            o = 0
        elif ro == 1:
            o = int(round(y - t - k * L))
        else:
            o = int(round(k * L + t - y))
        if ro and not 1 <= o <= scheme.half:
            raise InvalidArgumentError(f"{path}: sample y={y} does not match scheme offsets")
        kp.append(k)
        role.append(ro)
        idx.append(i)
        off.append(o)
        node.append(t)
        z.append(float(r["z"]))
    as_int = lambda v: np.asarray(v, dtype=np.int64)
    loc = SampleLocations(as_int(kp), as_int(role), as_int(idx), as_int(off), np.asarray(node), L)
    order = np.lexsort((loc.node, loc.integer_part))
    loc = SampleLocations(loc.kprime[order], loc.role[order], loc.idx[order], loc.offset[order],
                          loc.node[order], L)
    zz = np.asarray(z)[order]
    if np.any(zz < 0):
        raise InvalidArgumentError(f"{path}: negative sample values")
    zz.setflags(write=False)
    return NoisySamples(loc, zz, float(noise_level), (int(min(kp)), int(max(kp))))
