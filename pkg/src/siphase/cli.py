"""``siphase`` command line: validate, sample, reconstruct, experiment, scaling."""
from __future__ import annotations

import argparse
import json
import logging
import sys


from . import io as sio
from .errors import InvalidArgumentError, InvalidSchemeError, SchemeDegenerateError, SiphaseError
from .harness import load_spec, results_to_csv, run_experiment, run_scaling_experiment, sample_block_range
from .meps import MEPSConfig, meps_reconstruct
from .sampling import take_phaseless_samples, validate_scheme
from .signals import support_bounds

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SCHEME = 2
EXIT_IO = 3


def _cmd_validate(args):
    scheme = sio.read_scheme(args.scheme)
    check = validate_scheme(scheme)
    print(json.dumps({
        "valid": True,
        "N": scheme.N,
        "L": scheme.L,
        "full_spark": check.full_spark,
        "min_phi_gamma": check.min_phi_gamma,
        "min_phi_gamma_star_star": check.min_phi_gamma_star_star,
        "phi_n_inv_norm": _inv_norm(scheme),
    }, indent=2))


def _inv_norm(scheme):
    from .generator import phi_n_inverse_norm

    return phi_n_inverse_norm(scheme.phi)


def _cmd_sample(args):
    scheme = sio.read_scheme(args.scheme)
    validate_scheme(scheme)
    f = sio.read_coeffs(args.coeffs, scheme.generator)
    if args.blocks:
        kr = tuple(args.blocks)
    else:
        kr = sample_block_range(support_bounds(f), scheme.L)
    samples = take_phaseless_samples(f, scheme, kr, args.eps, args.model, args.seed)
    sio.write_samples(args.out, samples)


def _m0_config(spec: str, scheme):
    if spec == "auto":
        return MEPSConfig.auto()
    if spec.startswith("oracle:"):
        return MEPSConfig.oracle(sio.read_coeffs(spec[len("oracle:"):], scheme.generator))
    try:
        return MEPSConfig.explicit(float(spec))
    except ValueError:
        raise InvalidArgumentError(f"--m0 must be a number, 'auto' or 'oracle:<coeffs.csv>', got {spec!r}") from None


def _cmd_reconstruct(args):
    scheme = sio.read_scheme(args.scheme)
    validate_scheme(scheme)
    samples = sio.read_samples(args.samples, scheme)
    rec = meps_reconstruct(samples, scheme, config=_m0_config(args.m0, scheme))
    sio.write_reconstruction(args.out, rec.signal)
    if args.diag:
        sio.write_json(args.diag, rec.diagnostics())


def _cmd_experiment(args):
    spec = load_spec(args.config)
    validate_scheme(spec.scheme)
    results = run_experiment(spec, workers=args.workers, out=args.out)
    if args.out is None:
        sys.stdout.write(results_to_csv(results))


def _cmd_scaling(args):
    spec = load_spec(args.config)
    validate_scheme(spec.scheme)
    report = run_scaling_experiment(spec, L=args.L)
    if args.out:
        sio.write_json(args.out, report)
    else:
        print(json.dumps(report, indent=2))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="siphase", description="Phase retrieval of shift-invariant signals.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a sampling scheme")
    s.add_argument("--scheme", required=True)
    s.set_defaults(func=_cmd_validate)

    s = sub.add_parser("sample", help="take noisy phaseless samples of a signal")
    s.add_argument("--scheme", required=True)
    s.add_argument("--coeffs", required=True)
    s.add_argument("--eps", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--model", choices=("absolute", "relative"), default="relative")
    s.add_argument("--blocks", type=int, nargs=2, metavar=("KMIN", "KMAX"),
                   help="block range (default: the support's blocks plus one on each side)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_sample)

    s = sub.add_parser("reconstruct", help="run MEPS on a samples file")
    s.add_argument("--scheme", required=True)
    s.add_argument("--samples", required=True)
    s.add_argument("--m0", default="0", help="threshold value, 'auto', or 'oracle:<coeffs.csv>'")
    s.add_argument("--out", required=True)
    s.add_argument("--diag")
    s.set_defaults(func=_cmd_reconstruct)

    s = sub.add_parser("experiment", help="success-rate grid")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=_cmd_experiment)

    s = sub.add_parser("scaling", help="error-versus-noise slopes for one signal")
    s.add_argument("--config", required=True)
    s.add_argument("--L", type=int, default=None)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_scaling)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (InvalidSchemeError, SchemeDegenerateError) as exc:
        print(f"siphase: invalid scheme: {exc}", file=sys.stderr)
        return EXIT_SCHEME
    except (OSError, json.JSONDecodeError) as exc:
        print(f"siphase: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SiphaseError, ValueError, KeyError) as exc:
        print(f"siphase: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
