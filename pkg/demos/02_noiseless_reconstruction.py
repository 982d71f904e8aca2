"""Exact recovery, up to a global sign, from noiseless magnitude samples."""
import numpy as np

from siphase import (SamplingScheme, build_YL, max_reconstruction_error, meps_reconstruct, random_signal,
                     sampling_rate, take_phaseless_samples)
from siphase.harness import sample_block_range

scheme = SamplingScheme.default(L=7)
f = random_signal("two_sided", (5, 32), 4, seed=0)
print("first coefficients:", np.round(f.coeffs[:6], 3))

blocks = sample_block_range((f.k_low, f.k_high), scheme.L)
loc = build_YL(scheme, blocks)
print("blocks %s, %d samples, rate %.3f per unit" % (blocks, loc.y.size, sampling_rate(build_YL(scheme, (-50, 50)), (-300, 300))))

samples = take_phaseless_samples(f, scheme, blocks)
rec = meps_reconstruct(samples, scheme)
print("max coefficient error up to sign: %.2e" % max_reconstruction_error(rec.signal, f))
