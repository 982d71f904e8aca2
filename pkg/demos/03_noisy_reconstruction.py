"""Noisy samples: stability constants, the branch threshold and diagnostics."""
from collections import Counter

from siphase import (MEPSConfig, SamplingScheme, compute_stability_report, max_reconstruction_error, meps_reconstruct,
                     random_signal, take_phaseless_samples)
from siphase.harness import sample_block_range

scheme = SamplingScheme.default(L=7)
f = random_signal("two_sided", (5, 32), 4, seed=3)
rep = compute_stability_report(f, scheme.phi, scheme)
print("S_f=%.3g  M_f=%.3g  C=%.3g  M0=%.3g  budget=%.3g" % (rep.S_f, rep.M_f, rep.C_f_phi, rep.M0, rep.noise_budget))

blocks = sample_block_range((f.k_low, f.k_high), scheme.L)
for eps in (1e-9, 1e-7, 1e-5):
    s = take_phaseless_samples(f, scheme, blocks, eps, "relative", seed=1)
    for name, cfg in (("oracle", MEPSConfig.oracle(f)), ("M0=1e-4", MEPSConfig.explicit(1e-4))):
        rec = meps_reconstruct(s, scheme, config=cfg)
        d = rec.diagnostics()
        branches = Counter(br for b in d["blocks"] for br in b["branch_taken"])
        print("eps=%.0e %-8s e=%.2e  branches=%s" % (eps, name, max_reconstruction_error(rec.signal, f), dict(branches)))
