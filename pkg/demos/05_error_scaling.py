"""How the reconstruction error scales with the noise level for one signal."""
import numpy as np

from siphase.harness import ExperimentSpec, run_scaling_experiment

spec = ExperimentSpec(epsilons=tuple(np.logspace(-10, -6, 9)), Ls=(7,))
r = run_scaling_experiment(spec)
print("%-10s %-10s %-10s %-10s" % ("eps", "e", "interior", "e2"))
for row in r["rows"]:
    print("%-10.1e %-10.2e %-10.2e %-10.2e" % (row["epsilon"], row["e"], row["interior"], row["e2"]))
print("slopes: e %.3f, interior %.3f, e2 %.3f" % (r["slope_e"], r["slope_interior"], r["slope_e2"]))
