"""Small Monte-Carlo success-rate table (pass a trial count to enlarge it)."""
import sys

from siphase.harness import ExperimentSpec, run_experiment

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 20
spec = ExperimentSpec(trials=trials)
res = run_experiment(spec)
rate = {(r.epsilon, r.L): r.success_rate for r in res}
print("eps     " + "".join("L=%-6d" % L for L in spec.Ls))
for e in spec.epsilons:
    print("%.0e  " % e + "".join("%-8.3f" % rate[(e, L)] for L in spec.Ls))
