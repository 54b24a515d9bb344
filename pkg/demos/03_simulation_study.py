"""Desk-scale Monte Carlo comparison of the three methods.

Five missingness settings (constant, covariate-driven, and three increasingly
value-driven ones) crossed with the strong-association data model, 100
replications each at n = 1000. For every method the table reports the mean
estimate and the 95% interval coverage per coefficient. Watch the bottom rows:
once missingness depends on the target itself, complete-case and ignorable-MI
coverage collapses while the random-indicator imputer stays near nominal.

Run:  python demos/03_simulation_study.py        (about a minute)
"""

from riimpute import builtin_scenario, run_scenario

MECHANISMS = ("mcar", "mar", "mnar1", "mnar2", "mnar3")
TRUE_BETA = (1.0, 0.5, 1.0)

print(f"strong-association data model, true coefficients {TRUE_BETA}")
print(f"{'setting':<8} {'method':<6} " + " ".join(f"{f'beta{j+1} (cov%)':>16}" for j in range(3)))
print("-" * 66)
for mechanism in MECHANISMS:
    config = builtin_scenario(mechanism, "strong", n=1000, replications=100,
                              master_seed=20240501)
    result = run_scenario(config, n_jobs=4)
    for method in ("cc", "mi", "ri"):
        stats = result.methods[method]
        cells = " ".join(
            f"{stats.mean_estimate[j]:+9.3f} ({100 * stats.coverage_rate[j]:3.0f})"
            for j in range(3)
        )
        label = mechanism if method == "cc" else ""
        print(f"{label:<8} {method:<6} {cells}")
    print("-" * 66)
print(f"missing fractions match the design; e.g. last setting: "
      f"{result.mean_missing_fraction:.2f}")
