"""Does the estimated front approach the true one as the suite grows?

The default population model has a known front {A, B}. We sample suites of
increasing size and compare the front estimated with slack s**(-1/4).
"""

from __future__ import annotations

from gsdfront.synth import consistency_experiment, default_model, population_d_matrix, population_gsd_front

model = default_model()
print("population d matrix:")
print(population_d_matrix(model).round(3))
print("true front:", population_gsd_front(model).members)

report = consistency_experiment(model, [25, 100, 400], runs=20, seed=1)
print("\n   s  exact  superset")
for s in report.s_grid:
    print(f"{s:4}  {report.recovery_rate[s]:5.2f}  {report.superset_rate[s]:8.2f}")
