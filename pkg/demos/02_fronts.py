"""Dominance relations and fronts on the bundled benchmark.

Accuracy is cardinal; the two runtimes are binned into deciles and used
as ordinal metrics, with faster runs in higher categories.
"""

from __future__ import annotations

from _common import load_benchmark

from gsdfront.baselines import fsd_relation
from gsdfront.gsd import d_matrix, egsd_front, empirical_gsd_relation, epsilon_schedule, pareto_front

table, config = load_benchmark()
print(f"{table.k} classifiers on {table.s} datasets, metrics {table.scale.names}")

d = d_matrix(table)
width = max(len(c) for c in table.classifiers)
print("\nd(row, column): minimum expected-utility advantage of row over column")
print(" " * width, *(f"{c:>8}" for c in table.classifiers))
for i, a in enumerate(table.classifiers):
    print(f"{a:>{width}}", *(f"{d[i, j]:8.3f}" for j in range(table.k)))

# a positive slack makes more classifiers removable, and the set may even be empty
print("\nPareto front:", pareto_front(table).members)
for eps in (0.0, 0.1, epsilon_schedule(table.s)):
    print(f"empirical GSD front, epsilon={eps:.3f}:", egsd_front(table, eps, d=d).members)

graph = empirical_gsd_relation(table)
print("\nGSD Hasse diagram:\n" + graph.to_dot("gsd"))
print("Treating every metric as ordinal (first-order dominance):")
print(fsd_relation(table).to_dot("fsd"))
