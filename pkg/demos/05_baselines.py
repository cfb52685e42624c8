"""Per-metric rank tests as a baseline: Friedman, then Nemenyi.

A classifier leaves the marginal front only when one competitor beats it
significantly on every metric, which rarely happens with weakly
correlated metrics.
"""

from __future__ import annotations

from _common import load_benchmark

from gsdfront.baselines import marginal_front
from gsdfront.gsd import egsd_front

table, config = load_benchmark()
res = marginal_front(table, config.alpha)
for metric, fr in res.friedman.items():
    nem = res.nemenyi[metric]
    print(f"{metric}: Friedman chi2={fr.statistic:.2f}, p={fr.p_value:.4f}, CD={nem.critical_difference:.3f}")
    ranks = ", ".join(f"{c}={r:.2f}" for c, r in zip(table.classifiers, fr.mean_ranks))
    print(f"  mean ranks: {ranks}")
    wins = [(a, b) for a in table.classifiers for b in table.classifiers if nem.beats(a, b)]
    print(f"  significant wins: {wins}")

print("\nmarginal front:", res.front)
print("empirical GSD front:", egsd_front(table).members)
