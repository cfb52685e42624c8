"""How many datasets could be contaminated before a decision flips?

The p-value as a function of the number k of replaced datasets comes in
closed form from the resamples already computed, so no LP is re-solved.
"""

from __future__ import annotations

from _common import load_benchmark

from gsdfront.permtest import ResamplingPlan, all_pairwise
from gsdfront.robust import aggregate_curve, breakdown, contamination_curve, robustified_static_test

table, config = load_benchmark()
target = "SVM"
plan = ResamplingPlan.sampled(table.s, n_resamples=100, seed=config.seed)
pairwise = all_pairwise(target, table, config.alpha, plan)
curves = {c: contamination_curve(r, config.k_max) for c, r in pairwise.items()}

print("k   " + "  ".join(f"{c:>8}" for c in curves) + "   aggregate")
agg = aggregate_curve(target, curves)
for k in range(agg.k_max + 1):
    print(f"{k:<3} " + "  ".join(f"{cv(k):8.3f}" for cv in curves.values()) + f"   {agg(k):9.3f}")

level = config.alpha / (table.k - 1)
print(f"\nbreakdown of each pairwise test at level {level:.4f}:")
for rival, cv in curves.items():
    print(f"  {rival:8} k* = {breakdown(cv, level).k_star}")
print(f"static decision breakdown at alpha={config.alpha}: k* = {breakdown(agg, config.alpha).k_star}")
print("robustified static test at k=1:", robustified_static_test(target, table, config.alpha, k=1, pairwise=pairwise))
