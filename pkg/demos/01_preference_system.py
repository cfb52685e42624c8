"""How observed points become an LP over utility functions.

Two classifiers measured on one cardinal and one ordinal metric. The
constraint system on the pooled points is printed as the LP that the
statistic solves.
"""

from __future__ import annotations

import io

import numpy as np

from gsdfront.core import ScaleSpec
from gsdfront.lp import solve, write_lp
from gsdfront.prefsys import build_constraints, check_consistency, granularity, r1_compare, r2_compare

scale = ScaleSpec.of(("accuracy", "cardinal"), ("speed", "ordinal"))
points = np.array([[0.9, 0.25], [0.7, 0.75], [0.8, 0.55], [0.6, 0.35]])

# pointwise order on single points, and the order on pairs of points
print("(0.9,0.25) vs (0.7,0.75):", r1_compare(points[0], points[1]).name)
print("(0.8,0.55) vs (0.6,0.35):", r1_compare(points[2], points[3]).name)
print("pair comparison:", r2_compare((points[2], points[3]), ((0.7, 0.75), (0.6, 0.35)), scale).name)

cs = build_constraints(points, scale)
print(f"\n{cs.n_variables} utility variables (points plus the anchors 0 and 1)")
print(f"{len(cs.margined)} inequality rows, {len(cs.equalities)} equality rows")
print("consistent:", check_consistency(cs))

g = granularity(cs)
print(f"largest feasible margin xi* = {g.xi_star:.4f}")
for delta in (0.0, 0.5, 1.0):
    print(f"  delta={delta:.1f} -> margin {g.mu_of(delta):.4f}")

# the LP for "expected utility of the first two points minus the last two"
objective = np.zeros(cs.n_variables)
for p in points[:2]:
    objective[cs.index_of(p)] += 0.5
for p in points[2:]:
    objective[cs.index_of(p)] -= 0.5
problem = cs.lp(objective, 0.0)
buf = io.StringIO()
write_lp(problem, buf)
print("\n" + buf.getvalue())
print("minimum:", round(solve(problem).objective_value, 6))
