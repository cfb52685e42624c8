"""Robustness of test decisions when up to ``k`` of ``s`` datasets are contaminated.

Everything is driven by the closed-form p-value function

    f(k) = 1 - #{I : d_I - observed > 2k / (s - k)} / N

evaluated on an already computed resample vector, so no LP is re-solved
per ``k``. ``f(0)`` is the ordinary permutation p-value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

from gsdfront.core import PerformanceTable
from gsdfront.gsd import TIE_TOL
from gsdfront.permtest import PairwiseTestResult, ResamplingPlan, all_pairwise


def contamination_pvalue(resampled: Sequence[float] | NDArray[np.float64], observed: float, k: int, s: int) -> float:
    """p-value after allowing ``k`` of ``s`` datasets to be arbitrarily replaced.

    The strict ``>`` is applied as written, with a ``1e-9`` band so that
    floating-point noise at exact ties does not count as exceeding.
    """
    d = np.asarray(resampled, dtype=float)
    if d.size == 0:
        raise ValueError("resampled must be nonempty")
    if not 0 <= k < s:
        raise ValueError(f"k must satisfy 0 <= k < s, got k={k}, s={s}")
    threshold = 2.0 * k / (s - k)
    exceed = np.count_nonzero(d - observed > threshold + TIE_TOL)
    return (d.size - exceed) / d.size


@dataclass(frozen=True)
class ContaminationCurve:
    """``values[k]`` is the p-value at ``k`` contaminated datasets, ``k = 0..k_max``."""

    label: str
    s: int
    values: tuple[float, ...]

    @property
    def k_max(self) -> int:
        return len(self.values) - 1

    def __call__(self, k: int) -> float:
        return self.values[k]

    def rows(self) -> list[tuple[str, int, float]]:
        return [(self.label, k, v) for k, v in enumerate(self.values)]


def default_k_max(s: int) -> int:
    return min(s - 1, math.ceil(s / 4))


def contamination_curve(result: PairwiseTestResult, k_max: int | None = None) -> ContaminationCurve:
    s = result.plan.s
    k_max = default_k_max(s) if k_max is None else k_max
    if not 0 <= k_max < s:
        raise ValueError("k_max must satisfy 0 <= k_max < s")
    vals = tuple(contamination_pvalue(result.resampled, result.observed, k, s) for k in range(k_max + 1))
    return ContaminationCurve(f"{result.candidate}>{result.target}", s, vals)


def aggregate_curve(target: str, curves: Mapping[str, ContaminationCurve]) -> ContaminationCurve:
    """``F_target(k)``: the pointwise maximum of the pairwise curves."""
    if not curves:
        raise ValueError("need at least one pairwise curve")
    first = next(iter(curves.values()))
    stacked = np.array([c.values for c in curves.values()])
    return ContaminationCurve(target, first.s, tuple(float(v) for v in stacked.max(axis=0)))


def _pairwise(target, table, plan, delta, pairwise):
    if pairwise is not None:
        return pairwise
    return all_pairwise(target, table, 0.05, plan, delta)


def aggregate_F(
    target: str,
    table: PerformanceTable,
    plan: ResamplingPlan | None = None,
    delta: float = 0.0,
    k: int = 0,
    pairwise: Mapping[str, PairwiseTestResult] | None = None,
) -> float:
    """Maximum over rivals of the pairwise contamination p-value at ``k``."""
    results = _pairwise(target, table, plan, delta, pairwise)
    return max(contamination_pvalue(r.resampled, r.observed, k, table.s) for r in results.values())


@dataclass(frozen=True)
class RobustDecision:
    target: str
    k: int
    alpha: float
    F: float
    reject: bool


def robustified_static_test(
    target: str,
    table: PerformanceTable,
    alpha: float = 0.05,
    plan: ResamplingPlan | None = None,
    delta: float = 0.0,
    k: int = 0,
    pairwise: Mapping[str, PairwiseTestResult] | None = None,
) -> RobustDecision:
    """Reject iff ``F_target(k) <= alpha``."""
    F = aggregate_F(target, table, plan, delta, k, pairwise)
    return RobustDecision(target, k, float(alpha), F, bool(F <= alpha))


@dataclass(frozen=True)
class RobustDynamicResult:
    target: str
    k: int
    level: float
    p_values: dict[str, float]
    s_max: tuple[str, ...]


def robustified_dynamic_test(
    target: str,
    table: PerformanceTable,
    alpha: float = 0.05,
    plan: ResamplingPlan | None = None,
    delta: float = 0.0,
    k: int = 0,
    pairwise: Mapping[str, PairwiseTestResult] | None = None,
) -> RobustDynamicResult:
    """Rivals whose pairwise ``f(k)`` stays at or below ``alpha / (k_classifiers - 1)``."""
    results = _pairwise(target, table, plan, delta, pairwise)
    level = alpha / (table.k - 1)
    ps = {c: contamination_pvalue(r.resampled, r.observed, k, table.s) for c, r in results.items()}
    return RobustDynamicResult(target, k, level, ps, tuple(c for c, p in ps.items() if p <= level))


@dataclass(frozen=True)
class BreakdownReport:
    """``k_star`` is the largest ``k`` whose p-value is still at or below ``level``; ``None`` if there is none."""

    label: str
    level: float
    k_star: int | None


def breakdown(curve: ContaminationCurve, level: float) -> BreakdownReport:
    """Direct scan of the whole curve; monotonicity is not assumed."""
    k_star = None
    for k, v in enumerate(curve.values):
        if v <= level:
            k_star = k
    return BreakdownReport(curve.label, float(level), k_star)


def breakdown_for(
    target: str,
    table: PerformanceTable,
    level: float,
    plan: ResamplingPlan | None = None,
    delta: float = 0.0,
    k_max: int | None = None,
    candidate: str | None = None,
) -> BreakdownReport:
    """Breakdown of one pair (``candidate`` given) or of the aggregate ``F_target``."""
    rivals = [candidate] if candidate is not None else [c for c in table.classifiers if c != target]
    results = all_pairwise(target, table.subset([target, *rivals]), 0.05, plan, delta)
    curves = {c: contamination_curve(r, k_max) for c, r in results.items()}
    curve = curves[candidate] if candidate is not None else aggregate_curve(target, curves)
    return breakdown(curve, level)
