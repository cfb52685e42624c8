"""Baseline comparisons: first-order stochastic dominance and the marginal front.

The marginal front runs one Friedman test per metric, followed by Nemenyi
post-hoc comparisons. A classifier leaves the front only if a single
competitor beats it significantly on every metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import stats

from gsdfront.core import PerformanceTable
from gsdfront.gsd import DominanceGraph, empirical_gsd_relation

# Studentized range quantiles at infinite degrees of freedom divided by sqrt(2),
# indexed by alpha and then by the number of groups (2..20).
NEMENYI_Q: dict[float, tuple[float, ...]] = {
    0.01: (2.5758, 2.9135, 3.1133, 3.2547, 3.3637, 3.4522, 3.5265, 3.5903, 3.6463, 3.6960,
           3.7407, 3.7813, 3.8185, 3.8527, 3.8843, 3.9138, 3.9414, 3.9674, 3.9918),
    0.05: (1.9600, 2.3437, 2.5690, 2.7278, 2.8497, 2.9483, 3.0309, 3.1017, 3.1637, 3.2187,
           3.2680, 3.3127, 3.3536, 3.3912, 3.4260, 3.4584, 3.4887, 3.5171, 3.5438),
    0.10: (1.6449, 2.0523, 2.2913, 2.4595, 2.5885, 2.6927, 2.7799, 2.8546, 2.9199, 2.9778,
           3.0297, 3.0767, 3.1197, 3.1592, 3.1957, 3.2297, 3.2615, 3.2912, 3.3192),
}
MAX_GROUPS = 20


def nemenyi_q(alpha: float, k: int) -> float:
    key = next((a for a in NEMENYI_Q if math.isclose(a, alpha)), None)
    if key is None:
        raise ValueError(f"no Nemenyi quantiles for alpha={alpha}; available: {sorted(NEMENYI_Q)}")
    if not 2 <= k <= MAX_GROUPS:
        raise ValueError(f"Nemenyi quantile table covers 2..{MAX_GROUPS} classifiers, got {k}")
    return NEMENYI_Q[key][k - 2]


def fsd_relation(table: PerformanceTable, delta: float = 0.0) -> DominanceGraph:
    """First-order stochastic dominance: the GSD relation with every metric treated as ordinal."""
    return empirical_gsd_relation(table.with_scale(table.scale.all_ordinal()), delta)


def _ranks(table: PerformanceTable, metric_index: int) -> NDArray[np.float64]:
    # rank 1 is the best classifier on a dataset; ties get average ranks
    vals = table.values[:, :, metric_index]
    return np.vstack([stats.rankdata(-row, method="average") for row in vals])


@dataclass(frozen=True)
class FriedmanResult:
    metric: str
    statistic: float
    p_value: float
    mean_ranks: tuple[float, ...]
    alpha: float

    @property
    def reject(self) -> bool:
        return self.p_value < self.alpha


def friedman_test(table: PerformanceTable, metric_index: int, alpha: float = 0.05) -> FriedmanResult:
    """Friedman rank test with datasets as blocks and a chi-square reference.

    All-tied data give statistic 0 and p-value 1.
    """
    s, k = table.s, table.k
    if s < 2 or k < 2:
        raise ValueError("Friedman test needs at least 2 datasets and 2 classifiers")
    ranks = _ranks(table, metric_index)
    R = ranks.mean(axis=0)
    chi2 = 12.0 * s / (k * (k + 1)) * (np.sum(R**2) - k * (k + 1) ** 2 / 4.0)
    ties = 0.0
    for row in ranks:
        _, counts = np.unique(row, return_counts=True)
        ties += float(np.sum(counts**3 - counts))
    denom = 1.0 - ties / (s * (k**3 - k))
    if denom <= 1e-12:
        stat, p = 0.0, 1.0
    else:
        stat = max(0.0, float(chi2 / denom))
        p = float(stats.chi2.sf(stat, k - 1))
    return FriedmanResult(table.scale.names[metric_index], stat, p, tuple(map(float, R)), float(alpha))


@dataclass(frozen=True, eq=False)
class NemenyiResult:
    """Pairwise Nemenyi comparisons on one metric.

    ``significant[i, j]`` is symmetric; :meth:`beats` adds the direction
    (lower mean rank is better).
    """

    metric: str
    alpha: float
    classifiers: tuple[str, ...]
    mean_ranks: tuple[float, ...]
    critical_difference: float
    p_values: NDArray[np.float64]
    significant: NDArray[np.bool_]
    friedman_rejected: bool

    def beats(self, winner: str, loser: str) -> bool:
        i, j = self.classifiers.index(winner), self.classifiers.index(loser)
        return bool(self.significant[i, j] and self.mean_ranks[i] < self.mean_ranks[j])


def nemenyi_pairwise(table: PerformanceTable, metric_index: int, alpha: float = 0.05) -> NemenyiResult:
    """Critical-difference comparisons of mean ranks.

    Computed even when the Friedman test does not reject; the outcome is
    recorded in ``friedman_rejected``.
    """
    s, k = table.s, table.k
    q = nemenyi_q(alpha, k)
    fr = friedman_test(table, metric_index, alpha)
    R = np.asarray(fr.mean_ranks)
    se = math.sqrt(k * (k + 1) / (6.0 * s))
    cd = q * se
    diff = np.abs(R[:, None] - R[None, :])
    p = stats.studentized_range.sf(diff / se * math.sqrt(2.0), k, np.inf)
    p = np.where(diff == 0, 1.0, np.clip(p, 0.0, 1.0))
    sig = diff > cd
    np.fill_diagonal(sig, False)
    return NemenyiResult(fr.metric, float(alpha), table.classifiers, fr.mean_ranks, cd, p, sig, fr.reject)


@dataclass(frozen=True, eq=False)
class MarginalFrontResult:
    friedman: dict[str, FriedmanResult]
    nemenyi: dict[str, NemenyiResult]
    front: tuple[str, ...]
    alpha: float


def marginal_front(table: PerformanceTable, alpha: float = 0.05) -> MarginalFrontResult:
    """Drop a classifier iff one competitor beats it significantly on all metrics.

    A metric only counts as a significant win when its Friedman test rejects.
    """
    names = table.scale.names
    nem = {names[j]: nemenyi_pairwise(table, j, alpha) for j in range(table.scale.n)}
    fried = {m: friedman_test(table, j, alpha) for j, m in enumerate(names)}
    front = []
    for c in table.classifiers:
        excluded = any(
            all(nem[m].friedman_rejected and nem[m].beats(o, c) for m in names)
            for o in table.classifiers
            if o != c
        )
        if not excluded:
            front.append(c)
    return MarginalFrontResult(fried, nem, tuple(front), float(alpha))
