"""Permutation tests for membership of a classifier in the GSD-front.

For a target ``C`` and a rival ``C'`` the null hypothesis is that ``C'``
weakly GSD-dominates ``C``. Small values of ``d(C', C)`` speak against it.
The observed statistic is compared with the statistics of relabelled
splits of the pooled sample ``w = x ++ y`` (``x`` from ``C'``, ``y`` from
``C``): for an index set ``I`` of size ``s``, ``d_I`` integrates utilities
against ``pi(w[I]) - pi(w[not I])``. The observed split is ``I = {0..s-1}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

import numpy as np
from numpy.typing import NDArray

from gsdfront.core import NumericalError, PerformanceTable, ScaleSpec, TestConfig
from gsdfront.gsd import TIE_TOL, PairSystem

Sampler = Callable[[int, int, int], Iterable[Iterable[int]]]


class ResamplingMode(str, Enum):
    EXHAUSTIVE = "exhaustive"
    SAMPLED = "sampled"


def enumerating_sampler(s: int, n: int, seed: int) -> Iterable[tuple[int, ...]]:
    """Deterministic sampler that walks through all splits in lexicographic order."""
    return itertools.islice(itertools.combinations(range(2 * s), s), n)


@dataclass(frozen=True)
class ResamplingPlan:
    """Which index sets ``I`` to evaluate.

    In sampled mode draw ``j`` uses ``numpy.random.default_rng([seed, j])``,
    so draws are reproducible individually. ``include_observed`` appends the
    observed split as one extra resample. A custom ``sampler`` replaces the
    random draws (it receives ``s``, ``n_resamples`` and ``seed``).
    """

    s: int
    mode: ResamplingMode = ResamplingMode.SAMPLED
    n_resamples: int = 1000
    seed: int = 0
    include_observed: bool = True
    sampler: Sampler | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", ResamplingMode(self.mode))
        if self.s < 1:
            raise ValueError("s must be positive")
        if self.n_resamples < 1:
            raise ValueError("n_resamples must be positive")

    @classmethod
    def exhaustive(cls, s: int) -> "ResamplingPlan":
        return cls(s, ResamplingMode.EXHAUSTIVE, include_observed=False)

    @classmethod
    def sampled(cls, s: int, n_resamples: int = 1000, seed: int = 0, include_observed: bool = True) -> "ResamplingPlan":
        return cls(s, ResamplingMode.SAMPLED, n_resamples, seed, include_observed)

    @classmethod
    def from_config(cls, config: TestConfig, s: int) -> "ResamplingPlan":
        if config.exhaustive:
            return cls.exhaustive(s)
        return cls.sampled(s, config.n_resamples, config.seed)

    @property
    def r(self) -> int:
        if self.mode is ResamplingMode.EXHAUSTIVE:
            return math.comb(2 * self.s, self.s)
        return self.n_resamples + int(self.include_observed)

    def index_sets(self) -> NDArray[np.int64]:
        """``(r, s)`` array of sorted index sets into the pooled sample."""
        s = self.s
        if self.mode is ResamplingMode.EXHAUSTIVE:
            rows = list(itertools.combinations(range(2 * s), s))
        elif self.sampler is not None:
            rows = [tuple(sorted(I)) for I in self.sampler(s, self.n_resamples, self.seed)]
            if len(rows) != self.n_resamples or any(len(set(I)) != s for I in rows):
                raise ValueError("sampler must yield n_resamples index sets of s distinct indices")
        else:
            rows = [
                tuple(np.sort(np.random.default_rng([self.seed, j]).permutation(2 * s)[:s]))
                for j in range(self.n_resamples)
            ]
        if self.mode is ResamplingMode.SAMPLED and self.include_observed:
            rows.append(tuple(range(s)))
        return np.asarray(rows, dtype=np.int64).reshape(-1, s)


def _check_samples(x: NDArray[np.float64], y: NDArray[np.float64], plan: ResamplingPlan) -> None:
    if x.shape != y.shape:
        raise ValueError("both samples must have the same shape")
    if x.shape[0] != plan.s:
        raise ValueError(f"plan is for s={plan.s} but samples have {x.shape[0]} rows")
    if plan.s < 2:
        raise ValueError("permutation tests need s >= 2")


def _resample(system: PairSystem, plan: ResamplingPlan, delta: float) -> NDArray[np.float64]:
    s = plan.s
    pool = np.arange(2 * s)
    out = []
    for I in plan.index_sets():
        mask = np.zeros(2 * s, dtype=bool)
        mask[I] = True
        c = system.objective(pool[mask], pool[~mask])
        try:
            out.append(system.value(c, delta))
        except NumericalError as exc:
            raise NumericalError(f"resample I={tuple(int(i) for i in I)}: {exc}") from exc
    return np.sort(np.asarray(out))


def resample_statistics(
    x: NDArray[np.float64],
    y: NDArray[np.float64],
    scale: ScaleSpec,
    plan: ResamplingPlan,
    delta: float = 0.0,
) -> NDArray[np.float64]:
    """Sorted statistics ``d_I`` over the plan's index sets.

    The constraint system of the pooled points is built once; resamples
    only change the objective.
    """
    x, y = np.atleast_2d(x), np.atleast_2d(y)
    _check_samples(x, y, plan)
    return _resample(PairSystem.for_samples(x, y, scale), plan, delta)


@dataclass(frozen=True, eq=False)
class PairwiseTestResult:
    """Outcome of the test of "``candidate`` weakly GSD-dominates ``target``".

    ``ell = floor(alpha * r)``; the test rejects iff ``observed`` lies
    strictly below the ``ell``-th smallest resample. With ``ell = 0`` it
    can never reject, which ``never_rejects`` flags.
    """

    candidate: str
    target: str
    observed: float
    resampled: NDArray[np.float64] = field(repr=False)
    p_value: float
    critical_value: float
    ell: int
    reject: bool
    alpha: float
    delta: float
    plan: ResamplingPlan = field(repr=False)

    @property
    def r(self) -> int:
        return len(self.resampled)

    @property
    def never_rejects(self) -> bool:
        return self.ell == 0

    def at_level(self, alpha: float) -> "PairwiseTestResult":
        """Same resamples, decision re-taken at another level."""
        return _decide(self.candidate, self.target, self.observed, self.resampled, alpha, self.delta, self.plan)


def _decide(candidate, target, observed, resampled, alpha, delta, plan) -> PairwiseTestResult:
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    r = len(resampled)
    ell = math.floor(alpha * r)
    crit = float(resampled[ell - 1]) if ell >= 1 else float("-inf")
    p = float(np.count_nonzero(resampled <= observed + TIE_TOL)) / r
    reject = bool(ell >= 1 and observed < crit - TIE_TOL)
    return PairwiseTestResult(candidate, target, float(observed), resampled, p, crit, ell, reject, float(alpha), float(delta), plan)


def pairwise_test(
    candidate: str,
    target: str,
    table: PerformanceTable,
    alpha: float = 0.05,
    plan: ResamplingPlan | None = None,
    delta: float = 0.0,
) -> PairwiseTestResult:
    """Permutation test of ``H0: candidate weakly GSD-dominates target``."""
    if candidate == target:
        raise ValueError("candidate and target must differ")
    plan = plan or ResamplingPlan.sampled(table.s)
    x, y = table.sample(candidate), table.sample(target)
    _check_samples(x, y, plan)
    system = PairSystem.for_samples(x, y, table.scale)
    s = table.s
    observed = system.value(system.objective(np.arange(s), np.arange(s, 2 * s)), delta)
    resampled = _resample(system, plan, delta)
    resampled.setflags(write=False)
    return _decide(candidate, target, observed, resampled, alpha, delta, plan)


def all_pairwise(
    target: str,
    table: PerformanceTable,
    alpha: float = 0.05,
    plan: ResamplingPlan | None = None,
    delta: float = 0.0,
) -> dict[str, PairwiseTestResult]:
    """Pairwise tests of every rival against ``target``, keyed by rival."""
    if table.k < 2:
        raise ValueError("need at least two classifiers")
    table.index(target)
    return {c: pairwise_test(c, target, table, alpha, plan, delta) for c in table.classifiers if c != target}


@dataclass(frozen=True, eq=False)
class StaticTestResult:
    target: str
    pairwise: dict[str, PairwiseTestResult]
    alpha: float
    reject: bool

    @property
    def max_p_value(self) -> float:
        return max(r.p_value for r in self.pairwise.values())


@dataclass(frozen=True, eq=False)
class DynamicTestResult:
    """``s_max`` lists the rivals whose null is rejected at ``alpha / c``."""

    target: str
    pairwise: dict[str, PairwiseTestResult]
    alpha: float
    level: float
    s_max: tuple[str, ...]


def static_gsd_test(
    target: str,
    table: PerformanceTable,
    alpha: float = 0.05,
    plan: ResamplingPlan | None = None,
    delta: float = 0.0,
    pairwise: dict[str, PairwiseTestResult] | None = None,
) -> StaticTestResult:
    """Reject "target is not in the GSD-front" iff every pairwise test rejects at ``alpha``."""
    pairwise = pairwise or all_pairwise(target, table, alpha, plan, delta)
    pairwise = {c: r.at_level(alpha) for c, r in pairwise.items()}
    return StaticTestResult(target, pairwise, float(alpha), all(r.reject for r in pairwise.values()))


def dynamic_gsd_test(
    target: str,
    table: PerformanceTable,
    alpha: float = 0.05,
    plan: ResamplingPlan | None = None,
    delta: float = 0.0,
    pairwise: dict[str, PairwiseTestResult] | None = None,
) -> DynamicTestResult:
    """Pairwise tests at ``alpha / (k - 1)``; ``s_max`` is the set of rejected rivals."""
    level = alpha / (table.k - 1)
    pairwise = pairwise or all_pairwise(target, table, level, plan, delta)
    pairwise = {c: r.at_level(level) for c, r in pairwise.items()}
    s_max = tuple(c for c, r in pairwise.items() if r.reject)
    return DynamicTestResult(target, pairwise, float(alpha), level, s_max)
