"""Generalized stochastic dominance between classifiers.

Sign convention used throughout: ``d(first, second)`` is the minimum, over
all utility representations, of ``E_first[u] - E_second[u]`` under the
empirical measures. ``first`` empirically GSD-dominates ``second`` iff
``d(first, second) >= 0``, judged with a tolerance band of :data:`TIE_TOL`.
The permutation test of "C' dominates C" uses ``d(C', C)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import networkx as nx
import numpy as np
from numpy.typing import NDArray

from gsdfront.core import NumericalError, PerformanceTable, ScaleSpec
from gsdfront.lp import LpProblem, LpSolution, solve
from gsdfront.prefsys import ConstraintSet, Granularity, build_constraints, granularity, quantize

TIE_TOL = 1e-9


def weakly_nonnegative(value: float, tol: float = TIE_TOL) -> bool:
    return value >= -tol


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Finite measure: ``mass[i]`` sits on ``support[i]``."""

    support: NDArray[np.float64]
    mass: NDArray[np.float64]

    def __post_init__(self) -> None:
        mass = np.asarray(self.mass, dtype=float)
        if np.any(mass < 0) or abs(mass.sum() - 1.0) > 1e-12:
            raise ValueError("masses must be nonnegative and sum to 1")

    @classmethod
    def from_sample(cls, sample: NDArray[np.float64]) -> "EmpiricalMeasure":
        sample = np.atleast_2d(np.asarray(sample, dtype=float))
        q, counts = np.unique(quantize(sample), axis=0, return_counts=True)
        return cls(q / 1e9, counts / sample.shape[0])


class PairSystem:
    """Constraint system over a fixed pooled point set, reused across objectives.

    Only the measures change between the observed statistic and its
    permutation resamples, so the constraints are built once.
    """

    def __init__(self, points: NDArray[np.float64], scale: ScaleSpec, **caps) -> None:
        self.scale = scale
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.cs: ConstraintSet = build_constraints(self.points, scale, **caps)
        self.row_index = self.cs.index_of(self.points)
        self._granularity: Granularity | None = None
        self._problems: dict[float, LpProblem] = {}

    @classmethod
    def for_samples(cls, first: NDArray[np.float64], second: NDArray[np.float64], scale: ScaleSpec, **caps) -> "PairSystem":
        return cls(np.vstack([np.atleast_2d(first), np.atleast_2d(second)]), scale, **caps)

    @property
    def n_variables(self) -> int:
        return self.cs.n_variables

    def granularity(self) -> Granularity:
        if self._granularity is None:
            self._granularity = granularity(self.cs)
        return self._granularity

    def margin(self, delta: float) -> float:
        return 0.0 if delta == 0 else self.granularity().mu_of(delta)

    def problem(self, delta: float) -> LpProblem:
        mu = self.margin(delta)
        if mu not in self._problems:
            self._problems[mu] = self.cs.lp(np.zeros(self.n_variables), mu)
        return self._problems[mu]

    def objective(self, first_rows: NDArray[np.int64], second_rows: NDArray[np.int64]) -> NDArray[np.float64]:
        """Signed masses ``pi_first - pi_second`` on the variables; rows index ``points``."""
        m = self.n_variables
        f = np.bincount(self.row_index[first_rows], minlength=m) / len(first_rows)
        s = np.bincount(self.row_index[second_rows], minlength=m) / len(second_rows)
        return f - s

    def weights_objective(self, first: EmpiricalMeasure, second: EmpiricalMeasure) -> NDArray[np.float64]:
        c = np.zeros(self.n_variables)
        np.add.at(c, self.cs.index_of(first.support), first.mass)
        np.subtract.at(c, self.cs.index_of(second.support), second.mass)
        return c

    def minimize(self, objective: NDArray[np.float64], delta: float = 0.0) -> LpSolution:
        sol = solve(self.problem(delta).with_objective(objective))
        if not sol.ok:
            raise NumericalError(f"d-statistic LP ended with status {sol.status.value}: {sol.message}")
        return sol

    def value(self, objective: NDArray[np.float64], delta: float = 0.0) -> float:
        if not np.any(objective):
            return 0.0
        return self.minimize(objective, delta).objective_value


@dataclass(frozen=True, eq=False)
class StatisticResult:
    value: float
    delta: float
    mu_delta: float
    minimizing_assignment: dict[tuple[float, ...], float] = field(repr=False)
    lp_diagnostics: dict[str, float | int | str] = field(default_factory=dict, repr=False)


def d_statistic(
    first: str,
    second: str,
    table: PerformanceTable,
    delta: float = 0.0,
    system: PairSystem | None = None,
) -> StatisticResult:
    """Minimal expected-utility advantage of ``first`` over ``second``.

    The LP runs over the pooled evaluations of both classifiers plus the
    anchors ``0`` and ``1``, with every strict constraint holding with
    margin ``delta * xi_star``.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    x, y = table.sample(first), table.sample(second)
    system = system or PairSystem.for_samples(x, y, table.scale)
    s = table.s
    c = system.objective(np.arange(s), np.arange(s, 2 * s))
    mu = system.margin(delta)
    diag = {"n_variables": system.n_variables, "n_constraints": system.cs.n_constraints}
    if first == second or not np.any(c):
        u = np.zeros(system.n_variables)
        u[system.cs.one] = 1.0
        sol = system.minimize(c, delta) if delta > 0 else None
        if sol is not None:
            u = sol.x
        value = 0.0
        diag["status"] = "trivial"
    else:
        sol = system.minimize(c, delta)
        u, value = sol.x, sol.objective_value
        diag.update(status=sol.status.value, max_violation=sol.max_violation, duality_gap=sol.duality_gap)
    assignment = {tuple(map(float, p)): float(v) for p, v in zip(system.cs.points, u)}
    return StatisticResult(float(value), float(delta), float(mu), assignment, diag)


def d_matrix(table: PerformanceTable, delta: float = 0.0) -> NDArray[np.float64]:
    """``out[i, j] = d(classifier_i, classifier_j)``; the diagonal is zero."""
    k, s = table.k, table.s
    out = np.zeros((k, k))
    first, second = np.arange(s), np.arange(s, 2 * s)
    for i in range(k):
        for j in range(i + 1, k):
            system = PairSystem.for_samples(table.values[:, i], table.values[:, j], table.scale)
            c = system.objective(first, second)
            out[i, j] = system.value(c, delta)
            out[j, i] = system.value(-c, delta)
    return out


@dataclass(frozen=True)
class DominanceGraph:
    """Hasse graph of a dominance relation between classifiers.

    ``groups`` partitions ``nodes`` into equivalence classes; each
    ``strict_edges`` entry ``(winner, loser)`` names the first member of
    each class and survives transitive reduction.
    """

    nodes: tuple[str, ...]
    groups: tuple[tuple[str, ...], ...]
    strict_edges: tuple[tuple[str, str], ...]

    @property
    def equivalences(self) -> tuple[tuple[str, ...], ...]:
        return tuple(g for g in self.groups if len(g) > 1)

    def group_of(self, classifier: str) -> tuple[str, ...]:
        for g in self.groups:
            if classifier in g:
                return g
        raise KeyError(classifier)

    def to_dot(self, name: str = "dominance") -> str:
        """DOT source with one node per class, ordered as in ``groups``."""
        lines = [f"digraph {name} {{", "  rankdir=TB;"]
        for g in self.groups:
            label = ", ".join(g)
            lines.append(f'  "{g[0]}" [label="{label}"];')
        for a, b in self.strict_edges:
            lines.append(f'  "{a}" -> "{b}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def relation_from_matrix(classifiers: Sequence[str], d: NDArray[np.float64], tol: float = TIE_TOL) -> DominanceGraph:
    """Empirical GSD relation from a precomputed d-matrix.

    ``A -> B`` is weak dominance ``d(A, B) >= 0``. Strongly connected
    components of the weak relation become equivalence classes (mutual
    dominance, plus any cycle, which pairwise point sets can produce).
    """
    k = len(classifiers)
    weak = nx.DiGraph()
    weak.add_nodes_from(range(k))
    weak.add_edges_from((i, j) for i in range(k) for j in range(k) if i != j and d[i, j] >= -tol)
    comps = sorted((sorted(c) for c in nx.strongly_connected_components(weak)), key=lambda c: c[0])
    comp_of = {i: n for n, comp in enumerate(comps) for i in comp}
    dag = nx.DiGraph()
    dag.add_nodes_from(range(len(comps)))
    dag.add_edges_from({(comp_of[i], comp_of[j]) for i, j in weak.edges if comp_of[i] != comp_of[j]})
    reduced = nx.transitive_reduction(dag)
    groups = tuple(tuple(classifiers[i] for i in comp) for comp in comps)
    edges = tuple(sorted((groups[a][0], groups[b][0]) for a, b in reduced.edges))
    edges = tuple(sorted(edges, key=lambda e: (classifiers.index(e[0]), classifiers.index(e[1]))))
    return DominanceGraph(tuple(classifiers), groups, edges)


def empirical_gsd_relation(table: PerformanceTable, delta: float = 0.0) -> DominanceGraph:
    if table.k < 2:
        raise ValueError("need at least two classifiers")
    return relation_from_matrix(table.classifiers, d_matrix(table, delta))


class FrontKind(str, Enum):
    EGSD = "egsd"
    PARETO = "pareto"
    POPULATION_GSD = "population_gsd"
    FSD = "fsd"


@dataclass(frozen=True)
class FrontResult:
    members: tuple[str, ...]
    epsilon: float
    kind: FrontKind

    def __contains__(self, classifier: object) -> bool:
        return classifier in self.members

    def as_set(self) -> frozenset[str]:
        return frozenset(self.members)


def front_from_matrix(
    classifiers: Sequence[str],
    d: NDArray[np.float64],
    epsilon: float = 0.0,
    kind: FrontKind = FrontKind.EGSD,
    tol: float = TIE_TOL,
) -> FrontResult:
    """Drop ``C`` whenever some ``C'`` has ``d(C', C) >= -epsilon`` and ``d(C, C') < 0``."""
    k = len(classifiers)
    members = []
    for c in range(k):
        beaten = any(
            d[o, c] >= -epsilon - tol and d[c, o] < -tol
            for o in range(k)
            if o != c
        )
        if not beaten:
            members.append(classifiers[c])
    return FrontResult(tuple(members), float(epsilon), kind)


def egsd_front(
    table: PerformanceTable,
    epsilon: float = 0.0,
    delta: float = 0.0,
    d: NDArray[np.float64] | None = None,
) -> FrontResult:
    """epsilon-empirical GSD-front. Pass ``d`` to reuse a d-matrix."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if d is None:
        d = d_matrix(table, delta)
    return front_from_matrix(table.classifiers, d, epsilon)


def pareto_front(table: PerformanceTable) -> FrontResult:
    """Classifiers not strictly componentwise dominated by one rival on every dataset."""
    q = quantize(table.values)  # (s, k, n)
    members = []
    for c in range(table.k):
        dominated = False
        for o in range(table.k):
            if o == c:
                continue
            ge = np.all(q[:, o] >= q[:, c], axis=1)
            ne = np.any(q[:, o] != q[:, c], axis=1)
            if np.all(ge & ne):
                dominated = True
                break
        if not dominated:
            members.append(table.classifiers[c])
    return FrontResult(tuple(members), 0.0, FrontKind.PARETO)


def epsilon_schedule(s: int, c: float = 1.0) -> float:
    """Slack ``c / s**(1/4)`` for the consistent front estimator."""
    if s < 1:
        raise ValueError("s must be at least 1")
    return float(c) / math.pow(s, 0.25)
