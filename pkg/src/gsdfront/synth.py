"""Synthetic populations with exactly computable fronts, plus independent oracles.

A :class:`PopulationModel` is a finite distribution over dataset types;
each type fixes the evaluation point of every classifier. Population
dominance values come from the same LP as the empirical statistic with
type probabilities in place of empirical masses.

The oracles here deliberately avoid the constraint-reduction code in
:mod:`gsdfront.prefsys`, so they can be used to check it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

from gsdfront.core import PerformanceTable, Scale, ScaleSpec
from gsdfront.gsd import (
    TIE_TOL,
    EmpiricalMeasure,
    FrontKind,
    FrontResult,
    PairSystem,
    d_matrix,
    epsilon_schedule,
    front_from_matrix,
)
from gsdfront.prefsys import ConstraintSet, Relation3, quantize, r1_compare, r2_compare

ORDINAL_LEVELS = tuple(round((2 * j + 1) / 20, 2) for j in range(10))


@dataclass(frozen=True, eq=False)
class PopulationModel:
    """``profiles[t, c]`` is the point of classifier ``c`` on dataset type ``t``."""

    classifiers: tuple[str, ...]
    profiles: NDArray[np.float64]
    probabilities: NDArray[np.float64]
    scale: ScaleSpec
    type_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        prof = np.array(self.profiles, dtype=float)
        prob = np.array(self.probabilities, dtype=float)
        if prof.ndim != 3 or prof.shape[1:] != (len(self.classifiers), self.scale.n):
            raise ValueError("profiles must have shape (types, classifiers, metrics)")
        if prob.shape != (prof.shape[0],):
            raise ValueError("one probability per dataset type is required")
        if np.any(prob < 0) or abs(prob.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        if np.any(prof < 0) or np.any(prof > 1):
            raise ValueError("profile points must lie in [0, 1]^n")
        prof.setflags(write=False)
        prob.setflags(write=False)
        names = tuple(self.type_names) or tuple(f"T{t + 1}" for t in range(prof.shape[0]))
        object.__setattr__(self, "classifiers", tuple(self.classifiers))
        object.__setattr__(self, "profiles", prof)
        object.__setattr__(self, "probabilities", prob)
        object.__setattr__(self, "type_names", names)

    @classmethod
    def from_profiles(
        cls,
        types: Sequence[Mapping[str, Sequence[float]]],
        probabilities: Sequence[float],
        scale: ScaleSpec,
    ) -> "PopulationModel":
        classifiers = tuple(types[0])
        prof = np.array([[t[c] for c in classifiers] for t in types], dtype=float)
        return cls(classifiers, prof, np.asarray(probabilities), scale)

    @property
    def k(self) -> int:
        return len(self.classifiers)

    def measure(self, classifier: str) -> EmpiricalMeasure:
        c = self.classifiers.index(classifier)
        q, inv = np.unique(quantize(self.profiles[:, c]), axis=0, return_inverse=True)
        mass = np.bincount(inv.ravel(), weights=self.probabilities, minlength=len(q))
        return EmpiricalMeasure(q / 1e9, mass)

    def to_dict(self) -> dict:
        return {
            "classifiers": list(self.classifiers),
            "metrics": [{"name": m.name, "scale": m.scale.value} for m in self.scale.metrics],
            "types": [
                {"name": name, "probability": float(p), "points": {c: [float(v) for v in pt] for c, pt in zip(self.classifiers, prof)}}
                for name, p, prof in zip(self.type_names, self.probabilities, self.profiles)
            ],
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> "PopulationModel":
        from gsdfront.core import MetricSpec

        scale = ScaleSpec(tuple(MetricSpec(m["name"], Scale(m["scale"])) for m in payload["metrics"]))
        classifiers = tuple(payload["classifiers"])
        types = payload["types"]
        prof = np.array([[t["points"][c] for c in classifiers] for t in types], dtype=float)
        prob = np.array([t["probability"] for t in types], dtype=float)
        return cls(classifiers, prof, prob, scale, tuple(t.get("name", f"T{i + 1}") for i, t in enumerate(types)))


def population_d(model: PopulationModel, first: str, second: str, delta: float = 0.0) -> float:
    """Population analogue of ``d(first, second)``."""
    if first == second:
        return 0.0
    i, j = model.classifiers.index(first), model.classifiers.index(second)
    system = PairSystem(np.vstack([model.profiles[:, i], model.profiles[:, j]]), model.scale)
    return system.value(system.weights_objective(model.measure(first), model.measure(second)), delta)


def population_d_matrix(model: PopulationModel, delta: float = 0.0) -> NDArray[np.float64]:
    k = model.k
    out = np.zeros((k, k))
    for i, j in itertools.permutations(range(k), 2):
        out[i, j] = population_d(model, model.classifiers[i], model.classifiers[j], delta)
    return out


def population_gsd_front(model: PopulationModel, delta: float = 0.0) -> FrontResult:
    """Classifiers not strictly GSD-dominated under the population measure."""
    d = population_d_matrix(model, delta)
    return front_from_matrix(model.classifiers, d, 0.0, FrontKind.POPULATION_GSD)


def is_antisymmetric(model: PopulationModel, tol: float = TIE_TOL) -> bool:
    """True iff mutual weak dominance only occurs between identically distributed classifiers."""
    d = population_d_matrix(model)
    for i, j in itertools.combinations(range(model.k), 2):
        if d[i, j] >= -tol and d[j, i] >= -tol:
            a, b = model.measure(model.classifiers[i]), model.measure(model.classifiers[j])
            same = (
                a.support.shape == b.support.shape
                and np.array_equal(quantize(a.support), quantize(b.support))
                and np.allclose(a.mass, b.mass, atol=1e-12)
            )
            if not same:
                return False
    return True


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def sample_table(model: PopulationModel, s: int, seed: int | Sequence[int] = 0) -> PerformanceTable:
    """``s`` i.i.d. dataset types drawn from the model; deterministic in ``seed``."""
    if s < 1:
        raise ValueError("s must be positive")
    types = _rng(seed).choice(len(model.probabilities), size=s, p=model.probabilities)
    return PerformanceTable(
        model.classifiers,
        tuple(f"D{i + 1}" for i in range(s)),
        model.scale,
        model.profiles[types],
    )


def default_model() -> PopulationModel:
    """Three classifiers, four dataset types, one cardinal and two ordinal metrics.

    ``B`` is componentwise below ``A`` on types T1 and T2 (probability 0.7)
    and incomparable to it on T3 and T4, so ``D(A, B) = -0.3`` and
    ``D(B, A) = -0.85``. ``C`` is strictly below both on every type. The
    population front is ``{A, B}``; with slack ``s**(-1/4)`` the estimate
    wrongly drops ``B`` at small ``s`` and recovers it as ``s`` grows.
    """
    scale = ScaleSpec.of(("accuracy", "cardinal"), ("speed", "ordinal"), ("robustness", "ordinal"))
    types = [
        {"A": [0.82, 0.85, 0.75], "B": [0.78, 0.65, 0.55], "C": [0.70, 0.35, 0.25]},
        {"A": [0.80, 0.75, 0.65], "B": [0.74, 0.55, 0.45], "C": [0.66, 0.25, 0.35]},
        {"A": [0.90, 0.65, 0.35], "B": [0.72, 0.55, 0.65], "C": [0.64, 0.45, 0.25]},
        {"A": [0.62, 0.95, 0.25], "B": [0.86, 0.25, 0.95], "C": [0.55, 0.15, 0.15]},
    ]
    return PopulationModel.from_profiles(types, [0.35, 0.35, 0.15, 0.15], scale)


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    """Per sample size: fraction of runs recovering the true front exactly, or a superset of it."""

    s_grid: tuple[int, ...]
    runs: int
    epsilon_c: float
    seed: int
    true_front: tuple[str, ...]
    records: tuple[tuple[int, int, bool, bool], ...] = field(repr=False)

    def _rate(self, s: int, col: int) -> float:
        rows = [r for r in self.records if r[0] == s]
        return sum(r[col] for r in rows) / len(rows)

    @property
    def recovery_rate(self) -> dict[int, float]:
        return {s: self._rate(s, 2) for s in self.s_grid}

    @property
    def superset_rate(self) -> dict[int, float]:
        return {s: self._rate(s, 3) for s in self.s_grid}

    def summary(self) -> dict:
        return {
            "s_grid": list(self.s_grid),
            "runs": self.runs,
            "epsilon_c": self.epsilon_c,
            "seed": self.seed,
            "true_front": list(self.true_front),
            "recovery_rate": {str(s): v for s, v in self.recovery_rate.items()},
            "superset_rate": {str(s): v for s, v in self.superset_rate.items()},
        }


def consistency_experiment(
    model: PopulationModel,
    s_grid: Sequence[int],
    runs: int,
    epsilon_c: float = 1.0,
    seed: int = 0,
    delta: float = 0.0,
) -> ExperimentReport:
    """Compare ``egsd_front`` at ``epsilon = epsilon_c / s**(1/4)`` with the population front.

    Replication ``j`` at size ``s`` samples with seed ``[seed, s, j]``.
    """
    if not is_antisymmetric(model):
        raise ValueError("model's population GSD relation is not antisymmetric")
    truth = population_gsd_front(model, delta).as_set()
    records = []
    for s in s_grid:
        eps = min(1.0, epsilon_schedule(s, epsilon_c))
        for j in range(runs):
            table = sample_table(model, s, [seed, s, j])
            d = d_matrix(table, delta)
            est = front_from_matrix(table.classifiers, d, eps).as_set()
            records.append((int(s), j, est == truth, est >= truth))
    ordered = tuple(c for c in model.classifiers if c in truth)
    return ExperimentReport(tuple(int(s) for s in s_grid), runs, float(epsilon_c), int(seed), ordered, tuple(records))


def random_table(
    rng: np.random.Generator,
    k: int,
    s: int,
    scale: ScaleSpec,
    decimals: int = 2,
) -> PerformanceTable:
    """Uniform cardinal values rounded to ``decimals``; ordinal values on the decile midpoints."""
    vals = np.empty((s, k, scale.n))
    for j, m in enumerate(scale.metrics):
        if m.scale is Scale.CARDINAL:
            vals[:, :, j] = np.round(rng.random((s, k)), decimals)
        else:
            vals[:, :, j] = rng.choice(ORDINAL_LEVELS, size=(s, k))
    return PerformanceTable(
        tuple(f"C{c + 1}" for c in range(k)),
        tuple(f"D{i + 1}" for i in range(s)),
        scale,
        vals,
    )


# ---------------------------------------------------------------------------
# oracles

GRID_MAX_POINTS = 6
GRID_MAX_G = 20
GRID_MAX_ROWS = 20_000_000


def fsd_oracle(x_values: Sequence[float], y_values: Sequence[float]) -> bool:
    """True iff the ECDF of ``x`` lies weakly below the ECDF of ``y`` everywhere."""
    x = np.sort(np.asarray(x_values, dtype=float))
    y = np.sort(np.asarray(y_values, dtype=float))
    if x.size == 0 or y.size == 0:
        raise ValueError("samples must be nonempty")
    z = np.union1d(x, y)
    Fx = np.searchsorted(x, z, side="right") / x.size
    Fy = np.searchsorted(y, z, side="right") / y.size
    return bool(np.all(Fx <= Fy + 1e-12))


def _definition_constraints(points: NDArray[np.float64], scale: ScaleSpec):
    """Closure constraints straight from the relation definitions, without reduction.

    Returns ``(ge, strict, equal)``: ``ge`` pairs ``(a, b)`` mean
    ``u[a] >= u[b]``; rows ``(a, b, c, d)`` of ``strict`` mean
    ``u[a] - u[b] >= u[c] - u[d]`` and those of ``equal`` mean equality.
    """
    m = len(points)
    ge, pairs = [], []
    for a in range(m):
        for b in range(m):
            if a != b and r1_compare(points[a], points[b]) is Relation3.STRICTLY_GREATER:
                ge.append((a, b))
                pairs.append((a, b))
    strict, equal = [], []
    for (a, b), (c, d) in itertools.combinations(pairs, 2):
        rel = r2_compare((points[a], points[b]), (points[c], points[d]), scale)
        if rel is Relation3.STRICTLY_GREATER:
            strict.append((a, b, c, d))
        elif rel is Relation3.STRICTLY_LESS:
            strict.append((c, d, a, b))
        elif rel is Relation3.EQUAL:
            equal.append((a, b, c, d))
    return ge, strict, equal


def grid_oracle_d(
    first: EmpiricalMeasure,
    second: EmpiricalMeasure,
    points: NDArray[np.float64] | Sequence[Sequence[float]],
    scale: ScaleSpec,
    grid_step: float = 1 / 20,
    constraints: ConstraintSet | None = None,
) -> float:
    """Brute-force minimum of ``sum u * (pi_first - pi_second)`` over grid utilities.

    Utilities range over ``{0, 1/G, ..., 1}`` with ``u(0) = 0`` and
    ``u(1) = 1``; constraints are the unreduced closure of both relations
    (or the rows of ``constraints`` at ``xi = 0``). Returns ``inf`` when no
    grid assignment is feasible.
    """
    G = round(1 / grid_step)
    if G < 1 or G > GRID_MAX_G or not math.isclose(G * grid_step, 1.0):
        raise ValueError(f"grid_step must be 1/G with 1 <= G <= {GRID_MAX_G}")
    n = scale.n
    if constraints is not None:
        pts = np.asarray(constraints.points)
        zero, one = constraints.zero, constraints.one
        ge = []
        quads = [tuple(r) for r in constraints.margined]
        eqs = [tuple(r) for r in constraints.equalities]
    else:
        pts = np.asarray(points, dtype=float).reshape(-1, n)
        anchors = np.array([[0.0] * n, [1.0] * n])
        q = np.unique(quantize(np.vstack([pts, anchors])), axis=0)
        pts = q / 1e9
        zero, one = 0, len(pts) - 1
        ge, quads, eqs = _definition_constraints(pts, scale)
    m = len(pts)
    free = [i for i in range(m) if i not in (zero, one)]
    if len(free) > GRID_MAX_POINTS:
        raise ValueError(f"grid oracle handles at most {GRID_MAX_POINTS} points besides 0 and 1")

    def terms(row):
        a, b, c, d = (tuple(row) + (-1, -1))[:4]
        return [(v, s) for v, s in ((a, 1), (b, -1), (c, -1), (d, 1)) if v >= 0]

    checks = [(terms((a, b)), False) for a, b in ge]
    checks += [(terms(r), False) for r in quads]
    checks += [(terms(r), True) for r in eqs]

    fixed = {zero: 0, one: G}
    order = free
    pos = {v: i for i, v in enumerate(order)}
    # each check runs once every variable it touches has been assigned
    stage = {}
    for t, is_eq in checks:
        last = max((pos[v] for v, _ in t if v in pos), default=-1)
        stage.setdefault(last, []).append((t, is_eq))

    def ok(rows: NDArray[np.int64], group) -> NDArray[np.bool_]:
        keep = np.ones(len(rows), dtype=bool)
        for t, is_eq in group:
            val = np.zeros(len(rows), dtype=np.int64)
            for v, sgn in t:
                val += sgn * (rows[:, pos[v]] if v in pos else fixed[v])
            keep &= (val == 0) if is_eq else (val >= 0)
        return keep

    rows = np.zeros((1, 0), dtype=np.int64)
    if not ok(rows, stage.get(-1, [])).all():
        return math.inf
    levels = np.arange(G + 1, dtype=np.int64)
    for i in range(len(order)):
        if len(rows) * (G + 1) > GRID_MAX_ROWS:
            raise ValueError("grid enumeration exceeds the row limit")
        rows = np.hstack([np.repeat(rows, G + 1, axis=0), np.tile(levels, len(rows))[:, None]])
        rows = rows[ok(rows, stage.get(i, []))]
        if len(rows) == 0:
            return math.inf

    weight = np.zeros(m)
    index = {tuple(r): i for i, r in enumerate(quantize(pts))}
    for meas, sign in ((first, 1.0), (second, -1.0)):
        for p, w in zip(quantize(meas.support), meas.mass):
            weight[index[tuple(p)]] += sign * w
    base = weight[one] * 1.0
    vals = rows @ weight[order] / G if order else np.zeros(len(rows))
    return float(np.min(vals) + base)
