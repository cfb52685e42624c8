"""Domain types shared across the package.

Every quality metric is stored oriented higher-is-better and embedded in
``[0, 1]``. A :class:`PerformanceTable` holds the evaluations as a dense
``(s, k, n)`` array indexed as ``values[dataset, classifier, metric]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np
from numpy.typing import NDArray


class Scale(str, Enum):
    CARDINAL = "cardinal"
    ORDINAL = "ordinal"


class GsdError(Exception):
    """Base class for errors raised by this package."""


class DataError(GsdError):
    """Input data violates a structural or range requirement."""


class NumericalError(GsdError):
    """A linear program or other numerical routine failed."""


@dataclass(frozen=True)
class MetricSpec:
    name: str
    scale: Scale = Scale.CARDINAL

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("metric name must be nonempty")
        object.__setattr__(self, "scale", Scale(self.scale))


@dataclass(frozen=True)
class ScaleSpec:
    """Ordered metric declarations.

    Cardinal metrics conventionally come first; :meth:`cardinal_first`
    returns the reordered spec together with the column permutation.
    """

    metrics: tuple[MetricSpec, ...]

    def __post_init__(self) -> None:
        metrics = tuple(self.metrics)
        if not metrics:
            raise ValueError("a ScaleSpec needs at least one metric")
        names = [m.name for m in metrics]
        dupes = sorted({x for x in names if names.count(x) > 1})
        if dupes:
            raise ValueError(f"duplicate metric names: {dupes}")
        object.__setattr__(self, "metrics", metrics)

    @classmethod
    def of(cls, *specs: tuple[str, str | Scale]) -> "ScaleSpec":
        return cls(tuple(MetricSpec(name, Scale(scale)) for name, scale in specs))

    @classmethod
    def uniform(cls, n: int, scale: Scale | str, prefix: str = "m") -> "ScaleSpec":
        return cls(tuple(MetricSpec(f"{prefix}{j + 1}", Scale(scale)) for j in range(n)))

    @property
    def n(self) -> int:
        return len(self.metrics)

    @property
    def z(self) -> int:
        return sum(m.scale is Scale.CARDINAL for m in self.metrics)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.metrics)

    @property
    def cardinal_mask(self) -> NDArray[np.bool_]:
        return np.array([m.scale is Scale.CARDINAL for m in self.metrics], dtype=bool)

    def all_ordinal(self) -> "ScaleSpec":
        return ScaleSpec(tuple(MetricSpec(m.name, Scale.ORDINAL) for m in self.metrics))

    def cardinal_first(self) -> tuple["ScaleSpec", list[int]]:
        order = [j for j, m in enumerate(self.metrics) if m.scale is Scale.CARDINAL]
        order += [j for j, m in enumerate(self.metrics) if m.scale is Scale.ORDINAL]
        return ScaleSpec(tuple(self.metrics[j] for j in order)), order


@dataclass(frozen=True, eq=False)
class PerformanceTable:
    """Evaluations ``values[i, c, j]`` of classifier ``c`` on dataset ``i`` for metric ``j``.

    Missing evaluations are encoded as NaN; use :func:`validate_table` to
    list all defects, or :meth:`check` to raise on the first batch.
    """

    classifiers: tuple[str, ...]
    datasets: tuple[str, ...]
    scale: ScaleSpec
    values: NDArray[np.float64] = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "classifiers", tuple(str(c) for c in self.classifiers))
        object.__setattr__(self, "datasets", tuple(str(d) for d in self.datasets))
        arr = np.array(self.values, dtype=float)
        expected = (len(self.datasets), len(self.classifiers), self.scale.n)
        if arr.shape != expected:
            raise ValueError(f"values has shape {arr.shape}, expected {expected}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_records(
        cls,
        records: Iterable[tuple[str, str, Sequence[float]]],
        scale: ScaleSpec,
        classifiers: Sequence[str] | None = None,
        datasets: Sequence[str] | None = None,
    ) -> "PerformanceTable":
        """Build a table from ``(classifier, dataset, point)`` records.

        Cells without a record stay NaN. Ordering of classifiers and
        datasets follows first appearance unless given explicitly.
        """
        records = list(records)
        if classifiers is None:
            classifiers = list(dict.fromkeys(r[0] for r in records))
        if datasets is None:
            datasets = list(dict.fromkeys(r[1] for r in records))
        ci = {c: i for i, c in enumerate(classifiers)}
        di = {d: i for i, d in enumerate(datasets)}
        values = np.full((len(datasets), len(classifiers), scale.n), np.nan)
        for clf, ds, point in records:
            values[di[ds], ci[clf], :] = point
        return cls(tuple(classifiers), tuple(datasets), scale, values)

    @property
    def s(self) -> int:
        return len(self.datasets)

    @property
    def k(self) -> int:
        return len(self.classifiers)

    def index(self, classifier: str) -> int:
        try:
            return self.classifiers.index(classifier)
        except ValueError:
            raise KeyError(f"unknown classifier {classifier!r}") from None

    def sample(self, classifier: str) -> NDArray[np.float64]:
        """The ``(s, n)`` evaluations of one classifier across all datasets."""
        return self.values[:, self.index(classifier), :]

    def point(self, classifier: str, dataset: str) -> tuple[float, ...]:
        return tuple(self.values[self.datasets.index(dataset), self.index(classifier)])

    def with_scale(self, scale: ScaleSpec) -> "PerformanceTable":
        if scale.n != self.scale.n:
            raise ValueError("replacement scale must have the same number of metrics")
        return PerformanceTable(self.classifiers, self.datasets, scale, self.values)

    def subset(self, classifiers: Sequence[str]) -> "PerformanceTable":
        idx = [self.index(c) for c in classifiers]
        return PerformanceTable(tuple(classifiers), self.datasets, self.scale, self.values[:, idx, :])

    def check(self) -> "PerformanceTable":
        violations = validate_table(self)
        if violations:
            raise DataError("; ".join(violations))
        return self

    def to_dict(self) -> dict:
        return {
            "classifiers": list(self.classifiers),
            "datasets": list(self.datasets),
            "metrics": [{"name": m.name, "scale": m.scale.value} for m in self.scale.metrics],
            "values": [[[None if math.isnan(v) else float(v) for v in pt] for pt in row] for row in self.values],
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> "PerformanceTable":
        scale = ScaleSpec(tuple(MetricSpec(m["name"], Scale(m["scale"])) for m in payload["metrics"]))
        values = np.array(
            [[[np.nan if v is None else v for v in pt] for pt in row] for row in payload["values"]],
            dtype=float,
        ).reshape(len(payload["datasets"]), len(payload["classifiers"]), scale.n)
        return cls(tuple(payload["classifiers"]), tuple(payload["datasets"]), scale, values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PerformanceTable):
            return NotImplemented
        return (
            self.classifiers == other.classifiers
            and self.datasets == other.datasets
            and self.scale == other.scale
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class TestConfig:
    """Settings shared by the permutation tests.

    With ``exhaustive=True`` all ``C(2s, s)`` splits are used and
    ``n_resamples`` is ignored.
    """

    __test__ = False  # keep pytest from collecting this class

    alpha: float = 0.05
    n_resamples: int = 1000
    delta: float = 0.0
    seed: int = 0
    exhaustive: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.n_resamples < 1:
            raise ValueError("n_resamples must be positive")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def validate_table(table: PerformanceTable) -> list[str]:
    """List every invariant violation of ``table``; an empty list means valid.

    Never raises for data defects; each defect yields one readable line.
    """
    out: list[str] = []
    if table.k < 2:
        out.append(f"need at least 2 classifiers, got {table.k}")
    if table.s < 1:
        out.append("need at least 1 dataset")
    for label, ids in (("classifier", table.classifiers), ("dataset", table.datasets)):
        seen: set[str] = set()
        for x in ids:
            if not x:
                out.append(f"empty {label} id")
            elif x in seen:
                out.append(f"duplicate {label} id {x!r}")
            seen.add(x)
    names = table.scale.names
    vals = table.values
    for i, ds in enumerate(table.datasets):
        for c, clf in enumerate(table.classifiers):
            cell = vals[i, c]
            nan = np.isnan(cell)
            if nan.all():
                out.append(f"missing evaluation ({clf}, {ds})")
                continue
            for j in np.flatnonzero(nan):
                out.append(f"NaN at ({clf}, {ds}, metric {names[j]})")
            for j in np.flatnonzero(~nan & ((cell < 0.0) | (cell > 1.0))):
                out.append(f"value out of [0,1] at ({clf}, {ds}, metric {names[j]})")
    return out
