"""Preference system on ``[0, 1]^n`` restricted to a finite point set.

The ordinal relation ``R1`` is componentwise ``>=``. The relation ``R2``
compares pairs ``(x, y)`` and ``(x', y')`` from ``R1``: cardinal metrics
require ``x_j - y_j >= x'_j - y'_j``, ordinal metrics require the nesting
``x_j >= x'_j >= y'_j >= y_j``.

Both relations are componentwise dominance orders on integer vectors once
points are quantised to a ``1e-9`` lattice, so every comparison below is
exact. Constraint generation keeps only the covering relation of each
strict order and drops ``R2`` constraints already implied by ``R1`` ones;
the remaining system has the same feasible set for every margin ``xi >= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import sparse

from gsdfront.core import GsdError, NumericalError, ScaleSpec
from gsdfront.lp import LpProblem, LpStatus, solve

RESOLUTION = 10**9
DEFAULT_MAX_CONSTRAINTS = 2_000_000
DEFAULT_MAX_PAIR_CLASSES = 12_000
# above this many distinct R2 classes the covering reduction is skipped
COVER_REDUCTION_LIMIT = 6_000


class Relation3(str, Enum):
    STRICTLY_GREATER = "strictly_greater"
    EQUAL = "equal"
    STRICTLY_LESS = "strictly_less"
    INCOMPARABLE = "incomparable"


class ConstraintCapExceeded(GsdError):
    """The ``R2`` enumeration would exceed the configured size limits."""


class InconsistentSystem(GsdError):
    """No utility assignment satisfies the constraint system."""


ArrayLike = Sequence[float] | NDArray[np.float64]


def quantize(points: ArrayLike) -> NDArray[np.int64]:
    return np.rint(np.asarray(points, dtype=float) * RESOLUTION).astype(np.int64)


def _relation(ge: bool, le: bool) -> Relation3:
    if ge and le:
        return Relation3.EQUAL
    if ge:
        return Relation3.STRICTLY_GREATER
    if le:
        return Relation3.STRICTLY_LESS
    return Relation3.INCOMPARABLE


def r1_compare(x: ArrayLike, y: ArrayLike, scale: ScaleSpec | None = None) -> Relation3:
    """Componentwise comparison of two evaluation points."""
    qx, qy = quantize(x).ravel(), quantize(y).ravel()
    if qx.shape != qy.shape or (scale is not None and qx.size != scale.n):
        raise ValueError("points must have the same dimension as the scale")
    return _relation(bool(np.all(qx >= qy)), bool(np.all(qy >= qx)))


def _r2_vector(hi: NDArray[np.int64], lo: NDArray[np.int64], card: NDArray[np.bool_]) -> NDArray[np.int64]:
    # p R2 q  <=>  _r2_vector(p) >= _r2_vector(q) componentwise
    return np.concatenate([hi[..., card] - lo[..., card], hi[..., ~card], -lo[..., ~card]], axis=-1)


def r2_compare(
    pair1: tuple[ArrayLike, ArrayLike],
    pair2: tuple[ArrayLike, ArrayLike],
    scale: ScaleSpec,
) -> Relation3:
    """Compare the exchange ``pair1[1] -> pair1[0]`` with ``pair2[1] -> pair2[0]``.

    Both pairs must lie in ``R1`` (first element weakly dominates the second).
    """
    card = scale.cardinal_mask
    vecs = []
    for hi, lo in (pair1, pair2):
        qh, ql = quantize(hi).ravel(), quantize(lo).ravel()
        if qh.size != scale.n or ql.size != scale.n:
            raise ValueError("points must have the same dimension as the scale")
        if not np.all(qh >= ql):
            raise ValueError("pair is not in R1: first point must weakly dominate the second")
        vecs.append(_r2_vector(qh, ql, card))
    v1, v2 = vecs
    return _relation(bool(np.all(v1 >= v2)), bool(np.all(v2 >= v1)))


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Linear constraints over utilities ``u[0..m-1]``, one per distinct point.

    Each row ``(a, b, c, d)`` of ``margined`` means
    ``u[a] - u[b] - u[c] + u[d] >= xi``; ``equalities`` rows mean ``== 0``.
    Index ``-1`` marks an absent term, so ``(a, b, -1, -1)`` is
    ``u[a] - u[b]``. ``u[zero] = 0`` and ``u[one] = 1`` are fixed and all
    utilities live in ``[0, 1]``.
    """

    points: NDArray[np.float64]
    zero: int
    one: int
    margined: NDArray[np.int64]
    equalities: NDArray[np.int64]

    def __post_init__(self) -> None:
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        m = pts.shape[0]
        rows = {}
        for key in ("margined", "equalities"):
            arr = np.asarray(getattr(self, key), dtype=np.int64).reshape(-1, 4)
            if arr.size and (arr.max() >= m or arr.min() < -1):
                raise ValueError(f"{key} references an unknown variable")
            arr = np.unique(arr, axis=0) if len(arr) else arr
            arr.setflags(write=False)
            rows[key] = arr
        if not (0 <= self.zero < m and 0 <= self.one < m):
            raise ValueError("anchor indices out of range")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "margined", rows["margined"])
        object.__setattr__(self, "equalities", rows["equalities"])

    @property
    def n_variables(self) -> int:
        return self.points.shape[0]

    @property
    def n_constraints(self) -> int:
        return len(self.margined) + len(self.equalities)

    def form_matrix(self, rows: NDArray[np.int64]) -> sparse.csr_matrix:
        """Sparse matrix whose row ``i`` evaluates constraint form ``rows[i]``."""
        m = self.n_variables
        if len(rows) == 0:
            return sparse.csr_matrix((0, m))
        coef = np.array([1.0, -1.0, -1.0, 1.0])
        r = np.repeat(np.arange(len(rows)), 4)
        c = rows.ravel()
        v = np.tile(coef, len(rows))
        keep = c >= 0
        mat = sparse.coo_matrix((v[keep], (r[keep], c[keep])), shape=(len(rows), m)).tocsr()
        mat.sum_duplicates()
        return mat

    def index_of(self, points: ArrayLike) -> NDArray[np.int64]:
        """Variable index of each row of ``points`` (which must be variables)."""
        table = {tuple(row): i for i, row in enumerate(quantize(self.points))}
        q = np.atleast_2d(quantize(points))
        try:
            return np.array([table[tuple(row)] for row in q], dtype=np.int64)
        except KeyError as exc:
            raise KeyError(f"point {exc.args[0]} is not a variable of this system") from None

    def satisfied_by(self, u: NDArray[np.float64], xi: float = 0.0, tol: float = 1e-9) -> bool:
        u = np.asarray(u, dtype=float)
        if abs(u[self.zero]) > tol or abs(u[self.one] - 1.0) > tol:
            return False
        if np.any(u < -tol) or np.any(u > 1.0 + tol):
            return False
        if len(self.margined) and np.any(self.form_matrix(self.margined) @ u < xi - tol):
            return False
        if len(self.equalities) and np.any(np.abs(self.form_matrix(self.equalities) @ u) > tol):
            return False
        return True

    def lp(self, objective: NDArray[np.float64], margin: float) -> LpProblem:
        """Minimisation problem over utilities with every margined form ``>= margin``."""
        m = self.n_variables
        lower, upper = np.zeros(m), np.ones(m)
        upper[self.zero] = 0.0
        lower[self.one] = 1.0
        return LpProblem(
            c=objective,
            A_ub=-self.form_matrix(self.margined),
            b_ub=np.full(len(self.margined), -float(margin)),
            A_eq=self.form_matrix(self.equalities),
            b_eq=np.zeros(len(self.equalities)),
            lower=lower,
            upper=upper,
            names=tuple(f"u{i}" for i in range(m)),
        )


def _covering(strict: NDArray[np.bool_]) -> NDArray[np.bool_]:
    f = strict.astype(np.float32)
    return strict & ~((f @ f) > 0.5)


def _dominance(vectors: NDArray[np.int64], block_bytes: int = 64 * 2**20) -> NDArray[np.bool_]:
    """``out[p, q]`` iff ``vectors[p] >= vectors[q]`` componentwise."""
    n, dim = vectors.shape
    out = np.empty((n, n), dtype=bool)
    step = max(1, block_bytes // max(1, n * max(dim, 1)))
    for start in range(0, n, step):
        blk = vectors[start:start + step]
        out[start:start + step] = np.all(blk[:, None, :] >= vectors[None, :, :], axis=-1)
    return out


def build_constraints(
    points: Iterable[ArrayLike] | NDArray[np.float64],
    scale: ScaleSpec,
    *,
    max_constraints: int = DEFAULT_MAX_CONSTRAINTS,
    max_pair_classes: int = DEFAULT_MAX_PAIR_CLASSES,
) -> ConstraintSet:
    """Constraint system of the preference system restricted to ``points``.

    The all-zeros and all-ones points are always added. Equal points share
    one variable. The output depends only on the set of points, not on
    their order.

    Raises:
        ValueError: a point is outside ``[0, 1]^n``.
        ConstraintCapExceeded: the enumeration exceeds the size limits.
    """
    n = scale.n
    pts = np.asarray(list(points) if not isinstance(points, np.ndarray) else points, dtype=float)
    pts = pts.reshape(-1, n)
    if np.isnan(pts).any() or (pts < 0).any() or (pts > 1).any():
        raise ValueError("all points must lie in [0, 1]^n")
    anchors = np.array([[0] * n, [RESOLUTION] * n], dtype=np.int64)
    q = np.unique(np.vstack([quantize(pts), anchors]), axis=0)
    m = q.shape[0]
    zero, one = 0, m - 1  # lexicographic order puts the anchors at the ends

    ge = np.all(q[:, None, :] >= q[None, :, :], axis=-1)
    strict = ge & ~np.eye(m, dtype=bool)
    cover = _covering(strict)
    a1, b1 = np.nonzero(cover)
    r1_rows = np.column_stack([a1, b1, np.full_like(a1, -1), np.full_like(a1, -1)])

    card = scale.cardinal_mask
    hi_idx, lo_idx = np.nonzero(strict)
    eq_rows = np.zeros((0, 4), dtype=np.int64)
    r2_rows = np.zeros((0, 4), dtype=np.int64)
    if len(hi_idx) > 1:
        vec = _r2_vector(q[hi_idx], q[lo_idx], card)
        classes, first, inverse = np.unique(vec, axis=0, return_index=True, return_inverse=True)
        inverse = inverse.ravel()
        if len(classes) > max_pair_classes:
            raise ConstraintCapExceeded(
                f"{len(classes)} distinct exchange classes exceed max_pair_classes={max_pair_classes}"
            )
        # pairs with identical vectors are R2-indifferent: tie each to its class representative
        rep = first[inverse]
        members = np.flatnonzero(rep != np.arange(len(hi_idx)))
        eq_rows = np.column_stack([hi_idx[rep[members]], lo_idx[rep[members]], hi_idx[members], lo_idx[members]])

        dom = _dominance(classes)
        np.fill_diagonal(dom, False)
        edges = _covering(dom) if len(classes) <= COVER_REDUCTION_LIMIT else dom
        p, r = np.nonzero(edges)
        a, b = hi_idx[first[p]], lo_idx[first[p]]
        c, d = hi_idx[first[r]], lo_idx[first[r]]
        # u(a)-u(b) >= u(c)-u(d) already follows from a R1 c and d R1 b
        implied = ge[a, c] & ge[d, b]
        r2_rows = np.column_stack([a, b, c, d])[~implied]

    total = len(r1_rows) + len(r2_rows) + len(eq_rows)
    if total > max_constraints:
        raise ConstraintCapExceeded(f"{total} constraints exceed max_constraints={max_constraints}")
    return ConstraintSet(
        points=q / RESOLUTION,
        zero=zero,
        one=one,
        margined=np.vstack([r1_rows, r2_rows]).astype(np.int64),
        equalities=eq_rows.astype(np.int64),
    )


@dataclass(frozen=True)
class Granularity:
    """Largest feasible margin ``xi_star``; regularised margins scale it by ``delta``."""

    xi_star: float

    def mu_of(self, delta: float) -> float:
        return 0.0 if delta == 0 else float(delta) * self.xi_star


def granularity(cs: ConstraintSet) -> Granularity:
    """Maximise the common margin ``xi`` of all margined constraints.

    Raises:
        InconsistentSystem: the system is infeasible for every ``xi``.
    """
    m = cs.n_variables
    k = len(cs.margined)
    A = cs.form_matrix(cs.margined)
    # variables: u[0..m-1], xi ; rows: xi - form <= 0
    A_ub = sparse.hstack([-A, sparse.csr_matrix(np.ones((k, 1)))]).tocsr()
    A_eq = sparse.hstack([cs.form_matrix(cs.equalities), sparse.csr_matrix((len(cs.equalities), 1))]).tocsr()
    lower, upper = np.zeros(m + 1), np.ones(m + 1)
    upper[cs.zero] = 0.0
    lower[cs.one] = 1.0
    lower[m], upper[m] = -np.inf, np.inf
    c = np.zeros(m + 1)
    c[m] = 1.0
    sol = solve(LpProblem(c, A_ub, np.zeros(k), A_eq, np.zeros(len(cs.equalities)), lower, upper, maximize=True))
    if sol.status is LpStatus.INFEASIBLE:
        raise InconsistentSystem("constraint system is infeasible")
    if sol.status is LpStatus.UNBOUNDED:
        return Granularity(float("inf"))
    if not sol.ok:
        raise NumericalError(f"granularity LP failed: {sol.message}")
    xi = sol.objective_value
    return Granularity(0.0 if abs(xi) < 1e-12 else xi)


def check_consistency(cs: ConstraintSet, tol: float = 1e-9) -> bool:
    """True iff some utility satisfies every margined constraint strictly."""
    try:
        return granularity(cs).xi_star > tol
    except InconsistentSystem:
        return False
