"""Small dense/sparse linear programs behind a stable contract.

HiGHS (through :func:`scipy.optimize.linprog`) does the solving. Every
optimal answer is re-checked here: the assignment must satisfy all
constraints within :data:`FEASIBILITY_TOL`, and the dual objective
reconstructed from the solver's marginals must match the primal value.
Anything else is reported as :attr:`LpStatus.NUMERICAL_FAILURE`, never
returned as a silent wrong answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import sparse
from scipy.optimize import linprog

FEASIBILITY_TOL = 1e-7
OPTIMALITY_TOL = 1e-9


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


def _as_csr(A, ncols: int) -> sparse.csr_matrix:
    if A is None:
        return sparse.csr_matrix((0, ncols))
    return sparse.csr_matrix(A, dtype=float)


@dataclass(frozen=True, eq=False)
class LpProblem:
    """``min`` (or ``max``) ``c @ x`` s.t. ``A_ub x <= b_ub``, ``A_eq x == b_eq``, ``lower <= x <= upper``."""

    c: NDArray[np.float64]
    A_ub: sparse.csr_matrix | None = None
    b_ub: NDArray[np.float64] | None = None
    A_eq: sparse.csr_matrix | None = None
    b_eq: NDArray[np.float64] | None = None
    lower: NDArray[np.float64] | None = None
    upper: NDArray[np.float64] | None = None
    maximize: bool = False
    names: tuple[str, ...] | None = field(default=None)

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float).ravel()
        nv = c.size
        A_ub = _as_csr(self.A_ub, nv)
        A_eq = _as_csr(self.A_eq, nv)
        b_ub = np.zeros(0) if self.b_ub is None else np.asarray(self.b_ub, dtype=float).ravel()
        b_eq = np.zeros(0) if self.b_eq is None else np.asarray(self.b_eq, dtype=float).ravel()
        lower = np.zeros(nv) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        upper = np.full(nv, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if A_ub.shape[1] != nv or A_eq.shape[1] != nv:
            raise ValueError("constraint matrices reference undeclared variables")
        if A_ub.shape[0] != b_ub.size or A_eq.shape[0] != b_eq.size:
            raise ValueError("right-hand sides do not match constraint rows")
        if lower.size != nv or upper.size != nv:
            raise ValueError("bounds must have one entry per variable")
        if self.names is not None and len(self.names) != nv:
            raise ValueError("names must have one entry per variable")
        for key, val in (("c", c), ("A_ub", A_ub), ("b_ub", b_ub), ("A_eq", A_eq),
                         ("b_eq", b_eq), ("lower", lower), ("upper", upper)):
            object.__setattr__(self, key, val)

    @property
    def n_variables(self) -> int:
        return self.c.size

    def with_objective(self, c: NDArray[np.float64], maximize: bool | None = None) -> "LpProblem":
        """Same feasible region, new objective. Matrices are shared, not copied."""
        out = object.__new__(LpProblem)
        for key in ("A_ub", "b_ub", "A_eq", "b_eq", "lower", "upper", "names"):
            object.__setattr__(out, key, getattr(self, key))
        c = np.asarray(c, dtype=float).ravel()
        if c.size != self.n_variables:
            raise ValueError("objective length does not match the variables")
        object.__setattr__(out, "c", c)
        object.__setattr__(out, "maximize", self.maximize if maximize is None else maximize)
        return out

    def violation(self, x: NDArray[np.float64]) -> float:
        """Largest absolute constraint violation of ``x`` (0 if feasible)."""
        parts = [0.0]
        if self.A_ub.shape[0]:
            parts.append(float(np.max(self.A_ub @ x - self.b_ub)))
        if self.A_eq.shape[0]:
            parts.append(float(np.max(np.abs(self.A_eq @ x - self.b_eq))))
        parts.append(float(np.max(self.lower - x, initial=0.0)))
        parts.append(float(np.max(x - self.upper, initial=0.0)))
        return max(parts)


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: LpStatus
    objective_value: float
    x: NDArray[np.float64] | None
    max_violation: float = float("nan")
    duality_gap: float = float("nan")
    message: str = ""
    names: tuple[str, ...] | None = None

    @property
    def ok(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    @property
    def assignment(self) -> dict[str, float]:
        if self.x is None:
            return {}
        names = self.names or tuple(f"x{i}" for i in range(self.x.size))
        return dict(zip(names, map(float, self.x)))


_STATUS = {2: LpStatus.INFEASIBLE, 3: LpStatus.UNBOUNDED}


def solve(problem: LpProblem) -> LpSolution:
    """Solve ``problem``. Identical inputs give identical outputs."""
    sign = -1.0 if problem.maximize else 1.0
    lower = np.where(np.isfinite(problem.lower), problem.lower, -np.inf)
    upper = np.where(np.isfinite(problem.upper), problem.upper, np.inf)
    res = linprog(
        sign * problem.c,
        A_ub=problem.A_ub if problem.A_ub.shape[0] else None,
        b_ub=problem.b_ub if problem.A_ub.shape[0] else None,
        A_eq=problem.A_eq if problem.A_eq.shape[0] else None,
        b_eq=problem.b_eq if problem.A_eq.shape[0] else None,
        bounds=np.column_stack([lower, upper]),
        method="highs",
    )
    if res.status in _STATUS:
        return LpSolution(_STATUS[res.status], float("nan"), None, message=res.message, names=problem.names)
    if res.status != 0 or res.x is None:
        return LpSolution(LpStatus.NUMERICAL_FAILURE, float("nan"), None, message=res.message, names=problem.names)

    x = np.asarray(res.x, dtype=float)
    primal = float(problem.c @ x)
    viol = problem.violation(x)
    dual = 0.0
    if problem.A_ub.shape[0]:
        dual += float(problem.b_ub @ res.ineqlin.marginals)
    if problem.A_eq.shape[0]:
        dual += float(problem.b_eq @ res.eqlin.marginals)
    fin_lo, fin_hi = np.isfinite(lower), np.isfinite(upper)
    dual += float(lower[fin_lo] @ res.lower.marginals[fin_lo])
    dual += float(upper[fin_hi] @ res.upper.marginals[fin_hi])
    gap = abs(sign * primal - dual)
    status = LpStatus.OPTIMAL
    message = res.message
    if viol > FEASIBILITY_TOL:
        status, message = LpStatus.NUMERICAL_FAILURE, f"assignment violates constraints by {viol:.3g}"
    elif gap > FEASIBILITY_TOL * (1.0 + abs(primal)):
        status, message = LpStatus.NUMERICAL_FAILURE, f"duality gap {gap:.3g}"
    return LpSolution(status, primal, x, viol, gap, message, problem.names)


def _num(v: float) -> str:
    return f"{v + 0.0:.17g}"  # + 0.0 turns -0.0 into 0.0


def _fmt_term(coef: float, name: str, first: bool) -> str:
    sign = "-" if coef < 0 else ("" if first else "+")
    mag = abs(coef)
    body = name if mag == 1.0 else f"{mag:.17g} {name}"
    return f"{sign} {body}".strip() if first else f"{sign} {body}"


def _fmt_row(row: sparse.csr_matrix, names: Sequence[str]) -> str:
    terms = [_fmt_term(v, names[j], i == 0) for i, (j, v) in enumerate(zip(row.indices, row.data)) if v != 0]
    return " ".join(terms) if terms else "0 " + names[0]


def write_lp(problem: LpProblem, target: str | Path | IO[str]) -> None:
    """Dump ``problem`` in CPLEX LP text format, for cross-checking with other solvers."""
    names = problem.names or tuple(f"x{i}" for i in range(problem.n_variables))
    names = tuple(n if n[0].isalpha() else f"v_{n}" for n in names)
    lines = ["\\ gsdfront debug dump", "Maximize" if problem.maximize else "Minimize"]
    obj = sparse.csr_matrix(problem.c.reshape(1, -1))
    lines.append(" obj: " + _fmt_row(obj, names))
    lines.append("Subject To")
    for i in range(problem.A_ub.shape[0]):
        lines.append(f" ub{i}: {_fmt_row(problem.A_ub.getrow(i), names)} <= {_num(problem.b_ub[i])}")
    for i in range(problem.A_eq.shape[0]):
        lines.append(f" eq{i}: {_fmt_row(problem.A_eq.getrow(i), names)} = {_num(problem.b_eq[i])}")
    lines.append("Bounds")
    for name, lo, hi in zip(names, problem.lower, problem.upper):
        if lo == hi:
            lines.append(f" {name} = {_num(lo)}")
            continue
        lo_s = "-inf" if not np.isfinite(lo) else _num(lo)
        hi_s = "+inf" if not np.isfinite(hi) else _num(hi)
        lines.append(f" {lo_s} <= {name} <= {hi_s}")
    lines.append("End")
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text, encoding="utf-8")
