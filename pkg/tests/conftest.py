from __future__ import annotations

import numpy as np
import pytest

from gsdfront.core import PerformanceTable, ScaleSpec


def make_table(values, scale: ScaleSpec | None = None, classifiers=None) -> PerformanceTable:
    """Table from an ``(s, k, n)`` nested list with default ids ``C1..``, ``D1..``."""
    arr = np.asarray(values, dtype=float)
    s, k, n = arr.shape
    scale = scale or ScaleSpec.uniform(n, "cardinal")
    classifiers = classifiers or tuple(f"C{c + 1}" for c in range(k))
    return PerformanceTable(tuple(classifiers), tuple(f"D{i + 1}" for i in range(s)), scale, arr)


@pytest.fixture
def mixed_scale() -> ScaleSpec:
    return ScaleSpec.of(("accuracy", "cardinal"), ("speed", "ordinal"), ("memory", "ordinal"))


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
