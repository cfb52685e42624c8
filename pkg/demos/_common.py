"""Shared loading for the demo scripts."""

from __future__ import annotations

from pathlib import Path

from gsdfront.core import PerformanceTable
from gsdfront.io import AnalysisConfig, ingest

DATA = Path(__file__).resolve().parent / "data"


def load_benchmark() -> tuple[PerformanceTable, AnalysisConfig]:
    config = AnalysisConfig.load(DATA / "config.yaml")
    return ingest(DATA / "benchmark.csv", config), config
