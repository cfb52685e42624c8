"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from conftest import make_table, record_criterion

from gsdfront import cli
from gsdfront.core import PerformanceTable, ScaleSpec
from gsdfront.gsd import EmpiricalMeasure, d_matrix, d_statistic, egsd_front, pareto_front
from gsdfront.permtest import ResamplingMode, ResamplingPlan, _decide, all_pairwise, enumerating_sampler, pairwise_test, resample_statistics
from gsdfront.prefsys import build_constraints, granularity
from gsdfront.robust import aggregate_curve, contamination_curve, contamination_pvalue
from gsdfront.synth import ORDINAL_LEVELS, consistency_experiment, default_model, fsd_oracle, grid_oracle_d, random_table

DEMO = Path(__file__).resolve().parents[1] / "demos" / "data"
TOL = 1e-9


def test_criterion_1_front_containment():
    rng = np.random.default_rng(101)
    scale = ScaleSpec.of(("acc", "cardinal"), ("m2", "ordinal"), ("m3", "ordinal"))
    violations = 0
    for _ in range(100):
        t = random_table(rng, 4, 20, scale)
        d = d_matrix(t)
        wide, narrow = egsd_front(t, 0.05, d=d).as_set(), egsd_front(t, 0.2, d=d).as_set()
        if not (narrow <= wide <= pareto_front(t).as_set()):
            violations += 1
    record_criterion(1, violations == 0, f"{violations} containment violations in 100 tables")
    assert violations == 0


def test_criterion_2_fsd_oracle():
    rng = np.random.default_rng(202)
    scale = ScaleSpec.uniform(1, "ordinal")
    agree = 0
    for _ in range(200):
        s = int(rng.integers(1, 16))
        x, y = rng.choice(ORDINAL_LEVELS, s), rng.choice(ORDINAL_LEVELS, s)
        t = make_table(np.stack([x, y], axis=1)[:, :, None], scale)
        agree += (d_statistic("C1", "C2", t).value >= -TOL) == fsd_oracle(x, y)
    record_criterion(2, agree == 200, f"{agree}/200 agree with the ECDF oracle")
    assert agree == 200


def test_criterion_3_grid_oracle():
    rng = np.random.default_rng(303)
    scale = ScaleSpec.of(("acc", "cardinal"), ("m2", "ordinal"))
    G = 20
    violations, worst = 0, 0.0
    for i in range(100):
        # half the instances on a coarse lattice, half with arbitrary two-decimal coordinates
        if i < 50:
            pts = rng.integers(0, 11, size=(4, 2)) / 10
        else:
            pts = np.round(rng.random((4, 2)), 2)
        x, y = pts[:2], pts[2:]
        t = PerformanceTable(("A", "B"), ("D1", "D2"), scale, np.stack([x, y], axis=1))
        lp = d_statistic("A", "B", t).value
        grid = grid_oracle_d(EmpiricalMeasure.from_sample(x), EmpiricalMeasure.from_sample(y), pts, scale, 1 / G)
        n_points = build_constraints(pts, scale).n_variables - 2
        gap = grid - lp
        worst = max(worst, gap)
        if not (lp <= grid + TOL and gap <= n_points / G + TOL):
            violations += 1
    record_criterion(3, violations == 0, f"{violations} violations in 100 instances, largest gap {worst:.4f}")
    assert violations == 0


def test_criterion_4_exhaustive_equality():
    rng = np.random.default_rng(404)
    scale = ScaleSpec.of(("acc", "cardinal"), ("m2", "ordinal"))
    exhaustive = ResamplingPlan.exhaustive(3)
    enumerated = ResamplingPlan(3, ResamplingMode.SAMPLED, 20, include_observed=False, sampler=enumerating_sampler)
    equal, rule_ok = True, True
    for _ in range(10):
        t = random_table(rng, 2, 3, scale)
        x, y = t.sample("C1"), t.sample("C2")
        a = resample_statistics(x, y, scale, exhaustive)
        b = resample_statistics(x, y, scale, enumerated)
        equal &= len(a) == 20 and np.array_equal(a, b)
        res = pairwise_test("C1", "C2", t, 0.05, exhaustive)
        # the observed split is one of the 20, so it can never lie below the minimum
        rule_ok &= res.ell == 1 and res.critical_value == a[0] and not res.reject
        rule_ok &= _decide("C1", "C2", a[0] - 1e-6, a, 0.05, 0.0, exhaustive).reject
        rule_ok &= not _decide("C1", "C2", a[0], a, 0.05, 0.0, exhaustive).reject
    record_criterion(4, equal and rule_ok, f"multisets equal: {equal}, ell=1 rule holds: {rule_ok}")
    assert equal and rule_ok


@pytest.mark.slow
def test_criterion_5_level_validity():
    rng = np.random.default_rng(505)
    scale = ScaleSpec.of(("acc", "cardinal"), ("m2", "ordinal"), ("m3", "ordinal"))
    s, N, M = 10, 100, 200
    rejections = 0
    for run in range(M):
        vals = np.empty((s, 2, 3))
        vals[:, :, 0] = np.round(rng.beta(4, 2, size=(s, 2)), 2)
        vals[:, :, 1:] = rng.choice(ORDINAL_LEVELS, size=(s, 2, 2))
        t = make_table(vals, scale)
        res = pairwise_test("C1", "C2", t, 0.05, ResamplingPlan.sampled(s, N, seed=run))
        rejections += res.reject
    freq = rejections / M
    bound = 0.05 + 3 * math.sqrt(0.05 * 0.95 / M)
    record_criterion(5, freq <= bound, f"rejection frequency {freq:.3f} against bound {bound:.3f}")
    assert freq <= bound


@pytest.mark.slow
def test_criterion_6_consistency():
    rep = consistency_experiment(default_model(), [50, 200, 800], runs=50, epsilon_c=1.0, seed=0)
    rec, sup = rep.recovery_rate, rep.superset_rate
    grid = [50, 200, 800]
    ok = (
        all(rec[a] <= rec[b] for a, b in zip(grid, grid[1:]))
        and all(sup[s] >= rec[s] for s in grid)
        and sup[800] >= 0.95
    )
    record_criterion(6, ok, f"recovery {rec}, superset {sup}")
    assert ok


def test_criterion_7_contamination_formula():
    hand = (
        contamination_pvalue([-0.2, -0.1, 0.0, 0.1], -0.3, 0, 10) == 0.0
        and contamination_pvalue([-0.2, -0.1, 0.0, 0.1], -0.3, 1, 10) == 0.5
    )
    rng = np.random.default_rng(707)
    monotone_violations = 0
    for _ in range(1000):
        s = int(rng.integers(2, 30))
        d = rng.uniform(-1, 0, size=int(rng.integers(1, 60)))
        obs = float(rng.uniform(-1, 0))
        vals = [contamination_pvalue(d, obs, k, s) for k in range(s)]
        monotone_violations += any(b < a for a, b in zip(vals, vals[1:]))
    t = random_table(np.random.default_rng(708), 3, 8, ScaleSpec.of(("acc", "cardinal"), ("m2", "ordinal")))
    pw = all_pairwise("C1", t, plan=ResamplingPlan.sampled(8, 50, seed=1))
    curves = {c: contamination_curve(r, 7) for c, r in pw.items()}
    agg = aggregate_curve("C1", curves)
    is_max = all(agg(k) == max(cv(k) for cv in curves.values()) for k in range(8))
    ok = hand and monotone_violations == 0 and is_max
    record_criterion(7, ok, f"hand values exact: {hand}, monotonicity violations: {monotone_violations}, aggregate is max: {is_max}")
    assert ok


def test_criterion_8_granularity():
    values = {}
    for n in (1, 2, 3):
        for kind in ("cardinal", "ordinal"):
            values[f"anchors n={n} {kind}"] = (granularity(build_constraints([], ScaleSpec.uniform(n, kind))).xi_star, 1.0)
    values["cardinal midpoint"] = (granularity(build_constraints([(0.5,)], ScaleSpec.uniform(1, "cardinal"))).xi_star, 0.5)
    errors = {k: abs(v - want) for k, (v, want) in values.items()}
    ok = max(errors.values()) <= 1e-9
    record_criterion(8, ok, f"largest deviation {max(errors.values()):.2e} over {len(errors)} systems")
    assert ok


@pytest.mark.slow
def test_criterion_9_cli_determinism(tmp_path, capsys):
    csv_path, cfg = str(DEMO / "benchmark.csv"), str(DEMO / "config.yaml")
    commands = {
        "analyze": ["analyze", csv_path, "--config", cfg],
        "test": ["test", csv_path, "--config", cfg, "--target", "SVM", "--n-resamples", "60"],
        "robust": ["robust", csv_path, "--config", cfg, "--target", "SVM", "--n-resamples", "60"],
        "baseline": ["baseline", csv_path, "--config", cfg],
        "simulate": ["simulate", "--s-grid", "10", "20", "--runs", "3", "--seed", "5"],
        "validate": ["validate", csv_path, "--config", cfg],
    }
    mismatches = []
    for name, argv in commands.items():
        dirs = [tmp_path / f"{name}_{i}" for i in (1, 2)]
        codes = [cli.main([*argv, "--out", str(d)]) for d in dirs]
        files = sorted(p.name for p in dirs[0].iterdir())
        if codes != [0, 0] or not files:
            mismatches.append(f"{name}: exit codes {codes}")
            continue
        mismatches += [f"{name}/{f}" for f in files if (dirs[0] / f).read_bytes() != (dirs[1] / f).read_bytes()]
    capsys.readouterr()
    record_criterion(9, not mismatches, f"{len(commands)} commands, differing outputs: {mismatches or 'none'}")
    assert not mismatches
