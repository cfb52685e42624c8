from __future__ import annotations

import numpy as np
import pytest
from conftest import make_table

from gsdfront.core import ScaleSpec
from gsdfront.permtest import ResamplingPlan, _decide, all_pairwise, static_gsd_test
from gsdfront.robust import (
    ContaminationCurve,
    aggregate_curve,
    aggregate_F,
    breakdown,
    breakdown_for,
    contamination_curve,
    contamination_pvalue,
    default_k_max,
    robustified_dynamic_test,
    robustified_static_test,
)

MIXED = ScaleSpec.of(("acc", "cardinal"), ("t", "ordinal"))


def _table(s=8):
    rng = np.random.default_rng(0)
    base = np.round(rng.uniform(0.05, 0.45, size=(s, 1, 2)), 2)
    return make_table(np.concatenate([base, base + 0.5, base + 0.1], axis=1), MIXED, ("T", "A", "B"))


def test_hand_values():
    d = [-0.2, -0.1, 0.0, 0.1]
    assert contamination_pvalue(d, -0.3, 0, 10) == pytest.approx(0.0)
    assert contamination_pvalue(d, -0.3, 1, 10) == pytest.approx(0.5)


def test_exact_tie_at_threshold_does_not_exceed():
    # 2k/(s-k) = 0.5 for k=2, s=10; difference exactly 0.5 is not strictly greater
    assert contamination_pvalue([0.0], -0.5, 2, 10) == 1.0
    assert contamination_pvalue([0.01], -0.5, 2, 10) == 0.0


def test_argument_checks():
    with pytest.raises(ValueError):
        contamination_pvalue([0.0], 0.0, 10, 10)
    with pytest.raises(ValueError):
        contamination_pvalue([0.0], 0.0, -1, 10)
    with pytest.raises(ValueError):
        contamination_pvalue([], 0.0, 0, 10)


def test_k_zero_matches_permutation_p_value():
    rng = np.random.default_rng(1)
    for _ in range(100):
        d = np.sort(np.round(rng.normal(size=30), 1))
        obs = float(np.round(rng.normal(), 1))
        assert contamination_pvalue(d, obs, 0, 12) == pytest.approx(_decide("a", "b", obs, d, 0.05, 0.0, None).p_value)


def test_curve_is_monotone_and_bounded():
    rng = np.random.default_rng(2)
    for _ in range(50):
        d = rng.uniform(-1, 1, size=25)
        obs = float(rng.uniform(-1, 1))
        vals = [contamination_pvalue(d, obs, k, 12) for k in range(12)]
        assert all(0.0 <= v <= 1.0 for v in vals)
        assert vals == sorted(vals)


def test_default_k_max():
    assert default_k_max(80) == 20
    assert default_k_max(10) == 3
    assert default_k_max(2) == 1
    assert default_k_max(1) == 0


def test_constructed_breakdown_at_one():
    # resamples sit 0.25 above the observed value: beyond 2/9 (k=1) but within 0.5 (k=2)
    d = np.array([-0.5] + [-0.25] * 19)
    curve = ContaminationCurve("x", 10, tuple(contamination_pvalue(d, -0.5, k, 10) for k in range(4)))
    assert curve.values[:3] == pytest.approx((0.05, 0.05, 1.0))
    assert breakdown(curve, 0.05).k_star == 1


def test_breakdown_edge_cases():
    assert breakdown(ContaminationCurve("x", 10, (0.3, 0.4)), 0.05).k_star is None
    assert breakdown(ContaminationCurve("x", 10, (0.0, 0.0, 0.0)), 0.05).k_star == 2
    # the scan does not assume monotonicity
    assert breakdown(ContaminationCurve("x", 10, (0.0, 0.5, 0.0)), 0.05).k_star == 2


def test_aggregate_is_pointwise_max():
    a = ContaminationCurve("a", 5, (0.1, 0.2, 0.9))
    b = ContaminationCurve("b", 5, (0.3, 0.1, 0.4))
    assert aggregate_curve("T", {"a": a, "b": b}).values == (0.3, 0.2, 0.9)
    with pytest.raises(ValueError):
        aggregate_curve("T", {})


def test_aggregate_F_on_table():
    t = _table()
    plan = ResamplingPlan.sampled(8, 100, seed=1)
    pw = all_pairwise("A", t, plan=plan)
    curves = {c: contamination_curve(r) for c, r in pw.items()}
    for k in range(default_k_max(8) + 1):
        F = aggregate_F("A", t, k=k, pairwise=pw)
        assert F == max(c(k) for c in curves.values())
        assert F >= aggregate_F("A", t, k=0, pairwise=pw)
    two = t.subset(["T", "A"])
    pw2 = all_pairwise("A", two, plan=plan)
    assert aggregate_F("A", two, k=1, pairwise=pw2) == contamination_curve(pw2["T"])(1)


def test_robustified_static_is_conservative_and_monotone():
    t = _table()
    plan = ResamplingPlan.sampled(8, 100, seed=1)
    pw = all_pairwise("A", t, plan=plan)
    plain = static_gsd_test("A", t, 0.05, pairwise=pw)
    decisions = [robustified_static_test("A", t, 0.05, k=k, pairwise=pw).reject for k in range(4)]
    assert decisions[0] == (plain.max_p_value <= 0.05)
    assert decisions == sorted(decisions, reverse=True)


def test_robustified_dynamic_sets_shrink():
    t = _table()
    pw = all_pairwise("A", t, plan=ResamplingPlan.sampled(8, 100, seed=1))
    sets = [set(robustified_dynamic_test("A", t, 0.05, k=k, pairwise=pw).s_max) for k in range(4)]
    assert all(later <= earlier for earlier, later in zip(sets, sets[1:]))
    assert robustified_dynamic_test("A", t, 0.05, pairwise=pw).level == pytest.approx(0.025)


def test_breakdown_for_table():
    t = _table()
    plan = ResamplingPlan.sampled(8, 100, seed=1)
    rep = breakdown_for("A", t, 0.05, plan=plan, candidate="T")
    assert rep.label == "T>A"
    assert rep.k_star is not None and 0 <= rep.k_star <= default_k_max(8)
    agg = breakdown_for("A", t, 0.05, plan=plan)
    assert agg.k_star is None or agg.k_star <= rep.k_star
