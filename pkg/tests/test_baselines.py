from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import make_table
from scipy import stats

from gsdfront.baselines import (
    NEMENYI_Q,
    fsd_relation,
    friedman_test,
    marginal_front,
    nemenyi_pairwise,
    nemenyi_q,
)
from gsdfront.core import ScaleSpec
from gsdfront.gsd import egsd_front, empirical_gsd_relation
from gsdfront.synth import random_table

CARD1 = ScaleSpec.uniform(1, "cardinal")
ORD1 = ScaleSpec.uniform(1, "ordinal")


@pytest.mark.parametrize("alpha,k", [(0.05, 3), (0.05, 10), (0.01, 2), (0.10, 20), (0.01, 7)])
def test_q_table_matches_studentized_range(alpha, k):
    expected = stats.studentized_range.ppf(1 - alpha, k, np.inf) / math.sqrt(2)
    assert nemenyi_q(alpha, k) == pytest.approx(expected, abs=6e-4)


def test_q_table_shape_and_limits():
    assert nemenyi_q(0.05, 3) == 2.3437
    assert all(len(v) == 19 for v in NEMENYI_Q.values())
    with pytest.raises(ValueError, match="2..20"):
        nemenyi_q(0.05, 21)
    with pytest.raises(ValueError, match="alpha"):
        nemenyi_q(0.2, 3)


def test_fsd_finds_ecdf_edge():
    t = make_table([[[0.6], [0.2]], [[0.8], [0.5]], [[0.9], [0.1]]], ORD1, ("A", "B"))
    assert fsd_relation(t).strict_edges == (("A", "B"),)


def test_gsd_is_finer_than_fsd_on_cardinal_data():
    # crossing ECDFs, but the spread of A makes its expected utility at least u(0.45)
    t = make_table([[[0.0], [0.45]], [[1.0], [0.45]]], CARD1, ("A", "B"))
    assert empirical_gsd_relation(t).strict_edges == (("A", "B"),)
    assert fsd_relation(t).strict_edges == ()


def test_fsd_identical_and_all_ordinal_coincide():
    v = np.random.default_rng(0).random((5, 1, 2))
    assert fsd_relation(make_table(np.concatenate([v, v], axis=1))).groups == (("C1", "C2"),)
    t = random_table(np.random.default_rng(1), 3, 6, ScaleSpec.uniform(2, "ordinal"), decimals=1)
    a, b = fsd_relation(t), empirical_gsd_relation(t)
    assert (a.groups, a.strict_edges) == (b.groups, b.strict_edges)


def test_friedman_matches_scipy():
    rng = np.random.default_rng(2)
    for _ in range(20):
        t = random_table(rng, 4, 12, CARD1, decimals=1)
        ours = friedman_test(t, 0)
        ref = stats.friedmanchisquare(*[t.values[:, c, 0] for c in range(4)])
        assert ours.statistic == pytest.approx(ref.statistic, rel=1e-10)
        assert ours.p_value == pytest.approx(ref.pvalue, rel=1e-10)


def test_friedman_degenerate_and_strong():
    flat = make_table(np.full((5, 3, 1), 0.4))
    fr = friedman_test(flat, 0)
    assert (fr.statistic, fr.p_value, fr.reject) == (0.0, 1.0, False)
    rng = np.random.default_rng(3)
    base = rng.uniform(0, 0.6, size=(20, 1, 1))
    strong = make_table(np.concatenate([base + 0.3, base + 0.1, base], axis=1))
    assert friedman_test(strong, 0).p_value < 0.01
    with pytest.raises(ValueError):
        friedman_test(make_table(np.full((1, 3, 1), 0.4)), 0)


def test_friedman_invariant_to_dataset_order():
    t = random_table(np.random.default_rng(4), 3, 10, CARD1)
    perm = np.random.default_rng(5).permutation(10)
    shuffled = make_table(t.values[perm])
    assert friedman_test(t, 0).statistic == pytest.approx(friedman_test(shuffled, 0).statistic)


def test_nemenyi_far_pair_is_significant():
    rng = np.random.default_rng(6)
    base = rng.uniform(0, 0.4, size=(30, 1, 1))
    noise = rng.uniform(0, 0.3, size=(30, 2, 1))
    t = make_table(np.concatenate([base + 0.5, base + noise], axis=1), classifiers=("A", "B", "C"))
    nem = nemenyi_pairwise(t, 0)
    assert nem.critical_difference == pytest.approx(2.3437 * math.sqrt(3 * 4 / (6 * 30)))
    assert nem.beats("A", "B") and nem.beats("A", "C")
    assert np.array_equal(nem.significant, nem.significant.T)
    assert np.all(nem.p_values[nem.significant] < 0.05)


def test_nemenyi_identical_classifiers():
    v = np.random.default_rng(7).random((8, 1, 1))
    nem = nemenyi_pairwise(make_table(np.concatenate([v, v, v], axis=1)), 0)
    assert not nem.significant.any()
    assert not nem.friedman_rejected
    with pytest.raises(ValueError):
        nemenyi_pairwise(make_table(np.random.default_rng(8).random((4, 21, 1))), 0)


def test_marginal_front_examples():
    flat = make_table(np.full((6, 3, 2), 0.5))
    assert marginal_front(flat).front == ("C1", "C2", "C3")
    rng = np.random.default_rng(9)
    base = rng.uniform(0, 0.4, size=(30, 1, 2))
    t = make_table(np.concatenate([base + 0.5, base + 0.25, base], axis=1), classifiers=("A", "B", "C"))
    assert marginal_front(t).front == ("A",)


def test_marginal_front_can_exceed_gsd_front():
    # with three datasets no pair reaches the critical difference
    rng = np.random.default_rng(10)
    base = np.round(rng.uniform(0, 0.4, size=(3, 1, 2)), 2)
    t = make_table(np.concatenate([base + 0.3, base], axis=1), classifiers=("A", "B"))
    assert marginal_front(t).front == ("A", "B")
    assert egsd_front(t).members == ("A",)


def test_marginal_front_monotone_in_alpha():
    rng = np.random.default_rng(11)
    for _ in range(10):
        t = random_table(rng, 4, 15, ScaleSpec.uniform(2, "cardinal"))
        fronts = [set(marginal_front(t, a).front) for a in (0.01, 0.05, 0.10)]
        assert fronts[0] >= fronts[1] >= fronts[2]
