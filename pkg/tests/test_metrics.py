import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from poirec.metrics import (average_precision, batch_average_precision, mae_rmse, precision_recall_f1,
                            reciprocal_rank, relevance, user_coverage)

from oracles import (brute_average_precision, brute_mae_rmse, brute_precision_recall_f1,
                     brute_reciprocal_rank)

TOY = [True, False, True, False, False]


def test_relevance_threshold():
    assert relevance(5, 4)
    assert not relevance(3, 4)
    assert relevance(4, 4)
    assert relevance(4.0)


def test_toy_ranking():
    p, r, f1 = precision_recall_f1(TOY, 2, 5)
    assert p == pytest.approx(0.4)
    assert r == 1.0
    assert f1 == pytest.approx(0.5714, abs=1e-4)
    assert average_precision(TOY, 2, 5) == pytest.approx(0.8333, abs=1e-4)
    assert average_precision(TOY, 2, 5) == pytest.approx((1 + 2 / 3) / 2, abs=1e-15)
    assert reciprocal_rank(TOY, 5) == 1


def test_perfect_and_missed_rankings():
    assert precision_recall_f1([True] * 5, 5, 5) == (1.0, 1.0, 1.0)
    assert precision_recall_f1([False] * 5, 3, 5) == (0.0, 0.0, 0.0)
    assert average_precision([True] * 8, 8, 5) == 1.0
    assert average_precision([False] * 5, 2, 5) == 0.0
    assert average_precision([False] * 5, 0, 5) == 0.0


def test_reciprocal_rank_positions():
    assert reciprocal_rank([True, False], 5) == 1
    assert reciprocal_rank([False, False, True], 5) == pytest.approx(1 / 3)
    assert reciprocal_rank([False] * 5 + [True], 5) == 0


def test_mae_rmse_examples():
    assert mae_rmse([1, 2, 3], [1, 2, 3]) == (0.0, 0.0)
    assert mae_rmse([2, 3, 4], [1, 2, 3]) == (1.0, 1.0)
    mae, rmse = mae_rmse([1, 3], [1, 1])
    assert mae == 1.0
    assert rmse == pytest.approx(math.sqrt(2))
    with pytest.raises(ValueError):
        mae_rmse([], [])


def test_user_coverage():
    assert user_coverage([5, 5, 3]) == 1.0
    assert user_coverage([5, 0]) == 0.5
    assert user_coverage([]) == 0


rankings = st.integers(0, 8).flatmap(lambda m: st.tuples(
    st.lists(st.booleans(), min_size=m, max_size=m), st.integers(0, 4), st.integers(1, 8)))


@given(rankings)
def test_against_brute_force(case):
    flags, extra, n = case
    total = sum(flags) + extra
    assert precision_recall_f1(flags, total, n) == brute_precision_recall_f1(flags, total, n)
    assert average_precision(flags, total, n) == brute_average_precision(flags, total, n)
    assert reciprocal_rank(flags, n) == brute_reciprocal_rank(flags, n)
    for value in (*precision_recall_f1(flags, total, n), average_precision(flags, total, n)):
        assert 0 <= value <= 1


@given(st.lists(st.tuples(st.floats(1, 5), st.floats(1, 5)), min_size=1, max_size=20))
def test_errors_against_brute_force(pairs):
    pred, truth = zip(*pairs)
    mae, rmse = mae_rmse(pred, truth)
    assert (mae, rmse) == brute_mae_rmse(pred, truth)
    assert rmse >= mae - 1e-12 >= -1e-12


@given(st.lists(st.lists(st.booleans(), min_size=6, max_size=6), min_size=1, max_size=5), st.integers(1, 6))
def test_batch_ap_matches_single(rows, n):
    total = max(sum(r) for r in rows)
    batch = batch_average_precision(np.array(rows), total, n)
    for row, value in zip(rows, batch):
        assert value == pytest.approx(average_precision(row, total, n), abs=1e-15)
