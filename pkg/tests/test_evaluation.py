from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from poirec.aggregation import Measure
from poirec.evaluation import (cross_validate, format_csv, format_table, make_fold_plan, paired_t_test,
                               pair_digest, stars)
from poirec.predictor import AlgorithmConfig, Family, Objective, algorithm_matrix
from poirec.synthetic import SyntheticSpec, generate_synthetic

from oracles import brute_paired_t_p


@pytest.fixture(scope="module")
def synth():
    ds, truth = generate_synthetic(SyntheticSpec(n_users=15, n_items=30, noise=0.3, seed=11))
    return ds, truth


def test_t_test_degenerate_conventions():
    assert paired_t_test([0.3, 0.4, 0.5], [0.3, 0.4, 0.5]) == 1
    assert paired_t_test([1] * 5, [0] * 5) == 0
    assert paired_t_test([0.5, 0.6, 0.7], [0.4, 0.5, 0.6]) == 0
    with pytest.raises(ValueError):
        paired_t_test([1.0], [2.0])
    with pytest.raises(ValueError):
        paired_t_test([1.0, 2.0], [2.0])


def test_t_test_against_reference_on_non_degenerate_variant():
    a, b = [0.5, 0.6, 0.7], [0.4, 0.52, 0.57]
    assert paired_t_test(a, b) == pytest.approx(brute_paired_t_p(a, b), abs=1e-6)
    a, b = [0.61, 0.55, 0.58, 0.64, 0.6], [0.52, 0.54, 0.5, 0.57, 0.49]
    assert paired_t_test(a, b) == pytest.approx(brute_paired_t_p(a, b), abs=1e-6)


def test_star_levels():
    assert stars(0.001) == "**"
    assert stars(0.03) == "*"
    assert stars(0.2) == ""


def test_fold_plan_soundness(synth):
    ds, _ = synth
    plan = make_fold_plan(ds, 5, seed=3)
    for user in ds.users:
        if user.user_id in plan.excluded:
            continue
        rated = set(user.ratings)
        n = len(rated)
        seen = []
        for f in range(5):
            test = set(plan.test_items(user.user_id, f))
            train = set(plan.train_items(user.user_id, f))
            assert test | train == rated
            assert not test & train
            assert len(test) in {n // 5, -(-n // 5)}
            seen.extend(test)
        assert sorted(seen) == sorted(rated)


def test_fold_plan_excludes_sparse_users(small_dataset):
    plan = make_fold_plan(small_dataset, 5)
    assert plan.folds == {}
    assert plan.excluded == ("u1", "u2")
    with pytest.raises(ValueError, match="no evaluable users"):
        cross_validate(small_dataset, algorithm_matrix(), plan)


def test_fold_plan_independent_of_user_order(synth):
    ds, _ = synth
    reversed_ds = replace(ds, users=tuple(reversed(ds.users)))
    assert make_fold_plan(ds, 5, 1) == make_fold_plan(reversed_ds, 5, 1)
    assert make_fold_plan(ds, 5, 1) != make_fold_plan(ds, 5, 2)


def test_report_shape_and_order(synth):
    ds, _ = synth
    report = cross_validate(ds, algorithm_matrix(alpha_step=0.05), make_fold_plan(ds, 5, 0))
    maps = [r.values["map"] for r in report.rows]
    assert maps == sorted(maps, reverse=True)
    assert len(report.rows) == 13
    for row in report.rows:
        v = row.values
        for m in ("precision", "recall", "f1", "map", "mrr", "coverage"):
            assert 0 <= v[m] <= 1
        assert v["rmse"] >= v["mae"] >= 0
        assert len(row.folds) == 5
    for metric in ("map", "mae"):
        assert sum(metric in r.best for r in report.rows) == 1
        assert sum(metric in r.best_other for r in report.rows) == 1
    assert len({tuple(d) for d in report.test_digests.values()}) == 1


def test_ind_with_zero_one_grid_matches_c_only_on_compatibility_raters():
    spec = SyntheticSpec(n_users=8, n_items=25, alpha=1.0, noise=0.0, density=0.8, seed=5, exact_ratings=True)
    ds, _ = generate_synthetic(spec)
    ind = AlgorithmConfig(Family.IND, Measure.AVE, Objective.RMSE, alpha_step=1.0)
    c_only = AlgorithmConfig(Family.C_ONLY, Measure.AVE)
    report = cross_validate(ds, [ind, c_only], make_fold_plan(ds, 5, 0))
    assert report.row("Ind_Ave").values == report.row("C-only_Ave").values
    assert report.row("Ind_Ave").folds == report.row("C-only_Ave").folds


def test_pref_only_exact_on_preference_raters():
    ds, _ = generate_synthetic(SyntheticSpec(n_users=10, n_items=20, alpha=0.0, noise=0.0, seed=2))
    report = cross_validate(ds, [AlgorithmConfig(Family.PREF_ONLY)], make_fold_plan(ds, 5, 0))
    assert report.row("Pref-only").values["mae"] == 0
    assert report.row("Pref-only").values["rmse"] == 0


def test_report_ignores_user_input_order(synth):
    ds, _ = synth
    configs = algorithm_matrix(alpha_step=0.1)
    a = cross_validate(ds, configs, make_fold_plan(ds, 5, 9), settings={"seed": 9})
    shuffled = replace(ds, users=tuple(ds.users[k] for k in np.random.default_rng(0).permutation(len(ds.users))))
    b = cross_validate(shuffled, configs, make_fold_plan(shuffled, 5, 9), settings={"seed": 9})
    assert format_table(a) == format_table(b)
    assert format_csv(a) == format_csv(b)


def test_csv_report_columns(synth):
    ds, _ = synth
    report = cross_validate(ds, [AlgorithmConfig(Family.PREF_ONLY), AlgorithmConfig(Family.IND, Measure.COS)],
                            make_fold_plan(ds, 5, 0), settings={"top_n": 5})
    text = format_csv(report)
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    assert lines[0].split(",")[:11] == ["algorithm", "category", "fold", "precision", "recall", "f1", "map",
                                        "mrr", "mae", "rmse", "coverage"]
    assert len(lines) == 1 + 2 + 2 * 5
    assert "# top_n: 5" in text


def test_digest_is_order_free():
    assert pair_digest([("u", "a"), ("v", "b")]) == pair_digest([("v", "b"), ("u", "a")])
    assert pair_digest([("u", "a")]) != pair_digest([("u", "b")])


@settings(max_examples=30)
@given(st.lists(st.floats(0, 1), min_size=3, max_size=6), st.lists(st.floats(-0.2, 0.2), min_size=3, max_size=6))
def test_t_test_agrees_with_scipy_away_from_degeneracy(a, shift):
    n = min(len(a), len(shift))
    a, shift = np.array(a[:n]), np.array(shift[:n])
    if np.ptp(shift) < 1e-6:
        return
    b = a + shift
    assert paired_t_test(a, b) == pytest.approx(stats.ttest_rel(a, b).pvalue, rel=1e-9)
