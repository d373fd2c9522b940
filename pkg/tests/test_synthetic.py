import math

import numpy as np
import pytest

from poirec.aggregation import Measure, item_compatibility
from poirec.domain import validate
from poirec.synthetic import SyntheticSpec, generate_synthetic, write_synthetic


def test_noise_free_compatibility_raters_round_their_compatibility():
    ds, truth = generate_synthetic(SyntheticSpec(n_users=5, n_items=20, alpha=1.0, noise=0.0, seed=3))
    for user in ds.users:
        assert truth.alphas[user.user_id] == 1.0
        for iid, rating in user.ratings.items():
            comp = item_compatibility(user, ds.item(iid), ds.schema, Measure.AVE)
            assert rating == math.floor(comp + 0.5)


def test_same_seed_same_data():
    spec = SyntheticSpec(n_users=10, n_items=12, noise=0.5, seed=99)
    assert generate_synthetic(spec)[0] == generate_synthetic(spec)[0]
    assert generate_synthetic(spec)[1] == generate_synthetic(spec)[1]
    other = SyntheticSpec(n_users=10, n_items=12, noise=0.5, seed=100)
    assert generate_synthetic(other)[0] != generate_synthetic(spec)[0]


def test_density_matches_binomial_expectation():
    # 100 users x 50 items at density 0.6: mean 30, per-seed standard error about 0.35
    means = []
    for seed in range(5):
        ds, _ = generate_synthetic(SyntheticSpec(n_users=100, n_items=50, density=0.6, seed=seed))
        means.append(np.mean([len(u.ratings) for u in ds.users]))
    assert abs(np.mean(means) - 30) < 0.5
    assert all(abs(m - 30) < 1.5 for m in means)


def test_generated_data_is_valid():
    for exact in (False, True):
        ds, truth = generate_synthetic(SyntheticSpec(n_users=20, n_items=15, noise=1.0, seed=1, exact_ratings=exact))
        assert validate(ds) == []
        assert all(1 <= v <= 5 for v in truth.noiseless.values())
        assert len(truth.noiseless) == 20 * 15


def test_alpha_distributions():
    ds, truth = generate_synthetic(SyntheticSpec(n_users=40, n_items=5, alpha=(0.0, 0.5), seed=2))
    assert set(truth.alphas.values()) == {0.0, 0.5}
    _, truth = generate_synthetic(SyntheticSpec(n_users=40, n_items=5, seed=2))
    assert all(0 <= a <= 1 for a in truth.alphas.values())
    assert len(set(truth.alphas.values())) == 40


@pytest.mark.parametrize("kwargs", [dict(n_users=0), dict(density=0), dict(density=1.5), dict(noise=-1),
                                    dict(alpha=1.5), dict(alpha="normal")])
def test_invalid_specs(kwargs):
    with pytest.raises(ValueError):
        SyntheticSpec(**kwargs)


def test_latent_files(tmp_path):
    ds, truth = generate_synthetic(SyntheticSpec(n_users=3, n_items=4, seed=0))
    write_synthetic(ds, truth, tmp_path)
    lines = (tmp_path / "latent_alpha.csv").read_text().splitlines()
    assert lines[0] == "user_id,alpha"
    assert len(lines) == 4
    assert len((tmp_path / "latent_ratings.csv").read_text().splitlines()) == 1 + 12
