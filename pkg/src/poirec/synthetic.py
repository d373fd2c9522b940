"""Synthetic datasets with a known per-user alpha.

Ratings follow the prediction model itself, so fitted alphas can be checked
against the generating ones.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .aggregation import Measure, compatibilities
from .domain import (DEFAULT_CATEGORIES, DEFAULT_SCHEMA, AversionDeclaration, Dataset, FeatureKind,
                     FeatureSchema, ItemProfile, UserProfile)
from .dataio import write_dataset


@dataclass(frozen=True)
class SyntheticSpec:
    n_users: int = 100
    n_items: int = 50
    n_categories: int = 14
    schema: FeatureSchema = DEFAULT_SCHEMA
    # "uniform", a single value, or a tuple of values drawn with equal probability
    alpha: str | float | tuple[float, ...] = "uniform"
    noise: float = 0.0
    density: float = 0.7
    seed: int = 0
    measure: Measure = Measure.AVE
    exact_ratings: bool = False

    def __post_init__(self):
        if min(self.n_users, self.n_items, self.n_categories) < 1:
            raise ValueError("user, item and category counts must be at least 1")
        if not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")
        if self.noise < 0:
            raise ValueError("noise must be non-negative")
        for a in self._alpha_values():
            if not 0 <= a <= 1:
                raise ValueError(f"alpha {a} outside [0, 1]")

    def _alpha_values(self) -> tuple[float, ...]:
        if isinstance(self.alpha, str):
            if self.alpha != "uniform":
                raise ValueError(f"unknown alpha distribution {self.alpha!r}")
            return ()
        if isinstance(self.alpha, (int, float)):
            return (float(self.alpha),)
        return tuple(float(a) for a in self.alpha)

    def sample_alpha(self, rng: np.random.Generator) -> float:
        values = self._alpha_values()
        if not values:
            return float(rng.uniform(0.0, 1.0))
        if len(values) == 1:
            return values[0]
        return values[int(rng.integers(len(values)))]


@dataclass(frozen=True)
class LatentTruth:
    alphas: dict[str, float]
    # unrounded, noise-free rating for every (user, item) pair
    noiseless: dict[tuple[str, str], float] = field(repr=False)


def _category_names(n: int) -> list[str]:
    if n <= len(DEFAULT_CATEGORIES):
        return list(DEFAULT_CATEGORIES[:n])
    return [f"cat{k:02d}" for k in range(n)]


def generate_synthetic(spec: SyntheticSpec) -> tuple[Dataset, LatentTruth]:
    rng = np.random.default_rng(spec.seed)
    schema = spec.schema
    v_max = schema.v_max
    categories = _category_names(spec.n_categories)
    uid_width = len(str(spec.n_users - 1))
    iid_width = len(str(spec.n_items - 1))

    cat_idx = rng.integers(len(categories), size=spec.n_items)
    feats = rng.uniform(1.0, v_max, size=(spec.n_items, len(schema)))
    items = [ItemProfile(f"i{k:0{iid_width}d}", f"Place {k}", categories[cat_idx[k]], feats[k].tolist())
             for k in range(spec.n_items)]

    users, alphas, noiseless = [], {}, {}
    for n in range(spec.n_users):
        uid = f"u{n:0{uid_width}d}"
        prefs = {c: int(v) for c, v in zip(categories, rng.integers(1, v_max + 1, size=len(categories)))}
        avs = {}
        for feat in schema:
            at_max = int(rng.integers(1, v_max + 1))
            at_min = int(rng.integers(1, v_max + 1)) if feat.kind is FeatureKind.VSHAPED else None
            avs[feat.id] = AversionDeclaration(feat.id, at_max, at_min)
        alpha = spec.sample_alpha(rng)
        profile = UserProfile(uid, prefs, avs)
        comp = compatibilities(profile, feats, schema, spec.measure)
        pref = np.array([prefs[it.category] for it in items], dtype=float)
        clean = alpha * comp + (1 - alpha) * pref
        noisy = np.clip(clean + rng.normal(0.0, spec.noise, size=spec.n_items), 1, v_max) if spec.noise > 0 \
            else np.clip(clean, 1, v_max)
        rated = rng.random(spec.n_items) < spec.density
        ratings = {}
        for k in np.flatnonzero(rated):
            value = float(noisy[k])
            ratings[items[k].item_id] = value if spec.exact_ratings else int(math.floor(value + 0.5))
        users.append(profile.with_ratings(ratings))
        alphas[uid] = alpha
        for k, it in enumerate(items):
            noiseless[(uid, it.item_id)] = float(np.clip(clean[k], 1, v_max))

    dataset = Dataset(schema, categories, users, items, integer_ratings=not spec.exact_ratings)
    return dataset, LatentTruth(alphas, noiseless)


def write_synthetic(dataset: Dataset, truth: LatentTruth, directory) -> None:
    directory = Path(directory)
    write_dataset(dataset, directory)
    with open(directory / "latent_alpha.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", "alpha"])
        for uid in sorted(truth.alphas):
            w.writerow([uid, repr(truth.alphas[uid])])
    with open(directory / "latent_ratings.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", "item_id", "noiseless_rating"])
        for (uid, iid), value in sorted(truth.noiseless.items()):
            w.writerow([uid, iid, repr(value)])
