"""Item-level compatibility from per-feature values.

All functions operate on the last axis, so a 2-D array of items x features
yields one score per item.
"""

from __future__ import annotations

import enum

import numpy as np

from .aversion import compatibility_matrix, ideal_vector
from .domain import FeatureSchema, ItemProfile, UserProfile


class Measure(str, enum.Enum):
    MIN = "Min"
    AVE = "Ave"
    COS = "Cos"
    RMSD = "RMSD"

    @classmethod
    def parse(cls, text: str) -> "Measure":
        for m in cls:
            if m.value.lower() == text.strip().lower():
                return m
        raise ValueError(f"unknown measure {text!r}; choose from {', '.join(m.value for m in cls)}")


def _nonempty(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] == 0:
        raise ValueError("compatibility list is empty")
    return arr


def _paired(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    return a, b


def compat_min(comps):
    return _nonempty(comps).min(axis=-1)


def compat_ave(comps):
    return _nonempty(comps).mean(axis=-1)


def compat_cos(item_vec, ideal, v_max):
    """Cosine similarity rescaled from (0, 1] onto (1, v_max]."""
    a, b = _paired(item_vec, ideal)
    dot = (a * b).sum(axis=-1)
    # sqrt(s * s) == s in IEEE arithmetic, so identical vectors give cos == 1 exactly
    cos = dot / np.sqrt((a * a).sum(axis=-1) * (b * b).sum(axis=-1))
    return 1 + (v_max - 1) * np.minimum(cos, 1.0)


def compat_rmsd(item_vec, ideal, v_max):
    a, b = _paired(item_vec, ideal)
    return v_max + 1 - np.sqrt(((a - b) ** 2).mean(axis=-1))


def item_features_matrix(items) -> np.ndarray:
    return np.array([it.features for it in items], dtype=float).reshape(len(items), -1)


def compatibilities(user: UserProfile, item_features: np.ndarray, schema: FeatureSchema,
                    measure: Measure) -> np.ndarray:
    """Overall compatibility of each item row with ``user``."""
    item_features = np.atleast_2d(np.asarray(item_features, dtype=float))
    if measure in (Measure.MIN, Measure.AVE):
        comps = compatibility_matrix(user, schema, item_features)
        return compat_min(comps) if measure is Measure.MIN else compat_ave(comps)
    ideal = ideal_vector(user, schema)
    if measure is Measure.COS:
        return compat_cos(item_features, ideal, schema.v_max)
    return compat_rmsd(item_features, ideal, schema.v_max)


def item_compatibility(user: UserProfile, item: ItemProfile, schema: FeatureSchema, measure: Measure) -> float:
    return float(compatibilities(user, item_features_matrix([item]), schema, measure)[0])


def mc_scores(user: UserProfile, item_features: np.ndarray, prefs: np.ndarray,
              schema: FeatureSchema, measure: Measure) -> np.ndarray:
    """Multi-criteria baseline: the category preference is appended to the
    per-feature compatibilities and the whole list is aggregated at once.
    Cos and RMSD compare the list against a vector of all ``v_max``.
    """
    comps = compatibility_matrix(user, schema, item_features)
    extended = np.column_stack([comps, np.asarray(prefs, dtype=float)])
    if measure is Measure.MIN:
        return compat_min(extended)
    if measure is Measure.AVE:
        return compat_ave(extended)
    target = np.full(extended.shape[-1], float(schema.v_max))
    if measure is Measure.COS:
        return compat_cos(extended, target, schema.v_max)
    return compat_rmsd(extended, target, schema.v_max)


def mc_score(user: UserProfile, item: ItemProfile, schema: FeatureSchema, measure: Measure) -> float:
    pref = user.preferences[item.category]
    return float(mc_scores(user, item_features_matrix([item]), np.array([pref]), schema, measure)[0])
