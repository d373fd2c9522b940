"""Piecewise-linear aversion curves and per-feature compatibility.

A user declares aversion only at the ends of each feature's scale. The
curve in between is a straight line for increasing features and the upper
envelope of two lines for V-shaped ones. Every function here accepts a
scalar or a numpy array for the feature value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import FeatureKind, FeatureSchema, UserProfile


def _check_range(x, v_max):
    arr = np.asarray(x, dtype=float)
    if not np.all((arr >= 1) & (arr <= v_max)):
        raise ValueError(f"feature value {x!r} outside [1, {v_max}]")


def line_up(x, a_at_max, v_max):
    """Line through (1, 1) and (v_max, a_at_max)."""
    _check_range(x, v_max)
    return 1 + (a_at_max - 1) * (x - 1) / (v_max - 1)


def line_down(x, a_at_min, v_max):
    """Line through (1, a_at_min) and (v_max, 1)."""
    _check_range(x, v_max)
    return 1 + (x - v_max) * (1 - a_at_min) / (v_max - 1)


@dataclass(frozen=True)
class AversionCurve:
    feature_id: str
    kind: FeatureKind
    v_max: int
    a_at_max: int
    a_at_min: int = 1

    def __post_init__(self):
        if self.kind is FeatureKind.INCREASING and self.a_at_min != 1:
            raise ValueError("increasing curves have an implicit aversion of 1 at the minimum")
        for a in (self.a_at_min, self.a_at_max):
            if not 1 <= a <= self.v_max:
                raise ValueError(f"aversion {a!r} outside [1, {self.v_max}]")

    def __call__(self, x):
        return estimated_aversion(self, x)


def estimated_aversion(curve: AversionCurve, x):
    up = line_up(x, curve.a_at_max, curve.v_max)
    if curve.kind is FeatureKind.INCREASING:
        return up
    return np.maximum(up, line_down(x, curve.a_at_min, curve.v_max))


def feature_compatibility(curve: AversionCurve, x):
    return curve.v_max + 1 - estimated_aversion(curve, x)


def ideal_value(curve: AversionCurve) -> float:
    """Feature value with the lowest estimated aversion.

    For V-shaped curves this is where the two lines cross. A completely flat
    curve has no unique minimum and maps to the middle of the scale.
    """
    if curve.kind is FeatureKind.INCREASING:
        return 1.0
    rise = curve.a_at_max - 1
    fall = curve.a_at_min - 1
    if rise == 0 and fall == 0:
        return (curve.v_max + 1) / 2
    return (rise + fall * curve.v_max) / (rise + fall)


def user_curves(user: UserProfile, schema: FeatureSchema) -> list[AversionCurve]:
    curves = []
    for feat in schema.features:
        decl = user.aversions[feat.id]
        a_min = decl.at_min if feat.kind is FeatureKind.VSHAPED else 1
        curves.append(AversionCurve(feat.id, feat.kind, schema.v_max, decl.at_max, a_min))
    return curves


def ideal_vector(user: UserProfile, schema: FeatureSchema) -> np.ndarray:
    return np.array([ideal_value(c) for c in user_curves(user, schema)], dtype=float)


def compatibility_matrix(user: UserProfile, schema: FeatureSchema, item_features: np.ndarray) -> np.ndarray:
    """Per-feature compatibility for a batch of items (rows) and the schema's features (columns)."""
    item_features = np.atleast_2d(np.asarray(item_features, dtype=float))
    cols = [feature_compatibility(c, item_features[:, k]) for k, c in enumerate(user_curves(user, schema))]
    return np.column_stack(cols)
