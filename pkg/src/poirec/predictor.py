"""Rating prediction, per-user alpha fitting and Top-N ranking.

The predicted rating is a per-user weighted mean of item compatibility and
the user's preference for the item's category::

    rating = alpha * compatibility + (1 - alpha) * preference

clamped to the rating scale. ``Ind`` fits ``alpha`` for each user, ``C-only``
fixes it at 1, ``Pref-only`` at 0. ``MC`` skips the weighting and aggregates
preference and per-feature compatibilities in a single list.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .aggregation import Measure, compatibilities, item_features_matrix, mc_scores
from .domain import FeatureSchema, ItemProfile, UserProfile
from .metrics import DEFAULT_THRESHOLD, batch_average_precision

DEFAULT_TOP_N = 5
DEFAULT_ALPHA_STEP = 0.01
# objective values closer than this are treated as ties
TIE_TOLERANCE = 1e-12


class Family(str, enum.Enum):
    IND = "Ind"
    MC = "MC"
    C_ONLY = "C-only"
    PREF_ONLY = "Pref-only"


class Objective(str, enum.Enum):
    MAP = "map"
    RMSE = "rmse"


@dataclass(frozen=True)
class AlgorithmConfig:
    family: Family
    measure: Measure | None = None
    alpha_objective: Objective = Objective.MAP
    alpha_step: float = DEFAULT_ALPHA_STEP

    def __post_init__(self):
        if (self.measure is None) != (self.family is Family.PREF_ONLY):
            raise ValueError("a measure is required for every family except Pref-only")
        steps = round(1 / self.alpha_step) if self.alpha_step > 0 else 0
        if steps < 1 or abs(steps * self.alpha_step - 1) > 1e-9:
            raise ValueError(f"alpha step {self.alpha_step} must divide 1 evenly")

    @property
    def name(self) -> str:
        if self.measure is None:
            return self.family.value
        return f"{self.family.value}_{self.measure.value}"

    @property
    def fixed_alpha(self) -> float | None:
        return {Family.C_ONLY: 1.0, Family.PREF_ONLY: 0.0}.get(self.family)

    def alpha_grid(self) -> np.ndarray:
        steps = round(1 / self.alpha_step)
        return np.linspace(0.0, 1.0, steps + 1)

    @classmethod
    def parse(cls, name: str, **kwargs) -> "AlgorithmConfig":
        """Build a config from a name like ``Ind_Cos`` or ``Pref-only``."""
        fam_text, _, measure_text = name.partition("_")
        for fam in Family:
            if fam.value.lower() == fam_text.strip().lower():
                measure = Measure.parse(measure_text) if measure_text else None
                return cls(fam, measure, **kwargs)
        raise ValueError(f"unknown algorithm {name!r}")


def algorithm_matrix(alpha_objective: Objective = Objective.MAP,
                     alpha_step: float = DEFAULT_ALPHA_STEP) -> list[AlgorithmConfig]:
    configs = [AlgorithmConfig(fam, m, alpha_objective, alpha_step)
               for fam in (Family.IND, Family.MC, Family.C_ONLY) for m in Measure]
    configs.append(AlgorithmConfig(Family.PREF_ONLY, None, alpha_objective, alpha_step))
    return configs


def preferences_for(user: UserProfile, items: Sequence[ItemProfile]) -> np.ndarray:
    try:
        return np.array([user.preferences[it.category] for it in items], dtype=float)
    except KeyError as exc:
        raise ValueError(f"user {user.user_id!r} has no preference for category {exc.args[0]!r}") from None


@dataclass(frozen=True)
class ItemScores:
    """Alpha-independent inputs to prediction for one user and a set of items."""

    item_ids: tuple[str, ...]
    pref: np.ndarray
    comp: np.ndarray | None = None  # Ind / C-only
    mc: np.ndarray | None = None  # MC


def score_items(user: UserProfile, items: Sequence[ItemProfile], schema: FeatureSchema,
                config: AlgorithmConfig) -> ItemScores:
    ids = tuple(it.item_id for it in items)
    pref = preferences_for(user, items)
    if not items:
        return ItemScores(ids, pref, np.empty(0), np.empty(0))
    feats = item_features_matrix(items)
    if config.family is Family.MC:
        return ItemScores(ids, pref, mc=mc_scores(user, feats, pref, schema, config.measure))
    if config.family is Family.PREF_ONLY:
        return ItemScores(ids, pref)
    return ItemScores(ids, pref, comp=compatibilities(user, feats, schema, config.measure))


def combine(alpha, comp, pref, v_max):
    """Weighted mean of compatibility and preference, clamped to [1, v_max]."""
    return np.clip(alpha * comp + (1 - alpha) * pref, 1, v_max)


def predictions(scores: ItemScores, config: AlgorithmConfig, alpha: float | None, v_max: int) -> np.ndarray:
    if config.family is Family.MC:
        return np.clip(scores.mc, 1, v_max)
    alpha = _resolve_alpha(config, alpha)
    if config.family is Family.PREF_ONLY:
        return np.clip(scores.pref, 1, v_max)
    return combine(alpha, scores.comp, scores.pref, v_max)


def _resolve_alpha(config: AlgorithmConfig, alpha: float | None) -> float | None:
    fixed = config.fixed_alpha
    if fixed is not None:
        if alpha is not None and alpha != fixed:
            raise ValueError(f"{config.name} uses a fixed alpha of {fixed}")
        return fixed
    if config.family is Family.IND:
        if alpha is None:
            raise ValueError("Ind requires an alpha")
        if not 0 <= alpha <= 1:
            raise ValueError(f"alpha {alpha} outside [0, 1]")
    return alpha


def predict_rating(user: UserProfile, item: ItemProfile, schema: FeatureSchema,
                   config: AlgorithmConfig, alpha: float | None = None) -> float:
    scores = score_items(user, [item], schema, config)
    return float(predictions(scores, config, alpha, schema.v_max)[0])


def rank_order(preds: np.ndarray, item_ids: Sequence[str]) -> np.ndarray:
    """Indices sorting predictions descending, ties by ascending item id."""
    by_id = np.argsort(np.asarray(item_ids, dtype=object), kind="stable") if len(item_ids) else np.empty(0, int)
    order = np.argsort(-np.asarray(preds)[by_id], kind="stable")
    return by_id[order]


def alpha_objectives(comp: np.ndarray, pref: np.ndarray, truth: np.ndarray, item_ids: Sequence[str],
                     grid: np.ndarray, v_max: int, top_n: int, threshold: float) -> tuple[np.ndarray, np.ndarray]:
    """MAP@top_n and RMSE of the training ranking at every alpha on the grid."""
    preds = combine(grid[:, None], comp[None, :], pref[None, :], v_max)
    rel = truth >= threshold
    by_id = np.argsort(np.asarray(item_ids, dtype=object), kind="stable")
    order = np.argsort(-preds[:, by_id], axis=1, kind="stable")
    rel_ranked = rel[by_id][order]
    ap = batch_average_precision(rel_ranked, int(rel.sum()), top_n)
    rmse = np.sqrt(((preds - truth[None, :]) ** 2).mean(axis=1))
    return ap, rmse


def select_alpha(grid: np.ndarray, ap: np.ndarray, rmse: np.ndarray, objective: Objective) -> float:
    """Best grid point: primary objective, then lower RMSE, then smallest alpha."""
    keep = np.ones(len(grid), dtype=bool)
    if objective is Objective.MAP:
        keep &= ap >= ap.max() - TIE_TOLERANCE
    best_rmse = rmse[keep].min()
    keep &= rmse <= best_rmse + TIE_TOLERANCE
    return float(grid[np.flatnonzero(keep)[0]])


def fit_alpha(user: UserProfile, train_items: Sequence[ItemProfile], schema: FeatureSchema,
              config: AlgorithmConfig, *, top_n: int = DEFAULT_TOP_N,
              threshold: float = DEFAULT_THRESHOLD, ratings: Mapping[str, float] | None = None) -> float:
    """Grid-search the user's alpha on their training ratings.

    Families without a free alpha return their fixed value. MC has no alpha
    and is rejected.
    """
    if config.family is Family.MC:
        raise ValueError("MC has no alpha to fit")
    if not train_items:
        raise ValueError(f"user {user.user_id!r} has no training ratings")
    if config.fixed_alpha is not None:
        return config.fixed_alpha
    ratings = user.ratings if ratings is None else ratings
    scores = score_items(user, train_items, schema, config)
    truth = np.array([ratings[i] for i in scores.item_ids], dtype=float)
    grid = config.alpha_grid()
    ap, rmse = alpha_objectives(scores.comp, scores.pref, truth, scores.item_ids, grid,
                                schema.v_max, top_n, threshold)
    return select_alpha(grid, ap, rmse, config.alpha_objective)


@dataclass(frozen=True)
class RankedList:
    entries: tuple[tuple[str, float], ...]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def item_ids(self) -> list[str]:
        return [iid for iid, _ in self.entries]


@dataclass(frozen=True)
class FittedModel:
    config: AlgorithmConfig
    alphas: Mapping[str, float] = field(default_factory=dict)

    def alpha_for(self, user_id: str) -> float | None:
        if self.config.family is Family.MC:
            return None
        if self.config.fixed_alpha is not None:
            return self.config.fixed_alpha
        return self.alphas[user_id]


def fit_model(config: AlgorithmConfig, users: Sequence[UserProfile], items: Mapping[str, ItemProfile],
              schema: FeatureSchema, *, top_n: int = DEFAULT_TOP_N,
              threshold: float = DEFAULT_THRESHOLD) -> FittedModel:
    """Fit alpha for every user on all of their ratings."""
    alphas = {}
    if config.family is Family.IND:
        for user in sorted(users, key=lambda u: u.user_id):
            train = [items[i] for i in sorted(user.ratings)]
            alphas[user.user_id] = fit_alpha(user, train, schema, config, top_n=top_n, threshold=threshold)
    elif config.fixed_alpha is not None:
        alphas = {u.user_id: config.fixed_alpha for u in users}
    return FittedModel(config, alphas)


def top_n(user: UserProfile, candidates: Sequence[ItemProfile], schema: FeatureSchema,
          model: FittedModel, n: int = DEFAULT_TOP_N) -> RankedList:
    if n < 1:
        raise ValueError("N must be at least 1")
    if not candidates:
        return RankedList(())
    scores = score_items(user, candidates, schema, model.config)
    preds = predictions(scores, model.config, model.alpha_for(user.user_id), schema.v_max)
    order = rank_order(preds, scores.item_ids)[:n]
    return RankedList(tuple((scores.item_ids[k], float(preds[k])) for k in order))


def is_identifiable(comp: np.ndarray, pref: np.ndarray, min_items: int = 2) -> bool:
    """Alpha is recoverable only if compatibility and preference disagree on
    at least ``min_items`` rated items."""
    return int(np.sum(~np.isclose(comp, pref, rtol=0, atol=1e-12))) >= min_items
