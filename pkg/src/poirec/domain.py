"""Data model shared by every part of the recommender.

Values are immutable after construction. Structural checks live in
:func:`validate`, which reports problems as data instead of raising, so a
loader can collect every violation in one pass.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence


class FeatureKind(str, enum.Enum):
    """How aversion to a sensory feature varies with its value."""

    INCREASING = "increasing"
    VSHAPED = "vshaped"

    @classmethod
    def parse(cls, text: str) -> "FeatureKind":
        key = text.strip().lower().replace("-", "").replace("_", "")
        aliases = {"increasing": cls.INCREASING, "up": cls.INCREASING,
                   "vshaped": cls.VSHAPED, "v": cls.VSHAPED}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown feature kind {text!r}") from None


@dataclass(frozen=True)
class Feature:
    id: str
    kind: FeatureKind


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[Feature, ...]
    v_max: int = 5

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.features)

    def index(self, feature_id: str) -> int:
        for pos, feat in enumerate(self.features):
            if feat.id == feature_id:
                return pos
        raise KeyError(feature_id)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str | FeatureKind]], v_max: int = 5) -> "FeatureSchema":
        feats = tuple(Feature(fid, k if isinstance(k, FeatureKind) else FeatureKind.parse(k))
                      for fid, k in pairs)
        return cls(feats, v_max)


#: Sensory features covered by the aversion questionnaire.
#: Temperature is collected by the crowdsourcing platform but has no aversion
#: question, so it is left out of the default set.
DEFAULT_SCHEMA = FeatureSchema.from_pairs([
    ("brightness", FeatureKind.VSHAPED),
    ("crowding", FeatureKind.INCREASING),
    ("noise", FeatureKind.INCREASING),
    ("smell", FeatureKind.INCREASING),
    ("space", FeatureKind.VSHAPED),
])

DEFAULT_CATEGORIES: tuple[str, ...] = (
    "nature", "museums", "shows", "comics", "clothing", "malls", "library",
    "bookshop", "sport", "pubs", "restaurant", "ice_cream", "squares",
    "railway_stations",
)


@dataclass(frozen=True)
class AversionDeclaration:
    """Declared aversion at the ends of a feature's scale.

    ``at_min`` is only stored for V-shaped features; for increasing features
    the aversion at value 1 is implicitly 1.
    """

    feature_id: str
    at_max: int
    at_min: int | None = None


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    preferences: Mapping[str, int]
    aversions: Mapping[str, AversionDeclaration]
    ratings: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "preferences", MappingProxyType(dict(self.preferences)))
        object.__setattr__(self, "aversions", MappingProxyType(dict(self.aversions)))
        object.__setattr__(self, "ratings", MappingProxyType(dict(self.ratings)))

    def with_ratings(self, ratings: Mapping[str, float]) -> "UserProfile":
        return UserProfile(self.user_id, self.preferences, self.aversions, ratings)


@dataclass(frozen=True)
class ItemProfile:
    item_id: str
    name: str
    category: str
    features: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(float(v) for v in self.features))


@dataclass(frozen=True)
class Dataset:
    schema: FeatureSchema
    categories: tuple[str, ...]
    users: tuple[UserProfile, ...]
    items: tuple[ItemProfile, ...]
    integer_ratings: bool = True

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "users", tuple(self.users))
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "_users_by_id", {u.user_id: u for u in self.users})
        object.__setattr__(self, "_items_by_id", {i.item_id: i for i in self.items})

    def user(self, user_id: str) -> UserProfile:
        return self._users_by_id[user_id]

    def item(self, item_id: str) -> ItemProfile:
        return self._items_by_id[item_id]

    def has_user(self, user_id: str) -> bool:
        return user_id in self._users_by_id

    def has_item(self, item_id: str) -> bool:
        return item_id in self._items_by_id

    def sorted_users(self) -> list[UserProfile]:
        return sorted(self.users, key=lambda u: u.user_id)

    def sorted_items(self) -> list[ItemProfile]:
        return sorted(self.items, key=lambda i: i.item_id)


class DatasetError(Exception):
    """Base class for dataset loading failures."""


class ParseError(DatasetError):
    pass


class ValidationError(DatasetError):
    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        shown = "; ".join(self.violations[:10])
        more = f" (+{len(self.violations) - 10} more)" if len(self.violations) > 10 else ""
        super().__init__(f"{len(self.violations)} violation(s): {shown}{more}")


def _likert(value, v_max: int) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and 1 <= value <= v_max


def _validate_schema(schema: FeatureSchema) -> list[str]:
    out = []
    if not isinstance(schema.v_max, int) or schema.v_max < 2:
        out.append(f"schema: v_max must be an integer >= 2, got {schema.v_max!r}")
    if not schema.features:
        out.append("schema: feature list is empty")
    seen = set()
    for feat in schema.features:
        if feat.id in seen:
            out.append(f"schema: duplicate feature id {feat.id!r}")
        seen.add(feat.id)
        if not isinstance(feat.kind, FeatureKind):
            out.append(f"schema: feature {feat.id!r} has invalid kind {feat.kind!r}")
    return out


def validate(dataset: Dataset) -> list[str]:
    """Return a description of every broken invariant; empty when valid."""
    out = _validate_schema(dataset.schema)
    schema = dataset.schema
    v_max = schema.v_max if isinstance(schema.v_max, int) and schema.v_max >= 2 else 5

    if not dataset.categories:
        out.append("categories: set is empty")
    if len(set(dataset.categories)) != len(dataset.categories):
        out.append("categories: duplicate category ids")
    categories = set(dataset.categories)

    item_ids = set()
    for item in dataset.items:
        tag = f"item {item.item_id!r}"
        if item.item_id in item_ids:
            out.append(f"{tag}: duplicate item id")
        item_ids.add(item.item_id)
        if item.category not in categories:
            out.append(f"{tag}: unknown category {item.category!r}")
        if len(item.features) != len(schema.features):
            out.append(f"{tag}: has {len(item.features)} feature values, schema has {len(schema.features)}")
        for feat, value in zip(schema.features, item.features):
            if not (math.isfinite(value) and 1 <= value <= v_max):
                out.append(f"{tag}: feature {feat.id!r} value {value!r} outside [1, {v_max}]")

    user_ids = set()
    for user in dataset.users:
        tag = f"user {user.user_id!r}"
        if user.user_id in user_ids:
            out.append(f"{tag}: duplicate user id")
        user_ids.add(user.user_id)
        for cat in dataset.categories:
            if cat not in user.preferences:
                out.append(f"{tag}: missing preference for category {cat!r}")
        for cat, value in user.preferences.items():
            if cat not in categories:
                out.append(f"{tag}: preference for unknown category {cat!r}")
            elif not _likert(value, v_max):
                out.append(f"{tag}: preference {cat!r}={value!r} is not a Likert value in [1, {v_max}]")
        for feat in schema.features:
            decl = user.aversions.get(feat.id)
            if decl is None:
                out.append(f"{tag}: missing aversion declaration for feature {feat.id!r}")
                continue
            if not _likert(decl.at_max, v_max):
                out.append(f"{tag}: aversion {feat.id!r} at max {decl.at_max!r} not in [1, {v_max}]")
            if feat.kind is FeatureKind.VSHAPED:
                if decl.at_min is None:
                    out.append(f"{tag}: V-shaped feature {feat.id!r} lacks the aversion at min")
                elif not _likert(decl.at_min, v_max):
                    out.append(f"{tag}: aversion {feat.id!r} at min {decl.at_min!r} not in [1, {v_max}]")
            elif decl.at_min is not None:
                out.append(f"{tag}: increasing feature {feat.id!r} must not declare an aversion at min")
        for fid in user.aversions:
            if fid not in schema.ids:
                out.append(f"{tag}: aversion for unknown feature {fid!r}")
        for iid, rating in user.ratings.items():
            if iid not in dataset._items_by_id:
                out.append(f"{tag}: rating references unknown item {iid!r}")
            if dataset.integer_ratings:
                ok = _likert(rating, v_max) or (isinstance(rating, float) and rating.is_integer() and 1 <= rating <= v_max)
            else:
                ok = isinstance(rating, (int, float)) and math.isfinite(rating) and 1 <= rating <= v_max
            if not ok:
                out.append(f"{tag}: rating of item {iid!r} = {rating!r} not a valid rating in [1, {v_max}]")
    return out
