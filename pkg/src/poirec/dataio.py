"""Reading and writing datasets as CSV or JSON files.

A dataset directory holds four files, each either ``.csv`` or ``.json``:
``schema``, ``items``, ``users`` and ``ratings``. See ``docs/data-format.md``
for the column layout.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .domain import (AversionDeclaration, Dataset, FeatureKind, FeatureSchema, ItemProfile, ParseError,
                     UserProfile, ValidationError, validate)

PREF_PREFIX = "pref:"
AV_MAX_PREFIX = "aversion_max:"
AV_MIN_PREFIX = "aversion_min:"
PARTS = ("schema", "items", "users", "ratings")


def _find(directory: Path, stem: str) -> Path:
    found = [directory / f"{stem}{ext}" for ext in (".json", ".csv") if (directory / f"{stem}{ext}").is_file()]
    if not found:
        raise ParseError(f"{directory}: missing {stem}.csv or {stem}.json")
    if len(found) > 1:
        raise ParseError(f"{directory}: both {stem}.csv and {stem}.json present")
    return found[0]


def _read_rows(path: Path) -> tuple[list[str], list[tuple[int, dict]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise ParseError(f"{path}: empty file")
            header = [h.strip() for h in reader.fieldnames]
            rows = []
            for row in reader:
                if None in row:
                    raise ParseError(f"{path}:{reader.line_num}: more cells than header columns")
                rows.append((reader.line_num, {k.strip(): (v or "").strip() for k, v in row.items()}))
            return header, rows
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _read_json(path: Path):
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _number(text, where: str):
    """Parse an int when the text is integral, otherwise a float."""
    if isinstance(text, bool):
        raise ParseError(f"{where}: expected a number, got {text!r}")
    if isinstance(text, (int, float)):
        return text
    try:
        return int(text)
    except (TypeError, ValueError):
        pass
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ParseError(f"{where}: non-finite number {text!r}")
    return value


def _require(header, columns, path):
    for col in columns:
        if col not in header:
            raise ParseError(f"{path}: missing column {col!r}")


def read_schema(path: Path) -> tuple[FeatureSchema, list[str] | None, bool]:
    """Return the schema, the category list if the file declares one, and
    whether ratings must be integers."""
    path = Path(path)
    try:
        if path.suffix == ".json":
            data = _read_json(path)
            feats = [(f["id"], f["kind"]) for f in data["features"]]
            v_max = data.get("v_max", 5)
            cats = data.get("categories")
            mode = data.get("ratings", "integer")
        else:
            header, rows = _read_rows(path)
            _require(header, ("feature", "kind"), path)
            feats = [(r["feature"], r["kind"]) for _, r in rows]
            v_max = _number(rows[0][1]["v_max"], f"{path}: v_max") if rows and rows[0][1].get("v_max") else 5
            cats = None
            mode = rows[0][1].get("ratings") or "integer" if rows else "integer"
        schema = FeatureSchema.from_pairs(feats, v_max)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{path}: malformed schema ({exc})") from exc
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if mode not in ("integer", "real"):
        raise ParseError(f"{path}: ratings must be 'integer' or 'real', got {mode!r}")
    return schema, cats, mode == "integer"


def read_items(path: Path, schema: FeatureSchema) -> list[ItemProfile]:
    path = Path(path)
    items = []
    if path.suffix == ".json":
        for n, rec in enumerate(_read_json(path)):
            where = f"{path}: item #{n}"
            try:
                values = [_number(rec["features"][f], f"{where} feature {f!r}") for f in schema.ids]
                items.append(ItemProfile(str(rec["item_id"]), rec.get("name", ""), rec["category"], values))
            except (KeyError, TypeError) as exc:
                raise ParseError(f"{where}: missing field {exc}") from exc
        return items
    header, rows = _read_rows(path)
    _require(header, ("item_id", "category", *schema.ids), path)
    for line, row in rows:
        values = [_number(row[f], f"{path}:{line} column {f!r}") for f in schema.ids]
        items.append(ItemProfile(row["item_id"], row.get("name", ""), row["category"], values))
    return items


def _declaration(schema_kind, fid, at_max, at_min, where):
    at_max = _number(at_max, f"{where} aversion max {fid!r}")
    if schema_kind is FeatureKind.VSHAPED:
        if at_min in (None, ""):
            raise ParseError(f"{where}: V-shaped feature {fid!r} needs an aversion at min")
        return AversionDeclaration(fid, at_max, _number(at_min, f"{where} aversion min {fid!r}"))
    return AversionDeclaration(fid, at_max)


def read_users(path: Path, schema: FeatureSchema, categories: list[str] | None) -> tuple[list[UserProfile], list[str]]:
    """Parse user profiles; categories default to the preference columns."""
    path = Path(path)
    users = []
    if path.suffix == ".json":
        data = _read_json(path)
        found = []
        for n, rec in enumerate(data):
            where = f"{path}: user #{n}"
            try:
                prefs = {c: _number(v, f"{where} preference {c!r}") for c, v in rec["preferences"].items()}
                avs = {}
                for feat in schema:
                    decl = rec["aversions"][feat.id]
                    avs[feat.id] = _declaration(feat.kind, feat.id, decl["max"], decl.get("min"), where)
                users.append(UserProfile(str(rec["user_id"]), prefs, avs))
            except (KeyError, TypeError, AttributeError) as exc:
                raise ParseError(f"{where}: missing field {exc}") from exc
            found.extend(c for c in prefs if c not in found)
        return users, categories if categories is not None else found
    header, rows = _read_rows(path)
    needed = ["user_id"] + [AV_MAX_PREFIX + f.id for f in schema]
    needed += [AV_MIN_PREFIX + f.id for f in schema if f.kind is FeatureKind.VSHAPED]
    _require(header, needed, path)
    pref_cols = [h[len(PREF_PREFIX):] for h in header if h.startswith(PREF_PREFIX)]
    if categories is None:
        categories = pref_cols
    for line, row in rows:
        where = f"{path}:{line}"
        prefs = {c: _number(row[PREF_PREFIX + c], f"{where} preference {c!r}")
                 for c in pref_cols if row[PREF_PREFIX + c] != ""}
        avs = {f.id: _declaration(f.kind, f.id, row[AV_MAX_PREFIX + f.id], row.get(AV_MIN_PREFIX + f.id), where)
               for f in schema}
        users.append(UserProfile(row["user_id"], prefs, avs))
    return users, categories


def read_ratings(path: Path) -> dict[str, dict[str, float]]:
    """Long-form ratings; blank ratings ("I don't know") are skipped."""
    path = Path(path)
    if path.suffix == ".json":
        records = [(f"{path}: rating #{n}", rec) for n, rec in enumerate(_read_json(path))]
    else:
        header, rows = _read_rows(path)
        _require(header, ("user_id", "item_id", "rating"), path)
        records = [(f"{path}:{line}", row) for line, row in rows]
    out: dict[str, dict[str, float]] = {}
    for where, rec in records:
        try:
            uid, iid, raw = str(rec["user_id"]), str(rec["item_id"]), rec["rating"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{where}: missing field {exc}") from exc
        if raw in ("", None):
            continue
        per_user = out.setdefault(uid, {})
        if iid in per_user:
            raise ParseError(f"{where}: duplicate rating for user {uid!r} item {iid!r}")
        per_user[iid] = _number(raw, f"{where} rating")
    return out


def load_dataset(directory, schema_path=None) -> Dataset:
    """Load and validate a dataset directory; raises on the first problem."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ParseError(f"{directory}: not a directory")
    schema, cats, integer_ratings = read_schema(Path(schema_path) if schema_path else _find(directory, "schema"))
    items = read_items(_find(directory, "items"), schema)
    users, cats = read_users(_find(directory, "users"), schema, cats)
    ratings = read_ratings(_find(directory, "ratings"))
    known = {u.user_id for u in users}
    unknown = sorted(set(ratings) - known)
    if unknown:
        raise ValidationError([f"ratings reference unknown user {u!r}" for u in unknown])
    users = [u.with_ratings(ratings.get(u.user_id, {})) for u in users]
    dataset = Dataset(schema, cats, users, items, integer_ratings)
    problems = validate(dataset)
    if problems:
        raise ValidationError(problems)
    return dataset


def _fmt_number(value) -> str:
    return str(value) if isinstance(value, int) else repr(float(value))


def write_dataset(dataset: Dataset, directory) -> None:
    """Write schema.json plus CSV items, users and ratings files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    schema = dataset.schema
    meta = {
        "v_max": schema.v_max,
        "ratings": "integer" if dataset.integer_ratings else "real",
        "features": [{"id": f.id, "kind": f.kind.value} for f in schema],
        "categories": list(dataset.categories),
    }
    (directory / "schema.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")

    with open(directory / "items.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["item_id", "name", "category", *schema.ids])
        for it in dataset.items:
            w.writerow([it.item_id, it.name, it.category, *(_fmt_number(v) for v in it.features)])

    vshaped = [f.id for f in schema if f.kind is FeatureKind.VSHAPED]
    with open(directory / "users.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", *(PREF_PREFIX + c for c in dataset.categories),
                    *(AV_MAX_PREFIX + f for f in schema.ids), *(AV_MIN_PREFIX + f for f in vshaped)])
        for u in dataset.users:
            w.writerow([u.user_id, *(u.preferences.get(c, "") for c in dataset.categories),
                        *(u.aversions[f].at_max for f in schema.ids), *(u.aversions[f].at_min for f in vshaped)])

    with open(directory / "ratings.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", "item_id", "rating"])
        for u in dataset.users:
            for iid, r in u.ratings.items():
                w.writerow([u.user_id, iid, _fmt_number(r)])
