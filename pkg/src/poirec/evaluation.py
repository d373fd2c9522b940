"""K-fold offline evaluation of Top-N recommenders.

Every user's rated items are split into ``k`` folds. In each round one fold
is the test set and the rest train the per-user alpha. Test items are the
only ranking candidates, and all configurations share one fold plan.
"""

from __future__ import annotations

import hashlib
import io
import csv
import logging
import math
import zlib
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from .domain import Dataset
from .metrics import (DEFAULT_THRESHOLD, average_precision, mae_rmse, precision_recall_f1,
                      reciprocal_rank, user_coverage)
from .predictor import (DEFAULT_TOP_N, AlgorithmConfig, Family, alpha_objectives, predictions,
                        rank_order, score_items, select_alpha)

log = logging.getLogger(__name__)

DEFAULT_FOLDS = 5
METRICS = ("precision", "recall", "f1", "map", "mrr", "mae", "rmse", "coverage")
METRIC_LABELS = {"precision": "Prec.", "recall": "Recall", "f1": "F1", "map": "MAP", "mrr": "MRR",
                 "mae": "MAE", "rmse": "RMSE", "coverage": "Cov."}
LOWER_IS_BETTER = {"mae", "rmse"}
# metrics compared across categories; coverage is reported but never starred
RANKED_METRICS = ("precision", "recall", "f1", "map", "mrr", "mae", "rmse")


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    folds: Mapping[str, tuple[tuple[str, ...], ...]]
    excluded: tuple[str, ...] = ()

    def test_items(self, user_id: str, fold: int) -> tuple[str, ...]:
        return self.folds[user_id][fold]

    def train_items(self, user_id: str, fold: int) -> tuple[str, ...]:
        parts = self.folds[user_id]
        return tuple(sorted(i for f, part in enumerate(parts) if f != fold for i in part))

    def test_pairs(self, fold: int) -> list[tuple[str, str]]:
        return sorted((u, i) for u in self.folds for i in self.folds[u][fold])


def make_fold_plan(dataset: Dataset, k: int = DEFAULT_FOLDS, seed: int = 0) -> FoldPlan:
    """Assign each user's rated items to ``k`` folds of near-equal size.

    The shuffle for a user depends only on ``seed`` and the user id, so the
    plan is unaffected by user order and by which other users are present.
    Users with fewer than ``k`` ratings are excluded.
    """
    if k < 2:
        raise ValueError("need at least 2 folds")
    folds, excluded = {}, []
    for user in dataset.sorted_users():
        rated = sorted(user.ratings)
        if len(rated) < k:
            excluded.append(user.user_id)
            continue
        rng = np.random.default_rng([seed, zlib.crc32(user.user_id.encode())])
        shuffled = [rated[j] for j in rng.permutation(len(rated))]
        folds[user.user_id] = tuple(tuple(sorted(shuffled[f::k])) for f in range(k))
    return FoldPlan(k, seed, folds, tuple(excluded))


def pair_digest(pairs: Sequence[tuple[str, str]]) -> str:
    h = hashlib.sha256()
    for u, i in sorted(pairs):
        h.update(f"{u}\x1f{i}\x1e".encode())
    return h.hexdigest()


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided paired t-test p-value.

    Constant differences make the statistic undefined; they give p = 1 when
    the samples agree and p = 0 otherwise.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("samples must be 1-D and of equal length")
    if len(a) < 2:
        raise ValueError("need at least 2 paired samples")
    diff = a - b
    scale = max(1.0, float(np.abs(diff).max()))
    if float(np.ptp(diff)) <= 1e-12 * scale:
        return 1.0 if abs(float(diff.mean())) <= 1e-12 * scale else 0.0
    return float(stats.ttest_rel(a, b).pvalue)


def stars(p: float) -> str:
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


@dataclass
class MetricRow:
    algorithm: str
    category: str
    values: dict[str, float]
    folds: list[dict[str, float]]
    best: list[str] = field(default_factory=list)
    best_other: list[str] = field(default_factory=list)
    stars: dict[str, str] = field(default_factory=dict)


@dataclass
class EvaluationReport:
    rows: list[MetricRow]
    settings: dict[str, object]
    excluded_users: tuple[str, ...]
    test_digests: dict[str, list[str]]
    alphas: dict[str, list[dict[str, float]]]
    p_values: dict[str, float]

    def row(self, algorithm: str) -> MetricRow:
        for r in self.rows:
            if r.algorithm == algorithm:
                return r
        raise KeyError(algorithm)


def category_of(config: AlgorithmConfig) -> str:
    return "model" if config.family is Family.IND else "baseline"


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0


def _evaluate_config(dataset: Dataset, config: AlgorithmConfig, plan: FoldPlan, n: int, threshold: float):
    schema = dataset.schema
    fold_rows, digests, fold_alphas = [], [], []
    all_pred, all_truth = [], []
    # alpha-independent scores are computed once per user
    cache = {}
    for uid in plan.folds:
        user = dataset.user(uid)
        rated = sorted(user.ratings)
        scores = score_items(user, [dataset.item(i) for i in rated], schema, config)
        truth = np.array([user.ratings[i] for i in rated], dtype=float)
        cache[uid] = (scores, truth, {iid: k for k, iid in enumerate(rated)})

    for fold in range(plan.k):
        per_user = {m: [] for m in ("precision", "recall", "f1", "map", "mrr")}
        preds_fold, truth_fold, lengths, pairs, alphas = [], [], [], [], {}
        for uid in plan.folds:
            scores, truth, index = cache[uid]
            train_idx = np.array([index[i] for i in plan.train_items(uid, fold)], dtype=int)
            test_ids = plan.test_items(uid, fold)
            test_idx = np.array([index[i] for i in test_ids], dtype=int)
            pairs.extend((uid, i) for i in test_ids)

            alpha = config.fixed_alpha
            if config.family is Family.IND:
                grid = config.alpha_grid()
                ap, rmse = alpha_objectives(scores.comp[train_idx], scores.pref[train_idx], truth[train_idx],
                                            [scores.item_ids[j] for j in train_idx], grid,
                                            schema.v_max, n, threshold)
                alpha = select_alpha(grid, ap, rmse, config.alpha_objective)
            if alpha is not None:
                alphas[uid] = alpha

            preds = predictions(scores, config, alpha, schema.v_max)[test_idx]
            preds_fold.extend(preds.tolist())
            truth_fold.extend(truth[test_idx].tolist())

            order = rank_order(preds, test_ids)[:n]
            lengths.append(len(order))
            rel = truth[test_idx] >= threshold
            total_rel = int(rel.sum())
            if total_rel == 0:
                continue
            flags = rel[order].tolist()
            p, r, f1 = precision_recall_f1(flags, total_rel, n)
            per_user["precision"].append(p)
            per_user["recall"].append(r)
            per_user["f1"].append(f1)
            per_user["map"].append(average_precision(flags, total_rel, n))
            per_user["mrr"].append(reciprocal_rank(flags, n))

        row = {m: _mean(v) for m, v in per_user.items()}
        row["mae"], row["rmse"] = mae_rmse(preds_fold, truth_fold)
        row["coverage"] = user_coverage(lengths)
        fold_rows.append(row)
        digests.append(pair_digest(pairs))
        fold_alphas.append(alphas)
        all_pred.extend(preds_fold)
        all_truth.extend(truth_fold)

    overall = {m: _mean([r[m] for r in fold_rows]) for m in ("precision", "recall", "f1", "map", "mrr", "coverage")}
    overall["mae"], overall["rmse"] = mae_rmse(all_pred, all_truth)
    return overall, fold_rows, digests, fold_alphas


def cross_validate(dataset: Dataset, configs: Sequence[AlgorithmConfig], plan: FoldPlan,
                   n: int = DEFAULT_TOP_N, threshold: float = DEFAULT_THRESHOLD,
                   settings: Mapping[str, object] | None = None) -> EvaluationReport:
    """Evaluate every config on the shared fold plan.

    Ranking and accuracy metrics are averaged over users with at least one
    relevant test item, then over folds. MAE and RMSE are pooled over all
    test pairs.
    """
    if not plan.folds:
        raise ValueError("no evaluable users: every user has fewer ratings than folds")
    if len({c.name for c in configs}) != len(configs):
        raise ValueError("duplicate algorithm configurations")
    rows, digests, alphas = [], {}, {}
    for position, config in enumerate(configs):
        log.info("evaluating %s", config.name)
        overall, folds, dig, fold_alphas = _evaluate_config(dataset, config, plan, n, threshold)
        rows.append((position, MetricRow(config.name, category_of(config), overall, folds)))
        digests[config.name] = dig
        alphas[config.name] = fold_alphas
    rows.sort(key=lambda pr: (-pr[1].values["map"], pr[0]))
    report = EvaluationReport([r for _, r in rows], dict(settings or {}), plan.excluded, digests, alphas, {})
    _annotate(report)
    return report


def _pick_best(rows: list[MetricRow], metric: str) -> MetricRow | None:
    if not rows:
        return None
    sign = 1 if metric in LOWER_IS_BETTER else -1
    return min(rows, key=lambda r: sign * r.values[metric])


def _annotate(report: EvaluationReport) -> None:
    """Mark the overall best row per metric, the best of the other category,
    and star the overall best when the per-fold difference between the two
    category winners is significant."""
    for metric in RANKED_METRICS:
        best = _pick_best(report.rows, metric)
        best.best.append(metric)
        other = _pick_best([r for r in report.rows if r.category != best.category], metric)
        if other is None:
            continue
        other.best_other.append(metric)
        if len(best.folds) < 2:
            continue
        p = paired_t_test([f[metric] for f in best.folds], [f[metric] for f in other.folds])
        report.p_values[metric] = p
        if stars(p):
            best.stars[metric] = stars(p)


def _fmt(value: float) -> str:
    return f"{value:.4f}"


def _header_lines(report: EvaluationReport) -> list[str]:
    lines = ["# poirec evaluation report"]
    for key in sorted(report.settings):
        lines.append(f"# {key}: {report.settings[key]}")
    return lines


def format_table(report: EvaluationReport) -> str:
    cols = list(METRICS)
    head = ["Algorithm"] + [METRIC_LABELS[m] for m in cols] + ["Best", "Best of other category"]
    body = []
    for row in report.rows:
        cells = [row.algorithm]
        for m in cols:
            cells.append(row.stars.get(m, "") + _fmt(row.values[m]))
        cells.append(",".join(METRIC_LABELS[m] for m in row.best) or "-")
        cells.append(",".join(METRIC_LABELS[m] for m in row.best_other) or "-")
        body.append(cells)
    widths = [max(len(r[c]) for r in [head] + body) for c in range(len(head))]

    def line(cells):
        first = cells[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(cells[1:-2], widths[1:-2])]
        tail = [c.ljust(w) for c, w in zip(cells[-2:], widths[-2:])]
        return "  ".join([first] + rest + tail).rstrip()

    out = _header_lines(report)
    out.append("")
    out.append(line(head))
    out.append("-" * len(line(head)))
    out.extend(line(c) for c in body)
    out.append("")
    out.append("Stars: ** p<0.01, * p<0.05 (paired t-test over folds, best model vs best baseline)")
    for metric in RANKED_METRICS:
        if metric in report.p_values:
            out.append(f"  {METRIC_LABELS[metric]}: p={report.p_values[metric]:.4g}")
    out.append("")
    out.append("Per-fold detail")
    for row in report.rows:
        for f, vals in enumerate(row.folds):
            out.append(f"  {row.algorithm:<16} fold {f}  " + "  ".join(
                f"{METRIC_LABELS[m]}={_fmt(vals[m])}" for m in cols))
    out.append("")
    if report.excluded_users:
        out.append(f"Excluded users (too few ratings): {', '.join(report.excluded_users)}")
    else:
        out.append("Excluded users (too few ratings): none")
    return "\n".join(out) + "\n"


def format_csv(report: EvaluationReport) -> str:
    buf = io.StringIO()
    for line in _header_lines(report):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["algorithm", "category", "fold", *METRICS, "best", "best_other_category", "stars"])
    for row in report.rows:
        star_text = ";".join(f"{m}:{row.stars[m]}" for m in RANKED_METRICS if m in row.stars)
        writer.writerow([row.algorithm, row.category, "all", *(repr(row.values[m]) for m in METRICS),
                         ";".join(row.best), ";".join(row.best_other), star_text])
    for row in report.rows:
        for f, vals in enumerate(row.folds):
            writer.writerow([row.algorithm, row.category, f, *(repr(vals[m]) for m in METRICS), "", "", ""])
    if report.excluded_users:
        buf.write("# excluded users: " + " ".join(report.excluded_users) + "\n")
    return buf.getvalue()
