"""Top-N ranking and rating-error metrics.

A ranking is given as the sequence of relevance flags of the recommended
items in rank order; ``total_relevant`` counts relevant items among all
candidates, recommended or not. Sums use :func:`math.fsum` so results do
not depend on summation order.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

DEFAULT_THRESHOLD = 4.0


def relevance(rating: float, threshold: float = DEFAULT_THRESHOLD) -> bool:
    return rating >= threshold


def precision_recall_f1(flags: Sequence[bool], total_relevant: int, n: int) -> tuple[float, float, float]:
    top = [bool(f) for f in flags[:n]]
    hits = sum(top)
    precision = hits / len(top) if top else 0.0
    # nothing to retrieve counts as full recall
    recall = hits / total_relevant if total_relevant else 1.0
    if precision + recall == 0:
        return precision, recall, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


def average_precision(flags: Sequence[bool], total_relevant: int, n: int) -> float:
    """AP@n normalised by ``min(n, total_relevant)``."""
    if total_relevant == 0:
        return 0.0
    top = np.asarray(flags[:n], dtype=bool)
    if not top.any():
        return 0.0
    hits = np.cumsum(top)
    ranks = np.arange(1, len(top) + 1)
    terms = hits[top] / ranks[top]
    return math.fsum(terms.tolist()) / min(n, total_relevant)


def reciprocal_rank(flags: Sequence[bool], n: int) -> float:
    for rank, flag in enumerate(flags[:n], start=1):
        if flag:
            return 1 / rank
    return 0.0


def mae_rmse(predicted: Sequence[float], truth: Sequence[float]) -> tuple[float, float]:
    if len(predicted) != len(truth):
        raise ValueError("predicted and truth differ in length")
    if len(predicted) == 0:
        raise ValueError("no test pairs to score")
    err = np.asarray(predicted, dtype=float) - np.asarray(truth, dtype=float)
    count = len(err)
    mae = math.fsum(np.abs(err).tolist()) / count
    rmse = math.sqrt(math.fsum((err * err).tolist()) / count)
    return mae, rmse


def user_coverage(list_lengths: Sequence[int]) -> float:
    """Share of users who received a non-empty recommendation list."""
    if not list_lengths:
        return 0.0
    return sum(1 for n in list_lengths if n > 0) / len(list_lengths)


def batch_average_precision(rel_ranked: np.ndarray, total_relevant: int, n: int) -> np.ndarray:
    """AP@n for many rankings at once; ``rel_ranked`` is rankings x positions.

    Used by the alpha search, where the same candidate set is ranked once per
    grid point.
    """
    top = np.asarray(rel_ranked, dtype=bool)[:, :n]
    if total_relevant == 0:
        return np.zeros(top.shape[0])
    hits = np.cumsum(top, axis=1)
    ranks = np.arange(1, top.shape[1] + 1)
    return np.where(top, hits / ranks, 0.0).sum(axis=1) / min(n, total_relevant)
