"""Ranking metrics over anomaly scores."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from ..exceptions import DegenerateInputError
from ..validation import check_scores


def auroc(normal_scores, anomaly_scores) -> float:
    """Probability that an anomaly outranks a normal sample, ties half.

    Computed from midranks (Mann-Whitney U), so it is exact under ties
    and runs in O(n log n).
    """
    neg = check_scores(normal_scores, "normal_scores")
    pos = check_scores(anomaly_scores, "anomaly_scores")
    ranks = rankdata(np.concatenate([neg, pos]), method="average")
    rank_sum = ranks[len(neg):].sum()
    u = rank_sum - len(pos) * (len(pos) + 1) / 2.0
    return float(u / (len(pos) * len(neg)))


def score_distance(normal_scores, anomaly_scores) -> float:
    """Absolute gap between mean anomalous and mean normal scores."""
    neg = check_scores(normal_scores, "normal_scores")
    pos = check_scores(anomaly_scores, "anomaly_scores")
    return float(abs(pos.mean() - neg.mean()))


def rank_by_score(ids, scores, top: int | None = None) -> list[tuple[str, float]]:
    """Ids with scores, most anomalous first; score ties break by id."""
    ids = np.asarray(ids, dtype=object)
    s = check_scores(scores, "scores")
    if len(ids) != len(s):
        raise DegenerateInputError("ids and scores length mismatch")
    order = sorted(range(len(s)), key=lambda i: (-s[i], str(ids[i])))
    if top is not None:
        order = order[: max(0, top)]
    return [(str(ids[i]), float(s[i])) for i in order]
