"""Per-query ideological bias and its Mean Bias / Mean Absolute Bias summaries.

Bias of one query under a metric M is ``M(conservative gains) - M(liberal gains)``,
so positive values mean the SERP leans conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .annotations import Labels, leaning_of
from .corpus import Cell, Leaning, SerpRecord, Topic
from .metrics import Metric, MetricConfig, score


@dataclass(frozen=True)
class LeaningScores:
    topic_id: str
    metric: Metric
    score_conservative: float
    score_liberal: float
    beta: float


@dataclass(frozen=True)
class BiasSummary:
    cell: Cell
    metric: Metric
    mb: float
    mab: float
    n_queries: int
    per_query: tuple[LeaningScores, ...] = field(repr=False)


def leaning_gains(serp: SerpRecord, labels: Labels, topic: Topic, leaning: Leaning) -> list[int]:
    """1 at ranks whose aggregated stance maps to ``leaning``; missing labels give 0."""
    gains = []
    for r in serp.results:
        label = labels.get(r.doc_id)
        gains.append(int(label is not None and leaning_of(label.stance, topic) is leaning))
    return gains


def query_bias(
    serp: SerpRecord, labels: Labels, topic: Topic, metric: Metric, cfg: MetricConfig = MetricConfig()
) -> LeaningScores:
    mc = score(metric, leaning_gains(serp, labels, topic, Leaning.CONSERVATIVE), cfg)
    ml = score(metric, leaning_gains(serp, labels, topic, Leaning.LIBERAL), cfg)
    return LeaningScores(serp.topic_id, Metric(metric), mc, ml, mc - ml)


def summarize_bias(cell: Cell, metric: Metric, results: list[LeaningScores]) -> BiasSummary:
    if not results:
        raise ValueError("cannot summarize bias of an empty cell")
    n = len(results)
    mb = math.fsum(r.beta for r in results) / n
    mab = math.fsum(abs(r.beta) for r in results) / n
    return BiasSummary(cell, Metric(metric), mb, mab, n, tuple(results))
