"""Binary-gain ranking metrics: P@k, rank-biased precision and DCG@k."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from statistics import fmean
from typing import Callable, Sequence

from .annotations import Labels, relevance_of
from .corpus import Cell, Dataset, SerpRecord, cell_label

GainVector = Sequence[float]


class Metric(str, Enum):
    P10 = "P@10"
    RBP = "RBP"
    DCG10 = "DCG@10"


METRICS = (Metric.P10, Metric.RBP, Metric.DCG10)


@dataclass(frozen=True)
class MetricConfig:
    k: int = 10
    rbp_persistence: float = 0.8

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.rbp_persistence < 1.0:
            raise ValueError(f"rbp_persistence must be in (0, 1), got {self.rbp_persistence}")


def _check(g: GainVector) -> None:
    for x in g:
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"gain {x} outside [0, 1]")


def precision_at_k(g: GainVector, cfg: MetricConfig = MetricConfig()) -> float:
    # short lists are padded with zeros: divide by k, not len(g)
    _check(g)
    return math.fsum(g[: cfg.k]) / cfg.k


def rbp(g: GainVector, cfg: MetricConfig = MetricConfig()) -> float:
    _check(g)
    p = cfg.rbp_persistence
    return (1.0 - p) * math.fsum(x * p**i for i, x in enumerate(g))


def dcg_at_k(g: GainVector, cfg: MetricConfig = MetricConfig()) -> float:
    _check(g)
    return math.fsum(x / math.log2(i + 2) for i, x in enumerate(g[: cfg.k]))


SCORERS: dict[Metric, Callable[[GainVector, MetricConfig], float]] = {
    Metric.P10: precision_at_k,
    Metric.RBP: rbp,
    Metric.DCG10: dcg_at_k,
}


def score(metric: Metric, g: GainVector, cfg: MetricConfig = MetricConfig()) -> float:
    return SCORERS[Metric(metric)](g, cfg)


def relevance_gains(serp: SerpRecord, labels: Labels) -> list[int]:
    return [relevance_of(labels.get(r.doc_id)) for r in serp.results]


def serp_scores(serp: SerpRecord, labels: Labels, cfg: MetricConfig = MetricConfig()) -> dict[Metric, float]:
    g = relevance_gains(serp, labels)
    return {m: score(m, g, cfg) for m in METRICS}


def mean_scores(
    d: Dataset, labels: Labels, cell: Cell, cfg: MetricConfig = MetricConfig()
) -> tuple[float, float, float]:
    """Unweighted mean (P@10, RBP, DCG@10) over the cell's queries."""
    serps = d.cell_serps(cell)
    if not serps:
        raise ValueError(f"empty cell {cell_label(cell)}")
    per_query = [serp_scores(s, labels, cfg) for s in serps]
    return tuple(fmean(q[m] for q in per_query) for m in METRICS)
