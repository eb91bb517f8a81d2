"""Crowd stance judgments: majority-vote aggregation, Fleiss' kappa, and the
stance -> ideological leaning / relevance mappings."""

from __future__ import annotations

import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import DatasetError, Leaning, Topic

log = logging.getLogger(__name__)


class Stance(str, Enum):
    PRO = "pro"
    AGAINST = "against"
    NEUTRAL = "neutral"
    NOT_RELEVANT = "not_relevant"
    UNRESOLVED = "unresolved"


# categories a worker may choose; UNRESOLVED only arises from aggregation
JUDGED_STANCES = (Stance.PRO, Stance.AGAINST, Stance.NEUTRAL, Stance.NOT_RELEVANT)
RELEVANT_STANCES = frozenset({Stance.PRO, Stance.AGAINST, Stance.NEUTRAL})
EXPECTED_WORKERS = 3


@dataclass(frozen=True)
class WorkerJudgment:
    doc_id: str
    worker_id: str
    stance: Stance


@dataclass(frozen=True)
class AggregatedLabel:
    doc_id: str
    stance: Stance
    support: int
    n_workers: int


@dataclass(frozen=True)
class AgreementReport:
    kappa: float
    n_items: int
    n_raters_per_item: int
    category_proportions: dict[str, float]
    n_excluded: int = 0


def load_judgments(path: str | Path) -> list[WorkerJudgment]:
    """Read a JSONL judgments file (fields doc_id, worker_id, stance)."""
    path = Path(path)
    out: list[WorkerJudgment] = []
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path.name}:{lineno}"
            try:
                rec = json.loads(line)
                doc_id, worker_id, raw = rec["doc_id"], rec["worker_id"], rec["stance"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DatasetError(f"{where}: malformed record ({exc})") from None
            try:
                stance = Stance(raw)
            except ValueError:
                stance = None
            if stance not in JUDGED_STANCES:
                raise DatasetError(f"{where}: malformed record (invalid stance {raw!r})")
            if (doc_id, worker_id) in seen:
                raise DatasetError(f"{where}: duplicate judgment of {doc_id} by {worker_id}")
            seen.add((doc_id, worker_id))
            out.append(WorkerJudgment(str(doc_id), str(worker_id), stance))
    return out


def _by_doc(judgments: Iterable[WorkerJudgment]) -> dict[str, list[Stance]]:
    grouped: dict[str, list[Stance]] = defaultdict(list)
    for j in judgments:
        grouped[j.doc_id].append(j.stance)
    return grouped


def aggregate(judgments: Iterable[WorkerJudgment]) -> dict[str, AggregatedLabel]:
    """Strict-majority vote per document.

    A stance wins only if more than half of the document's workers chose it;
    otherwise the label is ``unresolved`` with the top count as support.
    """
    grouped = _by_doc(judgments)
    if not grouped:
        raise ValueError("no judgments to aggregate")
    labels = {}
    for doc_id in sorted(grouped):
        stances = grouped[doc_id]
        w = len(stances)
        if w != EXPECTED_WORKERS:
            log.warning("doc %s has %d judgments (expected %d)", doc_id, w, EXPECTED_WORKERS)
        counts = Counter(stances)
        top = max(counts.values())
        winner = Stance.UNRESOLVED
        if 2 * top > w:
            winner = next(s for s, c in counts.items() if c == top)
        labels[doc_id] = AggregatedLabel(doc_id, winner, top, w)
    return labels


def fleiss_kappa(judgments: Iterable[WorkerJudgment]) -> AgreementReport:
    """Fleiss' kappa over the four judged stance categories.

    Only items with the modal rater count are used; the rest are excluded and
    counted in ``n_excluded``.
    """
    grouped = _by_doc(judgments)
    if not grouped:
        raise ValueError("no judgments")
    sizes = Counter(len(v) for v in grouped.values())
    # modal rater count, ties broken towards more raters
    n = max(sizes, key=lambda k: (sizes[k], k))
    items = [grouped[d] for d in sorted(grouped) if len(grouped[d]) == n]
    excluded = len(grouped) - len(items)
    if n < 2 or not items:
        raise ValueError("all items excluded (need >= 2 raters per item)")

    totals = Counter()
    p_items = []
    for stances in items:
        counts = Counter(stances)
        totals.update(counts)
        p_items.append((sum(c * c for c in counts.values()) - n) / (n * (n - 1)))
    n_items = len(items)
    p_bar = sum(p_items) / n_items
    proportions = {s.value: totals[s] / (n_items * n) for s in JUDGED_STANCES}
    p_e = sum(p * p for p in proportions.values())
    if p_e >= 1.0:
        raise ValueError("degenerate agreement: every judgment falls in one category")
    kappa = (p_bar - p_e) / (1.0 - p_e)
    return AgreementReport(kappa, n_items, n, proportions, excluded)


def leaning_of(stance: Stance, topic: Topic) -> Leaning | None:
    if stance is Stance.PRO:
        return topic.pro_leaning
    if stance is Stance.AGAINST:
        return topic.pro_leaning.opposite
    return None


def relevance_of(label: AggregatedLabel | None) -> int:
    """Binary relevance: any on-topic stance counts; missing/unresolved do not."""
    return int(label is not None and label.stance in RELEVANT_STANCES)


Labels = Mapping[str, AggregatedLabel]
