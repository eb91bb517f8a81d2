"""Test plans over the engine x location grid and their execution."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from statistics import fmean
from typing import Any, Mapping

from .annotations import Labels, Stance
from .bias import BiasSummary, LeaningScores, query_bias, summarize_bias
from .corpus import Cell, Dataset, DatasetError, Engine, Location, cell_label
from .metrics import METRICS, Metric, MetricConfig, serp_scores
from .stats import (
    CorrectionPlan,
    DegenerateSampleError,
    bonferroni,
    one_sample_ttest,
    paired_ttest,
    verdict,
)

log = logging.getLogger(__name__)

EXISTENCE_MB = "existence_MB"
EXISTENCE_MAB = "existence_MAB"
PAIRED_MB = "paired_MB"
PAIRED_MAB = "paired_MAB"
PERFORMANCE_PAIRED = "performance_paired"
KINDS = (EXISTENCE_MB, EXISTENCE_MAB, PAIRED_MB, PAIRED_MAB, PERFORMANCE_PAIRED)

OK = "ok"
ZERO_VARIANCE = "untestable: zero variance"
TOO_FEW = "untestable: fewer than 2 queries"

GRID: tuple[Cell, ...] = tuple((e, loc) for e in Engine for loc in Location)


def cell_key(cell: Cell) -> str:
    return f"{cell[0].value}/{cell[1].value}"


def parse_cell_key(key: str) -> Cell:
    engine, location = key.split("/")
    return Engine(engine), Location(location)


def comparisons() -> list[tuple[Cell, Cell]]:
    """Engine-vs-engine per location, then location-vs-location per engine."""
    e1, e2 = Engine.ENGINE1, Engine.ENGINE2
    uk, us = Location.UK, Location.US
    return [((e1, uk), (e2, uk)), ((e1, us), (e2, us)), ((e1, uk), (e1, us)), ((e2, uk), (e2, us))]


def comparison_key(a: Cell, b: Cell) -> str:
    return f"{cell_key(a)}~{cell_key(b)}"


@dataclass(frozen=True)
class PlanEntry:
    id: str
    kind: str
    cell_a: Cell
    cell_b: Cell | None
    metric: Metric

    @property
    def in_family(self) -> bool:
        return self.kind != PERFORMANCE_PAIRED


def make_entry(kind: str, metric: Metric, cell_a: Cell, cell_b: Cell | None = None) -> PlanEntry:
    if kind not in KINDS:
        raise ValueError(f"unknown test kind {kind!r}")
    where = cell_key(cell_a) if cell_b is None else comparison_key(cell_a, cell_b)
    return PlanEntry(f"{kind}:{where}:{Metric(metric).value}", kind, cell_a, cell_b, Metric(metric))


@dataclass(frozen=True)
class TestPlan:
    entries: tuple[PlanEntry, ...]
    alpha: float = 0.05
    m_override: int | None = None

    __test__ = False

    def __post_init__(self):
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate plan entry ids")

    @property
    def m(self) -> int:
        if self.m_override is not None:
            return self.m_override
        return sum(1 for e in self.entries if e.in_family)

    @property
    def correction(self) -> CorrectionPlan:
        return bonferroni(self.alpha, max(self.m, 1))


def default_plan(
    d: Dataset,
    alpha: float = 0.05,
    include_mab_existence: bool = False,
    m_override: int | None = None,
) -> TestPlan:
    """12 existence tests on MB, 24 paired MB/MAB tests and 12 performance tests."""
    present = set(d.cells())
    missing = [c for c in GRID if c not in present]
    if missing:
        raise DatasetError("missing cells: " + ",".join(cell_label(c) for c in missing))
    entries = []
    for cell in GRID:
        for metric in METRICS:
            entries.append(make_entry(EXISTENCE_MB, metric, cell))
            if include_mab_existence:
                entries.append(make_entry(EXISTENCE_MAB, metric, cell))
    for a, b in comparisons():
        for kind in (PAIRED_MB, PAIRED_MAB):
            for metric in METRICS:
                entries.append(make_entry(kind, metric, a, b))
    for a, b in comparisons():
        for metric in METRICS:
            entries.append(make_entry(PERFORMANCE_PAIRED, metric, a, b))
    return TestPlan(tuple(entries), alpha, m_override)


@dataclass
class EntryResult:
    id: str
    kind: str
    cell_a: str
    cell_b: str | None
    metric: str
    status: str
    n: int
    t_stat: float | None
    df: int | None
    p_value: float | None
    mean_effect: float | None
    raw_significant: bool | None
    corrected_significant: bool | None
    m: int
    adjusted_alpha: float
    in_family: bool

    @property
    def testable(self) -> bool:
        return self.status == OK


@dataclass
class CellResult:
    cell: str
    topics: list[str]
    performance: dict[str, float]
    bias: dict[str, BiasSummary]


@dataclass
class ComparisonResult:
    cell_a: str
    cell_b: str
    matched: list[str]
    only_a: list[str]
    only_b: list[str]


@dataclass
class AuditReport:
    alpha: float
    m: int
    adjusted_alpha: float
    fwer_uncorrected: float
    metric_config: dict[str, float]
    cells: dict[str, CellResult]
    comparisons: dict[str, ComparisonResult]
    tests: list[EntryResult]
    data_quality: dict[str, Any] = field(default_factory=dict)

    def test(self, entry_id: str) -> EntryResult:
        for t in self.tests:
            if t.id == entry_id:
                return t
        raise KeyError(entry_id)

    def to_dict(self) -> dict[str, Any]:
        cells = {}
        for key, c in self.cells.items():
            bias = {}
            for metric, s in c.bias.items():
                bias[metric] = {
                    "MB": s.mb,
                    "MAB": s.mab,
                    "n_queries": s.n_queries,
                    "per_query": [
                        {
                            "topic_id": q.topic_id,
                            "score_conservative": q.score_conservative,
                            "score_liberal": q.score_liberal,
                            "beta": q.beta,
                        }
                        for q in s.per_query
                    ],
                }
            cells[key] = {"topics": c.topics, "performance": c.performance, "bias": bias}
        return {
            "alpha": self.alpha,
            "m": self.m,
            "adjusted_alpha": self.adjusted_alpha,
            "fwer_uncorrected": self.fwer_uncorrected,
            "metric_config": self.metric_config,
            "cells": cells,
            "comparisons": {k: asdict(v) for k, v in self.comparisons.items()},
            "tests": [asdict(t) for t in self.tests],
            "data_quality": self.data_quality,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "AuditReport":
        cells = {}
        for key, c in data["cells"].items():
            cell = parse_cell_key(key)
            bias = {}
            for metric, s in c["bias"].items():
                per_query = tuple(
                    LeaningScores(
                        q["topic_id"], Metric(metric), q["score_conservative"], q["score_liberal"], q["beta"]
                    )
                    for q in s["per_query"]
                )
                bias[metric] = BiasSummary(cell, Metric(metric), s["MB"], s["MAB"], s["n_queries"], per_query)
            cells[key] = CellResult(key, list(c["topics"]), dict(c["performance"]), bias)
        return cls(
            alpha=data["alpha"],
            m=data["m"],
            adjusted_alpha=data["adjusted_alpha"],
            fwer_uncorrected=data["fwer_uncorrected"],
            metric_config=dict(data["metric_config"]),
            cells=cells,
            comparisons={k: ComparisonResult(**v) for k, v in data["comparisons"].items()},
            tests=[EntryResult(**t) for t in data["tests"]],
            data_quality=dict(data.get("data_quality", {})),
        )


def _cell_result(d: Dataset, labels: Labels, cell: Cell, cfg: MetricConfig):
    serps = d.cell_serps(cell)
    perf_rows = [serp_scores(s, labels, cfg) for s in serps]
    performance = {}
    bias = {}
    for metric in METRICS:
        vals = [row[metric] for row in perf_rows]
        performance[metric.value] = fmean(vals) if vals else 0.0
        per_query = [query_bias(s, labels, d.topics[s.topic_id], metric, cfg) for s in serps]
        if per_query:
            bias[metric.value] = summarize_bias(cell, metric, per_query)
    per_topic = {s.topic_id: {m.value: row[m] for m in METRICS} for s, row in zip(serps, perf_rows)}
    return CellResult(cell_key(cell), [s.topic_id for s in serps], performance, bias), per_topic


def _quality(d: Dataset, labels: Mapping[Location, Labels]) -> dict[str, Any]:
    per_cell = {}
    slots = missing = 0
    for cell in d.cells():
        cell_labels = labels.get(cell[1], {})
        serps = d.cell_serps(cell)
        n_docs = sum(len(s.results) for s in serps)
        n_missing = sum(1 for s in serps for r in s.results if r.doc_id not in cell_labels)
        n_unresolved = sum(
            1
            for s in serps
            for r in s.results
            if r.doc_id in cell_labels and cell_labels[r.doc_id].stance is Stance.UNRESOLVED
        )
        per_cell[cell_key(cell)] = {
            "serps": len(serps),
            "short_serps": sum(1 for s in serps if len(s.results) < 10),
            "documents": n_docs,
            "missing_labels": n_missing,
            "unresolved_labels": n_unresolved,
        }
        slots += n_docs
        missing += n_missing
    return {
        "cells": per_cell,
        "documents": slots,
        "missing_labels": missing,
        "missing_label_fraction": missing / slots if slots else 0.0,
    }


def _run_test(values_a, values_b, paired: bool):
    if len(values_a) < 2:
        return TOO_FEW, None
    try:
        res = paired_ttest(values_a, values_b) if paired else one_sample_ttest(values_a, 0.0)
    except DegenerateSampleError:
        return ZERO_VARIANCE, None
    return OK, res


def run_audit(
    d: Dataset,
    labels: Mapping[Location, Labels],
    plan: TestPlan,
    cfg: MetricConfig = MetricConfig(),
) -> AuditReport:
    """Execute every plan entry; degenerate tests are reported as untestable."""
    if not plan.entries:
        raise ValueError("empty test plan")
    correction = plan.correction

    cells: dict[str, CellResult] = {}
    perf_by_topic: dict[str, dict[str, dict[str, float]]] = {}
    for cell in d.cells():
        result, per_topic = _cell_result(d, labels.get(cell[1], {}), cell, cfg)
        cells[result.cell] = result
        perf_by_topic[result.cell] = per_topic

    comps: dict[str, ComparisonResult] = {}
    for e in plan.entries:
        if e.cell_b is None:
            continue
        key = comparison_key(e.cell_a, e.cell_b)
        if key not in comps:
            ta = set(d.cell_topics(e.cell_a))
            tb = set(d.cell_topics(e.cell_b))
            comps[key] = ComparisonResult(
                cell_key(e.cell_a), cell_key(e.cell_b), sorted(ta & tb), sorted(ta - tb), sorted(tb - ta)
            )

    def betas(cell: str, metric: str, topics: list[str] | None = None, absolute: bool = False):
        summary = cells[cell].bias.get(metric) if cell in cells else None
        if summary is None:
            return []
        by_topic = {q.topic_id: q.beta for q in summary.per_query}
        order = topics if topics is not None else [q.topic_id for q in summary.per_query]
        return [abs(by_topic[t]) if absolute else by_topic[t] for t in order]

    tests = []
    for e in plan.entries:
        a, metric = cell_key(e.cell_a), e.metric.value
        b = cell_key(e.cell_b) if e.cell_b is not None else None
        if e.kind in (EXISTENCE_MB, EXISTENCE_MAB):
            status, res = _run_test(betas(a, metric, absolute=e.kind == EXISTENCE_MAB), None, False)
            n = len(betas(a, metric))
        else:
            matched = comps[comparison_key(e.cell_a, e.cell_b)].matched
            if e.kind == PERFORMANCE_PAIRED:
                xs = [perf_by_topic[a][t][metric] for t in matched]
                ys = [perf_by_topic[b][t][metric] for t in matched]
            else:
                absolute = e.kind == PAIRED_MAB
                xs = betas(a, metric, matched, absolute)
                ys = betas(b, metric, matched, absolute)
            status, res = _run_test(xs, ys, True)
            n = len(matched)
        raw = corrected = None
        if res is not None:
            raw, corrected = verdict(res.p_value, correction)
        tests.append(
            EntryResult(
                id=e.id,
                kind=e.kind,
                cell_a=a,
                cell_b=b,
                metric=metric,
                status=status,
                n=n,
                t_stat=res.t_stat if res else None,
                df=res.df if res else None,
                p_value=res.p_value if res else None,
                mean_effect=res.mean_effect if res else None,
                raw_significant=raw,
                corrected_significant=corrected,
                m=correction.m,
                adjusted_alpha=correction.adjusted_alpha,
                in_family=e.in_family,
            )
        )
        if status != OK:
            log.info("%s: %s", e.id, status)

    quality = _quality(d, labels)
    quality["paired_exclusions"] = {
        k: {"only_a": len(c.only_a), "only_b": len(c.only_b)} for k, c in comps.items()
    }
    return AuditReport(
        alpha=plan.alpha,
        m=correction.m,
        adjusted_alpha=correction.adjusted_alpha,
        fwer_uncorrected=correction.fwer_uncorrected,
        metric_config={"k": cfg.k, "rbp_persistence": cfg.rbp_persistence},
        cells=cells,
        comparisons=comps,
        tests=tests,
        data_quality=quality,
    )
