"""SERP / topic data model and line-delimited (JSONL) dataset loading."""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping

log = logging.getLogger(__name__)

TOPICS_FILE = "topics.jsonl"
SERPS_FILE = "serps.jsonl"
PROVENANCE_FILE = "provenance.json"

MAX_RANK = 10


class DatasetError(ValueError):
    """Raised when an input file violates the dataset format or invariants."""


class Leaning(str, Enum):
    CONSERVATIVE = "conservative"
    LIBERAL = "liberal"

    @property
    def opposite(self) -> "Leaning":
        return Leaning.LIBERAL if self is Leaning.CONSERVATIVE else Leaning.CONSERVATIVE


class Engine(str, Enum):
    ENGINE1 = "engine1"
    ENGINE2 = "engine2"


class Location(str, Enum):
    UK = "UK"
    US = "US"


Cell = tuple[Engine, Location]


def cell_label(cell: Cell) -> str:
    return f"({cell[0].value},{cell[1].value})"


@dataclass(frozen=True)
class Topic:
    topic_id: str
    title: str
    query: str
    pro_leaning: Leaning


@dataclass(frozen=True)
class SerpResult:
    rank: int
    doc_id: str
    url: str


@dataclass(frozen=True)
class SerpRecord:
    engine: Engine
    location: Location
    topic_id: str
    results: tuple[SerpResult, ...]

    @property
    def cell(self) -> Cell:
        return (self.engine, self.location)

    @property
    def key(self) -> str:
        return f"{self.engine.value}/{self.location.value}/{self.topic_id}"


@dataclass(frozen=True)
class Dataset:
    topics: Mapping[str, Topic]
    serps: tuple[SerpRecord, ...]
    provenance: Mapping[str, object] = field(default_factory=dict)

    def cells(self) -> list[Cell]:
        return sorted({s.cell for s in self.serps}, key=lambda c: (c[0].value, c[1].value))

    def cell_serps(self, cell: Cell) -> list[SerpRecord]:
        """SERPs of one (engine, location) cell, ordered by topic_id."""
        return sorted((s for s in self.serps if s.cell == cell), key=lambda s: s.topic_id)

    def cell_topics(self, cell: Cell) -> list[str]:
        return [s.topic_id for s in self.cell_serps(cell)]

    def serp(self, cell: Cell, topic_id: str) -> SerpRecord:
        for s in self.serps:
            if s.cell == cell and s.topic_id == topic_id:
                return s
        raise KeyError(f"no SERP for {cell_label(cell)} topic {topic_id}")

    def completeness(self) -> dict[str, dict[str, int]]:
        """Per-cell count of SERPs and of SERPs shorter than the full top-10."""
        out: dict[str, dict[str, int]] = {}
        for cell in self.cells():
            serps = self.cell_serps(cell)
            out[cell_label(cell)] = {
                "serps": len(serps),
                "short_serps": sum(1 for s in serps if len(s.results) < MAX_RANK),
            }
        return out

    def summary(self) -> str:
        return f"{len(self.serps)} SERPs, {len(self.topics)} topics"


def _iter_records(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path.name}:{lineno}: malformed record ({exc.msg})") from None
            if not isinstance(rec, dict):
                raise DatasetError(f"{path.name}:{lineno}: malformed record (expected an object)")
            yield lineno, rec


def _field(rec: dict, name: str, where: str) -> str:
    if name not in rec:
        raise DatasetError(f"{where}: malformed record (missing field '{name}')")
    value = rec[name]
    if not isinstance(value, str):
        raise DatasetError(f"{where}: malformed record (field '{name}' must be a string)")
    return value


def _enum(kind: type[Enum], value: str, where: str):
    try:
        return kind(value)
    except ValueError:
        allowed = ", ".join(m.value for m in kind)
        raise DatasetError(f"{where}: malformed record ('{value}' not one of {allowed})") from None


def parse_topics(records: Iterable[tuple[int, dict]], source: str = TOPICS_FILE) -> dict[str, Topic]:
    topics: dict[str, Topic] = {}
    for lineno, rec in records:
        where = f"{source}:{lineno}"
        tid = _field(rec, "topic_id", where)
        if tid in topics:
            raise DatasetError(f"{where}: duplicate topic_id {tid}")
        topics[tid] = Topic(
            topic_id=tid,
            title=_field(rec, "title", where),
            query=_field(rec, "query", where),
            pro_leaning=_enum(Leaning, _field(rec, "pro_leaning", where), where),
        )
    return topics


def parse_serps(
    records: Iterable[tuple[int, dict]], topics: Mapping[str, Topic], source: str = SERPS_FILE
) -> tuple[SerpRecord, ...]:
    """Group one-result-per-line records into SerpRecords and check every invariant."""
    grouped: dict[tuple[Engine, Location, str], list[tuple[int, SerpResult]]] = {}
    for lineno, rec in records:
        where = f"{source}:{lineno}"
        engine = _enum(Engine, _field(rec, "engine", where), where)
        location = _enum(Location, _field(rec, "location", where), where)
        tid = _field(rec, "topic_id", where)
        rank = rec.get("rank")
        if isinstance(rank, bool) or not isinstance(rank, int):
            raise DatasetError(f"{where}: malformed record (field 'rank' must be an integer)")
        if not 1 <= rank <= MAX_RANK:
            raise DatasetError(f"{where}: rank out of range ({rank} not in 1..{MAX_RANK})")
        result = SerpResult(rank=rank, doc_id=_field(rec, "doc_id", where), url=_field(rec, "url", where))
        grouped.setdefault((engine, location, tid), []).append((lineno, result))

    serps = []
    for (engine, location, tid), rows in grouped.items():
        key = f"{engine.value}/{location.value}/{tid}"
        if tid not in topics:
            raise DatasetError(f"{source}:{rows[0][0]}: dangling topic_id {tid} in SERP {key}")
        ranks = Counter(r.rank for _, r in rows)
        for rank, count in sorted(ranks.items()):
            if count > 1:
                raise DatasetError(f"duplicate rank {rank} in SERP {key}")
        n = len(rows)
        if sorted(ranks) != list(range(1, n + 1)):
            missing = sorted(set(range(1, n + 1)) - set(ranks))
            raise DatasetError(f"rank gap in SERP {key} (missing {missing})")
        docs = Counter(r.doc_id for _, r in rows)
        dup_docs = sorted(d for d, c in docs.items() if c > 1)
        if dup_docs:
            raise DatasetError(f"duplicate doc_id {dup_docs[0]} in SERP {key}")
        results = tuple(sorted((r for _, r in rows), key=lambda r: r.rank))
        serps.append(SerpRecord(engine=engine, location=location, topic_id=tid, results=results))
    serps.sort(key=lambda s: (s.engine.value, s.location.value, s.topic_id))
    return tuple(serps)


def load_dataset(path: str | Path) -> Dataset:
    """Load a dataset directory holding ``topics.jsonl``, ``serps.jsonl`` and
    optionally ``provenance.json``.

    SERP lines for one (engine, location, topic) key need not be contiguous; they
    are grouped, so a repeated key shows up as a duplicate rank.
    """
    root = Path(path)
    if not root.is_dir():
        raise DatasetError(f"dataset directory not found: {root}")
    topics = parse_topics(_iter_records(root / TOPICS_FILE))
    serps = parse_serps(_iter_records(root / SERPS_FILE), topics)
    provenance: dict = {}
    if (root / PROVENANCE_FILE).exists():
        with open(root / PROVENANCE_FILE, encoding="utf-8") as fh:
            provenance = json.load(fh)
    d = Dataset(topics=topics, serps=serps, provenance=provenance)
    log.info("loaded %s", d.summary())
    return d


def matched_topics(d: Dataset, cell_a: Cell, cell_b: Cell) -> list[str]:
    """Topics present in both cells, sorted; the pairing axis of every paired test."""
    cells = set(d.cells())
    for cell in (cell_a, cell_b):
        if cell not in cells:
            raise DatasetError(f"cell {cell_label(cell)} not in dataset")
    common = set(d.cell_topics(cell_a)) & set(d.cell_topics(cell_b))
    if not common:
        raise DatasetError(f"no matched topics between {cell_label(cell_a)} and {cell_label(cell_b)}")
    return sorted(common)
