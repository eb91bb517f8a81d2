"""Render an AuditReport as aligned text / CSV tables, figure point files and a
JSON summary. Every renderer returns ``{filename: content}`` and never touches
the filesystem; ``write_outputs`` does that."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Any, Mapping

from .audit import (
    EXISTENCE_MAB,
    EXISTENCE_MB,
    PAIRED_MAB,
    PAIRED_MB,
    PERFORMANCE_PAIRED,
    TOO_FEW,
    ZERO_VARIANCE,
    AuditReport,
    EntryResult,
    parse_cell_key,
)
from .metrics import METRICS, Metric

SUMMARY_FILE = "summary.json"
SUMMARY_SCHEMA_VERSION = 1
FIGURE_HEADER = ("x", "y", "topic_id", "series")

DEFAULT_ALIASES = {"engine1": "Engine 1", "engine2": "Engine 2"}


@dataclass(frozen=True)
class TableSpec:
    title: str
    columns: tuple[str, ...]
    # (group label, [(row label, cells)]) ; a group label of "" means no grouping
    row_groups: tuple[tuple[str, tuple[tuple[str, tuple[str, ...]], ...]], ...]
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class RenderOptions:
    p_style: str = "raw"  # "raw" | "threshold"
    aliases: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_ALIASES))

    def __post_init__(self):
        if self.p_style not in ("raw", "threshold"):
            raise ValueError(f"unknown p-value style {self.p_style!r}")


def fmt4(x: float) -> str:
    """Four decimals, round-half-even on the shortest decimal repr of ``x``."""
    q = Decimal(repr(float(x))).quantize(Decimal("0.0001"), rounding=ROUND_HALF_EVEN)
    if q == 0:
        q = abs(q)
    return f"{q:.4f}"


def _fmt_alpha(alpha: float) -> str:
    return f"{alpha:g}"


def format_p(t: EntryResult, style: str = "raw", alpha: float = 0.05) -> str:
    if t.status == ZERO_VARIANCE:
        return "n/a (zero variance)"
    if t.status == TOO_FEW:
        return "n/a (fewer than 2 queries)"
    p = t.p_value
    if style == "threshold":
        a = _fmt_alpha(alpha)
        if p < 0.0001:
            text = "< 0.0001"
        elif p < alpha:
            text = f"< {a}"
        elif p == alpha:
            text = f"= {a}"
        else:
            text = f"> {a}"
    else:
        text = fmt4(p) if p >= 0.0001 else f"{p:.2e}"
    if t.corrected_significant:
        text += " **"
    elif t.raw_significant:
        text += " *"
    return text


def cell_display(key: str, aliases: Mapping[str, str], with_location: bool = True) -> str:
    engine, location = parse_cell_key(key)
    name = aliases.get(engine.value, engine.value)
    return f"{name} ({location.value})" if with_location else name


def _legend(r: AuditReport) -> tuple[str, ...]:
    return (
        f"* p <= {_fmt_alpha(r.alpha)} (uncorrected); "
        f"** p <= {r.adjusted_alpha:.6g} (Bonferroni, m={r.m})",
    )


def _metric_cols() -> tuple[str, ...]:
    return tuple(m.value for m in METRICS)


def _p_row(r: AuditReport, kind: str, where: str, opts: RenderOptions) -> tuple[str, ...]:
    cells = []
    for m in METRICS:
        cells.append(format_p(r.test(f"{kind}:{where}:{m.value}"), opts.p_style, r.alpha))
    return tuple(cells)


def _perf_row(r: AuditReport, key: str) -> tuple[str, ...]:
    return tuple(fmt4(r.cells[key].performance[m.value]) for m in METRICS)


def _bias_row(r: AuditReport, key: str, stat: str) -> tuple[str, ...]:
    out = []
    for m in METRICS:
        s = r.cells[key].bias.get(m.value)
        out.append("n/a" if s is None else fmt4(s.mb if stat == "MB" else s.mab))
    return tuple(out)


def _planned(r: AuditReport) -> set[str]:
    return {t.id for t in r.tests}


def build_tables(r: AuditReport, opts: RenderOptions = RenderOptions()) -> dict[str, TableSpec]:
    """Table specs keyed by file stem, in a fixed order."""
    planned = _planned(r)
    tables: dict[str, TableSpec] = {}
    n = 1
    for where in r.comparisons:
        if f"{PERFORMANCE_PAIRED}:{where}:{METRICS[0].value}" not in planned:
            continue
        ka, kb = where.split("~")
        tables[f"table{n:02d}_performance_{_slug(where)}"] = TableSpec(
            title=f"Retrieval effectiveness: {cell_display(ka, opts.aliases)} vs "
            f"{cell_display(kb, opts.aliases)}, two-tailed paired t-test",
            columns=_metric_cols(),
            row_groups=(
                (
                    "",
                    (
                        (cell_display(ka, opts.aliases), _perf_row(r, ka)),
                        (cell_display(kb, opts.aliases), _perf_row(r, kb)),
                        ("p-value", _p_row(r, PERFORMANCE_PAIRED, where, opts)),
                    ),
                ),
            ),
            notes=_legend(r),
        )
        n += 1
    for where in r.comparisons:
        if f"{PAIRED_MB}:{where}:{METRICS[0].value}" not in planned:
            continue
        ka, kb = where.split("~")
        groups = []
        for stat, kind in (("MB", PAIRED_MB), ("MAB", PAIRED_MAB)):
            groups.append(
                (
                    stat,
                    (
                        (cell_display(ka, opts.aliases), _bias_row(r, ka, stat)),
                        (cell_display(kb, opts.aliases), _bias_row(r, kb, stat)),
                        ("p-value", _p_row(r, kind, where, opts)),
                    ),
                )
            )
        tables[f"table{n:02d}_bias_{_slug(where)}"] = TableSpec(
            title=f"Ideological bias: {cell_display(ka, opts.aliases)} vs "
            f"{cell_display(kb, opts.aliases)}, two-tailed paired t-test",
            columns=_metric_cols(),
            row_groups=tuple(groups),
            notes=_legend(r),
        )
        n += 1
    groups = []
    for key in r.cells:
        rows = []
        for stat, kind in (("MB", EXISTENCE_MB), ("MAB", EXISTENCE_MAB)):
            if f"{kind}:{key}:{METRICS[0].value}" in planned:
                rows.append((stat, _bias_row(r, key, stat)))
                rows.append((f"p-value ({stat})", _p_row(r, kind, key, opts)))
        if rows:
            groups.append((cell_display(key, opts.aliases), tuple(rows)))
    if groups:
        tables[f"table{n:02d}_existence"] = TableSpec(
            title="Existence of bias per engine and location, one-sample t-test against 0",
            columns=_metric_cols(),
            row_groups=tuple(groups),
            notes=_legend(r),
        )
    return tables


def _slug(where: str) -> str:
    return where.replace("/", "-").replace("~", "_vs_")


def table_text(t: TableSpec) -> str:
    has_groups = any(g for g, _ in t.row_groups)
    rows = [("", "", *t.columns)]
    for group, group_rows in t.row_groups:
        for j, (label, cells) in enumerate(group_rows):
            rows.append((group if j == 0 else "", label, *cells))
    if not has_groups:
        rows = [r[1:] for r in rows]
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    n_labels = 2 if has_groups else 1

    def line(row):
        parts = [c.ljust(w) for c, w in zip(row[:n_labels], widths)]
        parts += [c.rjust(w) for c, w in zip(row[n_labels:], widths[n_labels:])]
        return "  ".join(parts).rstrip()

    rule_len = max(len(line(r)) for r in rows)
    out = [t.title, "=" * rule_len, line(rows[0]), "-" * rule_len]
    i = 1
    for g, (group, group_rows) in enumerate(t.row_groups):
        if g:
            out.append("-" * rule_len)
        for _ in group_rows:
            out.append(line(rows[i]))
            i += 1
    out.append("=" * rule_len)
    out.extend(t.notes)
    return "\n".join(out) + "\n"


def table_csv(t: TableSpec) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("group", "row", *t.columns))
    for group, group_rows in t.row_groups:
        for label, cells in group_rows:
            w.writerow((group, label, *cells))
    return buf.getvalue()


def render_tables(r: AuditReport, opts: RenderOptions = RenderOptions()) -> dict[str, str]:
    files = {}
    for stem, spec in build_tables(r, opts).items():
        files[f"{stem}.txt"] = table_text(spec)
        files[f"{stem}.csv"] = table_csv(spec)
    return files


def metric_upper_bound(metric: Metric, k: int, p: float) -> float:
    metric = Metric(metric)
    if metric is Metric.P10:
        return 1.0
    if metric is Metric.RBP:
        return 1.0 - p**k
    return math.fsum(1.0 / math.log2(i + 2) for i in range(k))


def _points_csv(points: list[tuple[float, float, str, str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIGURE_HEADER)
    for x, y, topic, series in points:
        w.writerow((repr(float(x)), repr(float(y)), topic, series))
    return buf.getvalue()


def _diagonal_csv(lo: float, hi: float) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("x", "y"))
    w.writerow((repr(lo), repr(lo)))
    w.writerow((repr(hi), repr(hi)))
    return buf.getvalue()


def render_figure_data(r: AuditReport, metric: Metric | str) -> dict[str, str]:
    """Point files for one metric.

    ``leaning_<location>``: x = conservative score, y = liberal score, one series
    per engine. ``beta_<comparison>``: x = bias in the first cell, y = bias in the
    second, over matched topics. Each gets a ``.diagonal.csv`` with the y = x line.
    """
    try:
        metric = Metric(metric)
    except ValueError:
        raise ValueError(f"unknown metric {metric!r}") from None
    k = int(r.metric_config["k"])
    ub = metric_upper_bound(metric, k, float(r.metric_config["rbp_persistence"]))
    mslug = metric.value.replace("@", "")
    files = {}

    by_location: dict[str, list[str]] = {}
    for key in r.cells:
        by_location.setdefault(key.split("/")[1], []).append(key)
    for location, keys in by_location.items():
        points = []
        for key in keys:
            s = r.cells[key].bias.get(metric.value)
            for q in s.per_query if s else ():
                points.append((q.score_conservative, q.score_liberal, q.topic_id, key.split("/")[0]))
        stem = f"fig_leaning_{location}_{mslug}"
        files[f"{stem}.csv"] = _points_csv(points)
        files[f"{stem}.diagonal.csv"] = _diagonal_csv(0.0, ub)

    for where, comp in r.comparisons.items():
        sa = r.cells[comp.cell_a].bias.get(metric.value)
        sb = r.cells[comp.cell_b].bias.get(metric.value)
        points = []
        if sa and sb:
            ba = {q.topic_id: q.beta for q in sa.per_query}
            bb = {q.topic_id: q.beta for q in sb.per_query}
            points = [(ba[t], bb[t], t, where) for t in comp.matched if t in ba and t in bb]
        stem = f"fig_beta_{_slug(where)}_{mslug}"
        files[f"{stem}.csv"] = _points_csv(points)
        files[f"{stem}.diagonal.csv"] = _diagonal_csv(-ub, ub)
    return files


def render_summary(r: AuditReport) -> str:
    """Full-precision JSON of the report; ``load_summary`` inverts it."""
    body: dict[str, Any] = {"schema_version": SUMMARY_SCHEMA_VERSION, **r.to_dict()}
    return json.dumps(body, indent=2, allow_nan=False) + "\n"


def load_summary(text: str) -> AuditReport:
    data = json.loads(text)
    version = data.get("schema_version")
    if version != SUMMARY_SCHEMA_VERSION:
        raise ValueError(f"unsupported summary schema version {version!r}")
    return AuditReport.from_dict(data)


def render_all(r: AuditReport, opts: RenderOptions = RenderOptions()) -> dict[str, str]:
    files = render_tables(r, opts)
    for m in METRICS:
        files.update({f"figures/{name}": body for name, body in render_figure_data(r, m).items()})
    files[SUMMARY_FILE] = render_summary(r)
    return files


def write_outputs(files: Mapping[str, str], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    written = []
    for name in sorted(files):
        path = out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(files[name], encoding="utf-8")
        written.append(path)
    return written
