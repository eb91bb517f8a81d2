"""Command line entry point: ``serpaudit {validate,agreement,audit,render}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .annotations import aggregate, fleiss_kappa, load_judgments
from .audit import default_plan, run_audit
from .config import AuditConfig, ConfigError, load_config
from .corpus import DatasetError, Location, load_dataset
from .report import RenderOptions, load_summary, render_all, write_outputs

log = logging.getLogger("serpaudit")


def _judgment_arg(value: str) -> tuple[Location, Path]:
    loc, sep, path = value.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("expected LOCATION=PATH, e.g. UK=judgments_uk.jsonl")
    try:
        return Location(loc), Path(path)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown location {loc!r}") from None


def _resolve_config(args) -> AuditConfig:
    cfg = load_config(args.config) if args.config else AuditConfig()
    if getattr(args, "dataset", None):
        cfg.dataset = Path(args.dataset)
    for loc, path in getattr(args, "judgments", None) or []:
        cfg.judgments[loc] = path
    if getattr(args, "alpha", None) is not None:
        cfg.alpha = args.alpha
    if getattr(args, "rbp_persistence", None) is not None:
        cfg.metrics = dataclasses.replace(cfg.metrics, rbp_persistence=args.rbp_persistence)
    if getattr(args, "out", None):
        cfg.output_dir = Path(args.out)
    if getattr(args, "p_style", None):
        cfg.p_value_style = args.p_style
    if cfg.dataset is None:
        raise ConfigError("no dataset given (use --dataset or inputs.dataset in the config)")
    return cfg


def cmd_validate(args) -> int:
    cfg = _resolve_config(args)
    d = load_dataset(cfg.dataset)
    print(d.summary())
    for cell, info in d.completeness().items():
        print(f"  {cell}: {info['serps']} SERPs, {info['short_serps']} shorter than 10")
    for loc, path in sorted(cfg.judgments.items()):
        labels = aggregate(load_judgments(path))
        print(f"  judgments {loc.value}: {len(labels)} documents labelled ({path})")
    return 0


def cmd_agreement(args) -> int:
    for path in args.files:
        rep = fleiss_kappa(load_judgments(path))
        line = f"{path}: kappa={rep.kappa:.4f} items={rep.n_items} raters/item={rep.n_raters_per_item}"
        if rep.n_excluded:
            line += f" excluded={rep.n_excluded}"
        print(line)
    return 0


def cmd_audit(args) -> int:
    cfg = _resolve_config(args)
    d = load_dataset(cfg.dataset)
    labels = {loc: aggregate(load_judgments(path)) for loc, path in cfg.judgments.items()}
    for loc in Location:
        if loc not in labels:
            log.warning("no judgments for %s; its documents count as unlabelled", loc.value)
    plan = default_plan(d, cfg.alpha, cfg.include_mab_existence, cfg.m_override)
    report = run_audit(d, labels, plan, cfg.metrics)
    opts = RenderOptions(p_style=cfg.p_value_style, aliases=cfg.engine_aliases)
    written = write_outputs(render_all(report, opts), cfg.output_dir)
    print(f"{d.summary()}; {len(report.tests)} tests, m={report.m}, "
          f"adjusted alpha={report.adjusted_alpha:.6g}")
    for t in report.tests:
        if t.kind.startswith("existence") and t.status == "ok":
            sig = "significant" if t.corrected_significant else "not significant"
            print(f"  {t.id}: t={t.t_stat:.3f} p={t.p_value:.4g} ({sig})")
    print(f"wrote {len(written)} files to {cfg.output_dir}")
    return 0


def cmd_render(args) -> int:
    report = load_summary(Path(args.summary).read_text(encoding="utf-8"))
    aliases = load_config(args.config).engine_aliases if args.config else None
    opts = RenderOptions(p_style=args.p_style or "raw", **({"aliases": aliases} if aliases else {}))
    written = write_outputs(render_all(report, opts), args.out)
    print(f"wrote {len(written)} files to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="serpaudit", description="Audit ideological bias in SERPs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p):
        p.add_argument("--config", type=Path, help="audit config (YAML)")
        p.add_argument("--dataset", type=Path, help="directory with topics.jsonl and serps.jsonl")
        p.add_argument("--judgments", type=_judgment_arg, action="append", metavar="LOC=PATH")

    p = sub.add_parser("validate", help="load a dataset and check its invariants")
    data_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("agreement", help="Fleiss' kappa of judgment files")
    p.add_argument("files", nargs="+", type=Path)
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("audit", help="run the full audit and write tables, figures and summary")
    data_args(p)
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--alpha", type=float)
    p.add_argument("--rbp-persistence", type=float)
    p.add_argument("--p-style", choices=("raw", "threshold"))
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("render", help="re-render tables and figures from a saved summary.json")
    p.add_argument("summary", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--config", type=Path, help="config providing engine aliases")
    p.add_argument("--p-style", choices=("raw", "threshold"))
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (DatasetError, ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
