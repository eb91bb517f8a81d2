"""Audit configuration (YAML). Relative paths resolve against the config file."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .corpus import Location
from .metrics import MetricConfig
from .report import DEFAULT_ALIASES


class ConfigError(ValueError):
    pass


@dataclass
class AuditConfig:
    alpha: float = 0.05
    metrics: MetricConfig = field(default_factory=MetricConfig)
    m_override: int | None = None
    include_mab_existence: bool = False
    dataset: Path | None = None
    judgments: dict[Location, Path] = field(default_factory=dict)
    output_dir: Path = Path("audit-out")
    p_value_style: str = "raw"
    engine_aliases: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_ALIASES))


_TOP_KEYS = {"alpha", "metrics", "plan", "inputs", "output", "engine_aliases"}


def _section(raw: dict, name: str) -> dict:
    value = raw.get(name) or {}
    if not isinstance(value, dict):
        raise ConfigError(f"'{name}' must be a mapping")
    return value


def parse_config(raw: dict[str, Any], base: Path = Path(".")) -> AuditConfig:
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    metrics = _section(raw, "metrics")
    plan = _section(raw, "plan")
    inputs = _section(raw, "inputs")
    output = _section(raw, "output")

    cfg = AuditConfig()
    cfg.alpha = float(raw.get("alpha", cfg.alpha))
    if not 0.0 < cfg.alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {cfg.alpha}")
    try:
        cfg.metrics = MetricConfig(
            k=int(metrics.get("k", 10)), rbp_persistence=float(metrics.get("rbp_persistence", 0.8))
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if plan.get("m_override") is not None:
        cfg.m_override = int(plan["m_override"])
        if cfg.m_override < 1:
            raise ConfigError("plan.m_override must be >= 1")
    cfg.include_mab_existence = bool(plan.get("include_mab_existence", False))
    if inputs.get("dataset") is not None:
        cfg.dataset = base / inputs["dataset"]
    for loc, path in (inputs.get("judgments") or {}).items():
        try:
            cfg.judgments[Location(loc)] = base / path
        except ValueError:
            raise ConfigError(f"unknown location {loc!r} in inputs.judgments") from None
    if output.get("directory") is not None:
        cfg.output_dir = base / output["directory"]
    cfg.p_value_style = output.get("p_value_style", cfg.p_value_style)
    if cfg.p_value_style not in ("raw", "threshold"):
        raise ConfigError(f"output.p_value_style must be 'raw' or 'threshold', got {cfg.p_value_style!r}")
    cfg.engine_aliases.update(raw.get("engine_aliases") or {})
    return cfg


def load_config(path: str | Path) -> AuditConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return parse_config(raw, path.parent)
