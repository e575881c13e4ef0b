"""Run configuration: one YAML/JSON file, overridden by command-line flags.

Defaults follow the published setup: 1 s timestamp granularity, 40 ms
encoder frames, 30 s encoder chunks, R1 thresholds {0.3, 0.5}, two-stage IoU
cutoff 0.3, foreground jitter ±5 dB, background −10 ± 5 dB relative to the
foreground, 40–60 s background subclips and 60 s SED segments.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import yaml

from .forge import STOPWORDS, ForgeConfig


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    global_seed: int = 0
    fg_manifests: List[str] = field(default_factory=list)
    bg_manifest: Optional[str] = None
    out: Optional[str] = None
    jobs: int = 1

    sample_count: int = 0
    sample_rate: int = 16000
    bg_subclip_s: Tuple[float, float] = (40.0, 60.0)
    fg_jitter_db: float = 5.0
    bg_rel_db: Tuple[float, float] = (-15.0, -5.0)
    trim_threshold_db: float = 20.0
    max_skip_fraction: float = 0.10
    stopwords_path: Optional[str] = None

    granularity_s: float = 1.0
    frame_ms: float = 40.0
    chunk_s: float = 30.0
    negative_grounding: bool = False
    sed_chunk_s: float = 60.0

    thresholds: Tuple[float, ...] = (0.3, 0.5)
    iou_cutoff: float = 0.3
    oracle_tolerance_s: float = 0.2

    def __post_init__(self):
        if isinstance(self.fg_manifests, str):
            self.fg_manifests = [self.fg_manifests]
        self.bg_subclip_s = _pair(self.bg_subclip_s, "bg_subclip_s")
        self.bg_rel_db = _pair(self.bg_rel_db, "bg_rel_db")
        self.thresholds = tuple(float(t) for t in self.thresholds)
        if not 0 < self.bg_subclip_s[0] <= self.bg_subclip_s[1]:
            raise ConfigError(f"bg_subclip_s must satisfy 0 < lo <= hi, got {self.bg_subclip_s}")
        if self.bg_rel_db[0] > self.bg_rel_db[1]:
            raise ConfigError(f"bg_rel_db must be (lo, hi), got {self.bg_rel_db}")
        for name in ("granularity_s", "frame_ms", "chunk_s", "sed_chunk_s", "sample_rate"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.sample_count < 0 or self.jobs < 1:
            raise ConfigError("sample_count must be >= 0 and jobs >= 1")
        if not all(0 <= t <= 1 for t in self.thresholds):
            raise ConfigError(f"thresholds must lie in [0, 1], got {self.thresholds}")

    def forge_config(self) -> ForgeConfig:
        return ForgeConfig(
            sample_count=self.sample_count, sample_rate=self.sample_rate, bg_subclip_s=self.bg_subclip_s,
            fg_jitter_db=self.fg_jitter_db, bg_rel_db=self.bg_rel_db,
            trim_threshold_db=self.trim_threshold_db, max_skip_fraction=self.max_skip_fraction,
        )

    def stopwords(self) -> frozenset:
        if not self.stopwords_path:
            return STOPWORDS
        path = Path(self.stopwords_path)
        if not path.is_file():
            raise ConfigError(f"stopword list not found: {path}")
        return frozenset(w.lower() for w in path.read_text().split())

    def with_overrides(self, **overrides) -> "RunConfig":
        changes = {k: v for k, v in overrides.items() if v is not None}
        return dataclasses.replace(self, **changes)


def _pair(value, name) -> Tuple[float, float]:
    try:
        lo, hi = value
        return float(lo), float(hi)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a two-element [lo, hi] list, got {value!r}") from None


def load_config(path: Optional[str] = None) -> RunConfig:
    if path is None:
        return RunConfig()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = yaml.safe_load(p.read_text()) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: top level must be a mapping")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{p}: unknown keys {unknown}")
    base = p.parent
    for key in ("bg_manifest", "out", "stopwords_path"):
        if data.get(key):
            data[key] = str(base / data[key])
    if data.get("fg_manifests"):
        fgs = data["fg_manifests"]
        data["fg_manifests"] = [str(base / f) for f in ([fgs] if isinstance(fgs, str) else fgs)]
    try:
        return RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
