"""Declarative pipeline configuration with flag overrides.

One JSON file configures every stage; command-line flags override file
values, which override defaults. Backend credentials are never part of
the file or flags, only the *name* of an environment variable is.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .advloop import LoopConfig
from .feedback import RefineConfig
from .records import EMBED_MODES
from .sandbox import Limits


class ConfigError(ValueError):
    """Fatal configuration problem; commands exit with status 2."""


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "mock"  # "mock" | "http"
    endpoint: str | None = None
    credential_env: str | None = None
    mock_seed: int = 0

    def validate(self, label: str) -> None:
        if self.kind not in ("mock", "http"):
            raise ConfigError(f"{label}.kind must be 'mock' or 'http', got {self.kind!r}")
        if self.kind == "http" and not self.endpoint:
            raise ConfigError(f"{label}.endpoint required for http backends")


@dataclass(frozen=True)
class PipelineConfig:
    corpus_in: str = "corpus.jsonl"
    annotated_out: str = "annotated.jsonl"
    trace_stats_out: str = "trace_stats.json"
    mode: str = "line"
    workers: int = 4
    tracer_cmd: list[str] | None = None

    seed_in: str = "seed.jsonl"
    pool_out: str = "pool.jsonl"
    advgen_stats_out: str = "advgen_stats.json"
    criteria_file: str | None = None

    export_code_out: str = "train_stage1_code.jsonl"
    export_fncall_out: str = "train_stage2_fncall.jsonl"
    manifest_out: str = "training_manifest.json"

    limits: Limits = field(default_factory=Limits)
    refine: RefineConfig = field(default_factory=RefineConfig)
    loop: LoopConfig = field(default_factory=LoopConfig)
    generator: BackendConfig = field(default_factory=BackendConfig)
    discriminator: BackendConfig = field(default_factory=BackendConfig)

    def validate(self) -> None:
        if self.mode not in EMBED_MODES:
            raise ConfigError(f"mode must be one of {EMBED_MODES}, got {self.mode!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        try:
            self.limits.validate()
            self.refine.validate()
            self.loop.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        self.generator.validate("generator")
        self.discriminator.validate("discriminator")


def _build(dc_type, obj: dict, label: str):
    known = {f.name for f in fields(dc_type)}
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"unknown {label} keys: {', '.join(sorted(unknown))}")
    try:
        return dc_type(**obj)
    except TypeError as exc:
        raise ConfigError(f"bad {label} section: {exc}") from exc


def load_config(path: str | Path | None) -> PipelineConfig:
    """Read the config file; a missing path means pure defaults."""
    if path is None:
        return PipelineConfig()
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")

    sections = {
        "limits": Limits,
        "refine": RefineConfig,
        "loop": LoopConfig,
        "generator": BackendConfig,
        "discriminator": BackendConfig,
    }
    kwargs: dict = {}
    for key, value in raw.items():
        if key in sections:
            if not isinstance(value, dict):
                raise ConfigError(f"config section {key} must be an object")
            kwargs[key] = _build(sections[key], value, key)
        else:
            kwargs[key] = value
    cfg = _build(PipelineConfig, kwargs, "config")
    cfg.validate()
    return cfg


def apply_overrides(cfg: PipelineConfig, **overrides) -> PipelineConfig:
    """Apply non-None flag values on top of the file-derived config."""
    top = {k: v for k, v in overrides.items() if v is not None and hasattr(cfg, k)}
    loop_keys = {k[5:]: v for k, v in overrides.items() if k.startswith("loop_") and v is not None}
    if loop_keys:
        top["loop"] = replace(cfg.loop, **loop_keys)
    cfg = replace(cfg, **top)
    cfg.validate()
    return cfg
