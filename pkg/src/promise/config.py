"""Run configuration: every tunable constant, loadable from JSON."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .names import DEFAULT_CAP, DEFAULT_NGRAM_K, Role


class ConfigError(ValueError):
    pass


@dataclass
class SearchConfig:
    beam_width: int = 6
    candidate_budget: int = 12
    regen_limit: int = 2
    depth_bound: int = 10
    hard_cap: int = 12
    probe_timeout: float = 120.0
    temperature: float = 0.9
    gamma_w: float = 0.2
    gamma_cap: float = 0.15
    seed: int = 0
    max_tokens: int = 2048
    query_cap: int = 360
    # structural retrieval
    alpha: float = 0.05
    beta: float = 0.10
    c_max: int = 10
    shortlist_k: int = 30
    template_n: int = 8
    max_templates_per_theorem: int | None = 2
    # name retrieval
    inventory_caps: dict[str, int] = field(default_factory=lambda: {r.value: DEFAULT_CAP for r in Role})
    ngram_k: int = DEFAULT_NGRAM_K
    # candidate pipeline
    fallbacks: bool = True
    max_add_names: int = 8
    max_repeat_nesting: int = 1
    # budgets
    adapt_budgets: bool = True
    timeout_pressure: float = 0.5
    stagnation_depths: int = 2
    memoize: bool = True

    def __post_init__(self):
        for name in ("beam_width", "candidate_budget", "regen_limit", "depth_bound"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.hard_cap < self.depth_bound:
            raise ConfigError("hard_cap must be >= depth_bound")
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigError("temperature must lie in [0, 2]")
        if self.gamma_w < 0 or self.gamma_cap < 0:
            raise ConfigError("gamma values must be non-negative")
        bad = set(self.inventory_caps) - {r.value for r in Role}
        if bad:
            raise ConfigError(f"unknown inventory roles {sorted(bad)}")


@dataclass
class BackendConfig:
    kind: str = "scripted"
    table: str | None = None
    default_response: str = ""
    base_url: str = "http://localhost:8000/v1"
    model: str = "default"
    max_in_flight: int = 4
    timeout: float = 120.0

    def __post_init__(self):
        if self.kind not in ("scripted", "heuristic", "http"):
            raise ConfigError(f"unknown backend {self.kind!r}")


@dataclass
class Config:
    search: SearchConfig = field(default_factory=SearchConfig)
    backend: BackendConfig = field(default_factory=BackendConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        unknown = set(data) - {"search", "backend"}
        if unknown:
            raise ConfigError(f"unknown config sections {sorted(unknown)}")
        return cls(_build(SearchConfig, data.get("search", {})), _build(BackendConfig, data.get("backend", {})))

    @classmethod
    def load(cls, path: str | Path | None) -> "Config":
        if path is None:
            return cls()
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(data)


def _build(kind, values: dict):
    names = {f.name for f in dataclasses.fields(kind)}
    unknown = set(values) - names
    if unknown:
        raise ConfigError(f"unknown {kind.__name__} keys {sorted(unknown)}")
    return kind(**values)
