"""Run configuration: built-in defaults < config file < environment < flags."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigurationError
from .model import Classification

ENV_PREFIX = "XAI_ENRICH_"
SECRET_ENV = {
    "EE_API_KEY": "ee_api_key",
    "KG_API_KEY": "kg_api_key",
    "WIKIFIER_USER_KEY": "wikifier_user_key",
}

# dotted config-file keys -> RunConfig attribute
FILE_KEYS = {
    "media_events.endpoint": "media_events_endpoint",
    "media_events.limit": "media_limit",
    "dataset_catalog.endpoint": "dataset_catalog_endpoint",
    "dataset_catalog.limit": "dataset_limit",
    "knowledge_graph.endpoint": "knowledge_graph_endpoint",
    "knowledge_graph.limit": "kg_limit",
    "knowledge_graph.emergent_only": "kg_emergent_only",
    "wikifier.endpoint": "wikifier_endpoint",
    "wikifier.lang": "wikifier_lang",
    "wikifier.min_salience": "min_salience",
    "wikifier.class_map": "class_map",
    "pipeline.keyword_cutoff": "keyword_cutoff",
    "pipeline.top_n": "top_n",
    "pipeline.max_m": "max_m",
    "pipeline.excluded_classes": "excluded_classes",
    "pipeline.query_operator": "query_operator",
    "pipeline.exclude_reference_from_emergent": "exclude_reference_from_emergent",
    "pipeline.fail_fast": "fail_fast",
    "cache.dir": "cache_dir",
    "cache.fixtures": "fixture_dirs",
    "run.offline": "offline",
    "run.parallelism": "parallelism",
    "run.min_interval": "min_interval",
    "run.max_in_flight": "max_in_flight",
    "evaluation.strict": "strict_judgments",
}


@dataclass(frozen=True)
class RunConfig:
    keyword_cutoff: int | None = None
    media_limit: int = 25
    dataset_limit: int = 10
    kg_limit: int = 10
    top_n: int = 10
    max_m: int = 5
    min_salience: float = 0.8
    excluded_classes: tuple[str, ...] = ("person", "place")
    query_operator: str = "or"
    kg_emergent_only: bool = False
    exclude_reference_from_emergent: bool = True
    fail_fast: bool = False

    media_events_endpoint: str = "https://eventregistry.org/api/v1/event/getEvents"
    dataset_catalog_endpoint: str = "https://data.europa.eu/api/hub/search/search"
    knowledge_graph_endpoint: str = "https://kgsearch.googleapis.com/v1/entities:search"
    wikifier_endpoint: str = "http://www.wikifier.org/annotate-article"
    wikifier_lang: str = "en"
    class_map: str | None = None
    ee_api_key: str | None = None
    kg_api_key: str | None = None
    wikifier_user_key: str | None = None

    cache_dir: str = "cache"
    fixture_dirs: tuple[str, ...] = ("fixtures/cache",)
    offline: bool = False
    parallelism: int = 4
    min_interval: float = 0.2
    max_in_flight: int = 4
    strict_judgments: bool = True

    def __post_init__(self):
        for name in ("media_limit", "dataset_limit", "kg_limit", "top_n", "max_m", "parallelism", "max_in_flight"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1")
        if self.keyword_cutoff is not None and self.keyword_cutoff < 1:
            raise ConfigurationError("keyword_cutoff must be >= 1")
        if not 0.0 <= self.min_salience <= 1.0:
            raise ConfigurationError("min_salience must lie in [0, 1]")
        try:
            [Classification(c) for c in self.excluded_classes]
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        if self.query_operator not in ("or", "and"):
            raise ConfigurationError(f"query_operator must be 'or' or 'and', got {self.query_operator!r}")


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, value: Any) -> Any:
    kind = _FIELD_TYPES[name]
    try:
        if value is None:
            return None
        if kind.startswith("tuple"):
            if isinstance(value, str):
                value = [v for v in (p.strip() for p in value.split(",")) if v]
            return tuple(str(v) for v in value)
        if kind.startswith("bool"):
            if isinstance(value, str):
                low = value.strip().lower()
                if low in ("1", "true", "yes", "on"):
                    return True
                if low in ("0", "false", "no", "off"):
                    return False
                raise ValueError(value)
            return bool(value)
        if kind.startswith("int"):
            if isinstance(value, bool):
                raise ValueError(value)
            return int(value)
        if kind.startswith("float"):
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"invalid value for {name}: {value!r}") from None


def _flatten(doc: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    out = {}
    for key, value in doc.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, Mapping):
            out.update(_flatten(value, dotted + "."))
        else:
            out[dotted] = value
    return out


def file_layer(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text("utf-8")) or {}
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"invalid config file {path}: {exc}") from None
    if not isinstance(doc, Mapping):
        raise ConfigurationError(f"config file {path} must contain a mapping")
    layer = {}
    for dotted, value in _flatten(doc).items():
        if dotted not in FILE_KEYS:
            raise ConfigurationError(f"{path}: unknown config key {dotted!r}")
        layer[FILE_KEYS[dotted]] = _coerce(FILE_KEYS[dotted], value)
    return layer


def env_layer(env: Mapping[str, str]) -> dict[str, Any]:
    layer = {}
    for name in _FIELD_TYPES:
        raw = env.get(ENV_PREFIX + name.upper())
        if raw is not None and raw != "":
            layer[name] = _coerce(name, raw)
    for var, name in SECRET_ENV.items():
        if env.get(var):
            layer[name] = env[var]
    return layer


def load_run_config(config_path: str | Path | None = None, *, env: Mapping[str, str] | None = None,
                    overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Merge the layers; ``None`` values in ``overrides`` mean "flag not given"."""
    merged: dict[str, Any] = {}
    if config_path is not None:
        merged.update(file_layer(config_path))
    merged.update(env_layer(os.environ if env is None else env))
    for name, value in (overrides or {}).items():
        if value is not None:
            merged[name] = _coerce(name, value)
    return replace(RunConfig(), **merged)
