"""Hub configuration: a single YAML document with a fixed key schema.

Keys: listen, ontology, default_format, databases[].{name,fixture,mappings},
remotes[].{iri,url}, graphs[].{iri,fixture} (fixture-backed mock endpoints),
aliases[].{iri,db} (endpoint IRIs answered in-process), federation settings,
and an optional ui_assets directory.  Relative paths resolve against the
config file's directory; referenced files must exist at load time.
"""
from __future__ import annotations

from pathlib import Path

import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from .results import FORMATS


class ConfigError(ValueError):
    pass


class DatabaseConfig(BaseModel):
    name: str
    fixture: str
    mappings: str


class RemoteConfig(BaseModel):
    iri: str
    url: str
    use_post: bool = False


class GraphMockConfig(BaseModel):
    iri: str
    fixture: str


class AliasConfig(BaseModel):
    iri: str
    db: str


class FederationConfig(BaseModel):
    bind_join: bool = True
    timeout: float = 15.0
    max_service_solutions: int = 100_000


class HubConfig(BaseModel):
    listen: str = "127.0.0.1:8080"
    ontology: str
    default_format: str = "json"
    databases: list[DatabaseConfig] = Field(default_factory=list)
    remotes: list[RemoteConfig] = Field(default_factory=list)
    graphs: list[GraphMockConfig] = Field(default_factory=list)
    aliases: list[AliasConfig] = Field(default_factory=list)
    federation: FederationConfig = Field(default_factory=FederationConfig)
    ui_assets: str | None = None
    base_dir: Path = Field(default_factory=Path)

    @field_validator("default_format")
    @classmethod
    def _known_format(cls, value: str) -> str:
        if value not in FORMATS:
            raise ValueError(f"default_format must be one of {FORMATS}")
        return value

    @model_validator(mode="after")
    def _unique_names(self) -> "HubConfig":
        names = [db.name for db in self.databases]
        if len(names) != len(set(names)):
            raise ValueError(f"database names must be unique: {names}")
        iris = [r.iri for r in self.remotes] + [g.iri for g in self.graphs] \
            + [a.iri for a in self.aliases]
        if len(iris) != len(set(iris)):
            raise ValueError(f"endpoint IRIs must be unique: {iris}")
        return self

    def resolve(self, path: str) -> Path:
        return (self.base_dir / path).resolve()

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])


def load_config(path: str | Path) -> HubConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc
    try:
        config = HubConfig(**raw, base_dir=path.parent)
    except Exception as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc
    missing = []
    for db in config.databases:
        for ref in (db.fixture, db.mappings):
            if not config.resolve(ref).exists():
                missing.append(ref)
    if not config.resolve(config.ontology).exists():
        missing.append(config.ontology)
    for mock in config.graphs:
        if not config.resolve(mock.fixture).exists():
            missing.append(mock.fixture)
    if missing:
        raise ConfigError(f"missing files referenced by {path}: {', '.join(missing)}")
    return config


def demo_config_path() -> Path:
    """Path of the packaged demo configuration."""
    return Path(__file__).parent / "data" / "demo.yaml"
