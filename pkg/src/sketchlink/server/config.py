"""Server configuration: data directory, project roots, bind address.

Loaded from a JSON file; SKETCHLINK_BIND and SKETCHLINK_DATA_DIR override
the file. Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

ENV_BIND = "SKETCHLINK_BIND"
ENV_DATA_DIR = "SKETCHLINK_DATA_DIR"

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8787


class ConfigError(Exception):
    pass


@dataclass
class ServerConfig:
    data_dir: Path
    projects: dict[str, Path] = field(default_factory=dict)
    host: str = DEFAULT_HOST
    port: int = DEFAULT_PORT
    webapp_dir: Path | None = None
    public_url: str | None = None

    @property
    def bind(self) -> str:
        return f"{self.host}:{self.port}"

    @property
    def base_url(self) -> str:
        return self.public_url or f"http://{self.host}:{self.port}"

    @property
    def ws_url(self) -> str:
        return f"ws://{self.host}:{self.port}/ws"

    def validate(self) -> None:
        for name, root in self.projects.items():
            if not Path(root).is_dir():
                raise ConfigError(f"project {name!r}: path does not exist: {root}")


def _parse_bind(value: str) -> tuple[str, int]:
    host, _, port_text = value.rpartition(":")
    if not host or not port_text.isdigit():
        raise ConfigError(f"bind address must be host:port, got {value!r}")
    return host, int(port_text)


def load_config(path: Path) -> ServerConfig:
    """Read a config file, apply env overrides, and validate project roots."""
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"config file not found: {config_path}")
    try:
        raw = json.loads(config_path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")

    base = config_path.parent

    def resolve(value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else (base / p).resolve()

    data_dir = raw.get("data_dir")
    if not data_dir:
        raise ConfigError("config requires a data_dir")

    host, port = DEFAULT_HOST, DEFAULT_PORT
    if "bind" in raw:
        host, port = _parse_bind(str(raw["bind"]))

    projects_raw = raw.get("projects", {})
    if not isinstance(projects_raw, dict):
        raise ConfigError("projects must map names to paths")

    config = ServerConfig(
        data_dir=resolve(str(data_dir)),
        projects={name: resolve(str(p)) for name, p in projects_raw.items()},
        host=host,
        port=port,
        webapp_dir=resolve(str(raw["webapp_dir"])) if raw.get("webapp_dir") else None,
        public_url=raw.get("public_url"),
    )

    if os.environ.get(ENV_DATA_DIR):
        config.data_dir = Path(os.environ[ENV_DATA_DIR])
    if os.environ.get(ENV_BIND):
        config.host, config.port = _parse_bind(os.environ[ENV_BIND])

    config.validate()
    return config
