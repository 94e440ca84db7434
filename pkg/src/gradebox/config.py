"""Service configuration: one JSON file, overridable via GRADEBOX_* env vars."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

from .sandbox import SandboxPolicy

__all__ = ["ServiceConfig", "load_config"]


@dataclass(frozen=True)
class ServiceConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8080
    store_path: str = "gradebox.db"
    exercise_dir: str = "exercises"
    staff_names: tuple[str, ...] = ()
    cpu_time_limit: float = 1.0
    wall_time_limit: float | None = None
    memory_limit: int = 64 * 1024 * 1024
    output_cap: int = 64 * 1024
    max_code_bytes: int = 64 * 1024
    max_concurrent_jobs: int = 4
    per_user_jobs: int = 1
    session_ttl_seconds: int = 7 * 24 * 3600
    # Honors ?seed= on submits and descriptor fetches; test configs only.
    test_mode: bool = False

    def sandbox_policy(self) -> SandboxPolicy:
        return SandboxPolicy(
            cpu_time_limit=self.cpu_time_limit,
            wall_time_limit=self.wall_time_limit,
            memory_limit=self.memory_limit,
            output_cap=self.output_cap,
        )


_ENV_PREFIX = "GRADEBOX_"


def load_config(path: str | Path | None = None, env: Mapping[str, str] | None = None) -> ServiceConfig:
    """Read the config file (if any), then apply environment overrides like
    GRADEBOX_LISTEN_PORT=9000 or GRADEBOX_STAFF_NAMES=ada,grace."""
    env = os.environ if env is None else env
    data: dict = {}
    if path is not None:
        data.update(json.loads(Path(path).read_text(encoding="utf-8")))

    known = {f.name: f for f in fields(ServiceConfig)}
    for name in known:
        raw = env.get(_ENV_PREFIX + name.upper())
        if raw is not None:
            data[name] = raw

    kwargs: dict = {}
    for name, value in data.items():
        if name not in known:
            raise ValueError(f"unknown config key {name!r}")
        kwargs[name] = _coerce(name, value)
    return ServiceConfig(**kwargs)


def _coerce(name: str, value):
    defaults = ServiceConfig()
    current = getattr(defaults, name)
    if name == "staff_names":
        if isinstance(value, str):
            return tuple(s.strip() for s in value.split(",") if s.strip())
        return tuple(value)
    if name == "wall_time_limit":
        if value in (None, "", "none"):
            return None
        return float(value)
    if name == "test_mode":
        if isinstance(value, str):
            return value.lower() in ("1", "true", "yes", "on")
        return bool(value)
    if isinstance(current, bool):
        return bool(value)
    if isinstance(current, int):
        return int(value)
    if isinstance(current, float):
        return float(value)
    return str(value)
