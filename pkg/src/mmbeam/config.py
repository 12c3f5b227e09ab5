"""Loading scenario configs from JSON with ``--set`` overrides."""

from __future__ import annotations

import json
import os
import re
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

from .exceptions import ConfigurationError
from .scenario import ScenarioConfig

SEED_ENV = "MMBEAM_SEED"


class ConfigFileError(ConfigurationError):
    """Config problem tied to a file position, formatted as ``path:line: message``."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}" if line else f"{path}: {message}")
        self.path = path
        self.line = line


def bundled_config(name: str) -> Optional[Path]:
    ref = resources.files("mmbeam") / "configs" / name
    return Path(str(ref)) if ref.is_file() else None


def resolve_config_path(path) -> Path:
    p = Path(path)
    if p.is_file():
        return p
    bundled = bundled_config(p.name)
    if bundled is not None:
        return bundled
    raise ConfigFileError(path, None, "config file not found")


def _key_line(text: str, key: Optional[str]) -> Optional[int]:
    if not key:
        return None
    pattern = re.compile(r'"%s"\s*:' % re.escape(key))
    for i, line in enumerate(text.splitlines(), start=1):
        if pattern.search(line):
            return i
    return None


def parse_override(item: str):
    """``a.b=value`` to ``(["a", "b"], value)``; the value is parsed as JSON when possible."""
    if "=" not in item:
        raise ConfigurationError(f"override {item!r} is not KEY=VALUE")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def apply_overrides(d: dict, overrides: Iterable[str]) -> dict:
    for item in overrides:
        path, value = parse_override(item)
        node = d
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigurationError(f"cannot set {'.'.join(path)}: {part} is not an object",
                                         key=part)
        node[path[-1]] = value
    return d


def load_config(path=None, overrides: Iterable[str] = (), environ=None) -> ScenarioConfig:
    """Parse, override and validate a scenario config.

    ``master_seed`` precedence: ``--set`` override, then ``MMBEAM_SEED``, then
    the file.
    """
    environ = os.environ if environ is None else environ
    overrides = list(overrides)
    text = ""
    data = {}
    source = "<defaults>"
    if path is not None:
        resolved = resolve_config_path(path)
        source = str(path)
        text = resolved.read_text(encoding="utf-8")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigFileError(source, exc.lineno, exc.msg) from exc
        if not isinstance(data, dict):
            raise ConfigFileError(source, 1, "top level must be a JSON object")
    data.pop("_comment", None)

    seed_overridden = any(parse_override(o)[0] == ["master_seed"] for o in overrides)
    if not seed_overridden and environ.get(SEED_ENV):
        try:
            data["master_seed"] = int(environ[SEED_ENV])
        except ValueError as exc:
            raise ConfigurationError(f"{SEED_ENV} must be an integer") from exc
    try:
        apply_overrides(data, overrides)
        return ScenarioConfig.from_dict(data)
    except ConfigFileError:
        raise
    except ConfigurationError as exc:
        raise ConfigFileError(source, _key_line(text, exc.key), str(exc)) from exc
