"""Flat key=value run configuration files.

One assignment per line, # starts a comment, blank lines ignored. Section
membership is by key prefix (sim.step, noise.epsilon), not by bracketed
headers, so a file parses to a single flat dict of strings.
"""

from __future__ import annotations

from .errors import ConfigError

_MISSING = object()


def load_config(path) -> dict:
    entries = {}
    try:
        with open(path, encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, start=1):
                stripped = line.split("#", 1)[0].strip()
                if not stripped:
                    continue
                if "=" not in stripped:
                    raise ConfigError(f"{path}:{line_number}: expected key=value")
                key, _, value = stripped.partition("=")
                key = key.strip()
                if not key:
                    raise ConfigError(f"{path}:{line_number}: empty key")
                if key in entries:
                    raise ConfigError(f"{path}:{line_number}: duplicate key {key}")
                entries[key] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return entries


def _fetch(entries: dict, key: str, default):
    if key in entries:
        return entries[key]
    if default is _MISSING:
        raise ConfigError(f"missing required config key {key}")
    return default


def get_str(entries: dict, key: str, default=_MISSING):
    return _fetch(entries, key, default)


def get_int(entries: dict, key: str, default=_MISSING):
    value = _fetch(entries, key, default)
    if value is default and key not in entries:
        return default
    try:
        return int(str(value))
    except ValueError:
        raise ConfigError(f"config key {key} is not an integer: {value!r}") from None


def get_float(entries: dict, key: str, default=_MISSING):
    value = _fetch(entries, key, default)
    if value is default and key not in entries:
        return default
    try:
        return float(str(value))
    except ValueError:
        raise ConfigError(f"config key {key} is not a number: {value!r}") from None


def get_floats(entries: dict, key: str, default=_MISSING):
    """Comma-separated float list."""
    value = _fetch(entries, key, default)
    if value is default and key not in entries:
        return default
    try:
        return [float(part) for part in str(value).split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"config key {key} is not a number list: {value!r}") from None


def get_ints(entries: dict, key: str, default=_MISSING):
    """Comma-separated integer list."""
    value = _fetch(entries, key, default)
    if value is default and key not in entries:
        return default
    try:
        return [int(part) for part in str(value).split(",") if part.strip()]
    except ValueError:
        raise ConfigError(
            f"config key {key} is not an integer list: {value!r}"
        ) from None
