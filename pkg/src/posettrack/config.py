"""Flat ``key = value`` config files shared by gates, filter and scenario settings.

Blank lines and ``#`` comments are ignored; ``:`` is accepted in place of
``=``.  Values stay strings here; consumers convert them.
"""

from __future__ import annotations

from pathlib import Path

from .model import ValidationError


def parse_config(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, value = line.split(sep, 1)
                break
        else:
            raise ValidationError(f"config line {lineno}: expected key = value, got {raw!r}")
        key = key.strip()
        if not key:
            raise ValidationError(f"config line {lineno}: empty key")
        out[key] = value.strip()
    return out


def read_config(path) -> dict[str, str]:
    return parse_config(Path(path).read_text())


def get_float(cfg: dict[str, str], key: str, default=None) -> float:
    if key not in cfg:
        if default is None:
            raise ValidationError(f"config is missing required key {key!r}")
        return float(default)
    try:
        return float(cfg[key])
    except ValueError:
        raise ValidationError(f"config key {key!r}: not a number: {cfg[key]!r}") from None


def get_floats(cfg: dict[str, str], key: str, default=None) -> tuple[float, ...]:
    if key not in cfg:
        if default is None:
            raise ValidationError(f"config is missing required key {key!r}")
        return tuple(float(v) for v in default)
    try:
        return tuple(float(v) for v in cfg[key].replace(",", " ").split())
    except ValueError:
        raise ValidationError(f"config key {key!r}: not a list of numbers: {cfg[key]!r}") from None
