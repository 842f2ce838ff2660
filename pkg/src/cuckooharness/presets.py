"""Reads default and user defined experiment presets."""
import os
from pathlib import Path
from typing import TypeAlias, cast

import tomllib

dir_path = Path(os.path.realpath(__file__)).parent

default_presets_path = dir_path / "default_presets.toml"
user_presets_path = dir_path / "user_presets.toml"

Value: TypeAlias = int | float | str | list[int] | list[float]
Bases: TypeAlias = list[str]

Preset: TypeAlias = dict[str, Value | Bases]
Presets: TypeAlias = dict[str, Preset]


def read_presets() -> Presets:
    return _read_preset(default_presets_path) | _read_preset(user_presets_path)


def resolve_preset(name: str, presets: Presets | None = None) -> dict[str, Value]:
    """Flattens a preset: its bases in order, then its own values on top."""
    presets = read_presets() if presets is None else presets
    if name not in presets:
        msg = f"unknown preset {name!r}, choose one of {sorted(presets)}"
        raise ValueError(msg)

    preset = presets[name]
    resolved: dict[str, Value] = {}
    for base in cast(Bases, preset.get("bases", [])):
        resolved |= resolve_preset(base, presets)

    resolved |= {key: cast(Value, value) for key, value in preset.items() if key != "bases"}

    return resolved


def _read_preset(file_path: Path) -> Presets:
    try:
        with Path.open(file_path, "rb") as file:
            presets = tomllib.load(file)
    except FileNotFoundError:
        return {}

    return presets.get("presets", {})
