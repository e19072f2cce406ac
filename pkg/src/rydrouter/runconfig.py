"""Flat ``key = value`` run-configuration files with unit suffixes.

Dimensioned keys require an explicit unit (e.g. ``ts_max = 8 us``,
``temperature = 66.9 uK``, ``rabi = 0.88 MHz``); dimensionless keys reject
one.  ``#`` starts a comment.  Parsed values land in the field names and
units of the simulate request schema.
"""

from __future__ import annotations

from pathlib import Path

__all__ = ["ConfigError", "parse_assignment", "parse_config_file", "parse_overrides"]


class ConfigError(ValueError):
    """A configuration line failed to parse or validate."""


_TIME_TO_US = {"ns": 1e-3, "us": 1.0, "ms": 1e3, "s": 1e6}
_LENGTH_TO_UM = {"nm": 1e-3, "um": 1.0, "mm": 1e3, "m": 1e6}
_TEMP_TO_UK = {"nK": 1e-3, "uK": 1.0, "mK": 1e3, "K": 1e6}
_FREQ_TO_MHZ = {"Hz": 1e-6, "kHz": 1e-3, "MHz": 1.0, "GHz": 1e3}
_RATE_TO_HZ = {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6}
_ACCEL = {"m/s2": 1.0, "m/s^2": 1.0}

_UNIT_TABLES = {
    "time": _TIME_TO_US,
    "length": _LENGTH_TO_UM,
    "temp": _TEMP_TO_UK,
    "freq": _FREQ_TO_MHZ,
    "rate": _RATE_TO_HZ,
    "accel": _ACCEL,
}

_BOOL_WORDS = {
    "on": True,
    "true": True,
    "yes": True,
    "1": True,
    "off": False,
    "false": False,
    "no": False,
    "0": False,
}

# config key -> (request field, kind)
_KEYS: dict[str, tuple[str, str]] = {
    "sweep": ("sweep", "choice:storage,duration"),
    "case": ("case", "int"),
    "n1": ("n1", "int"),
    "n2": ("n2", "int"),
    "protocol": ("protocol", "bool"),
    "retrieval": ("retrieval", "choice:matched,wrong"),
    "atom_count": ("atom_count", "int"),
    "repetitions": ("repetitions", "int"),
    "seed": ("seed", "int"),
    "workers": ("workers", "int"),
    "temperature": ("temperature_uk", "temp"),
    "cloud_sigma_z": ("cloud_sigma_z_um", "length"),
    "cloud_sigma_xy": ("cloud_sigma_xy_um", "length"),
    "gravity": ("gravity_m_s2", "accel"),
    "omega3": ("omega3_mhz", "freq"),
    "omega4": ("omega4_mhz", "freq"),
    "detuning": ("detuning_mhz", "freq"),
    "rabi": ("rabi_mhz", "freq"),
    "ts": ("ts_us", "time"),
    "ts_min": ("ts_min_us", "time"),
    "ts_max": ("ts_max_us", "time"),
    "ts_points": ("ts_points", "int"),
    "tr_min": ("tr_min_us", "time"),
    "tr_max": ("tr_max_us", "time"),
    "tr_points": ("tr_points", "int"),
    "tau_r1": ("tau_r1_us", "time"),
    "tau_r2": ("tau_r2_us", "time"),
    "scatter_probability": ("scatter_probability", "float"),
    "extra_dephasing_rate": ("extra_dephasing_rate_hz", "rate"),
}


def _parse_number(token: str, where: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ConfigError(f"{where}: {token!r} is not a number") from None


def parse_assignment(text: str, where: str = "override") -> tuple[str, object]:
    """Parse one ``key = value`` assignment into (request field, value)."""
    if "=" not in text:
        raise ConfigError(f"{where}: expected 'key = value', got {text!r}")
    key, _, raw_value = text.partition("=")
    key = key.strip()
    tokens = raw_value.split("#", 1)[0].split()
    if key not in _KEYS:
        known = ", ".join(sorted(_KEYS))
        raise ConfigError(f"{where}: unknown key {key!r} (known keys: {known})")
    if not tokens:
        raise ConfigError(f"{where}: key {key!r} has no value")
    field, kind = _KEYS[key]

    if kind == "int":
        if len(tokens) != 1:
            raise ConfigError(f"{where}: {key!r} takes a bare integer")
        number = _parse_number(tokens[0], where)
        if number != int(number):
            raise ConfigError(f"{where}: {key!r} must be an integer")
        return field, int(number)
    if kind == "float":
        if len(tokens) != 1:
            raise ConfigError(f"{where}: {key!r} takes a bare number, no unit")
        return field, _parse_number(tokens[0], where)
    if kind == "bool":
        if len(tokens) != 1 or tokens[0].lower() not in _BOOL_WORDS:
            raise ConfigError(f"{where}: {key!r} must be one of on/off/true/false")
        return field, _BOOL_WORDS[tokens[0].lower()]
    if kind.startswith("choice:"):
        choices = kind.split(":", 1)[1].split(",")
        if len(tokens) != 1 or tokens[0] not in choices:
            raise ConfigError(f"{where}: {key!r} must be one of {'/'.join(choices)}")
        return field, tokens[0]

    table = _UNIT_TABLES[kind]
    if len(tokens) != 2:
        raise ConfigError(
            f"{where}: {key!r} needs a value with a unit "
            f"({'/'.join(table)}), e.g. '{key} = 1 {next(iter(table))}'"
        )
    number = _parse_number(tokens[0], where)
    unit = tokens[1]
    if unit not in table:
        raise ConfigError(
            f"{where}: bad unit {unit!r} for {key!r} (expected {'/'.join(table)})"
        )
    return field, number * table[unit]


def parse_config_file(path: str | Path) -> dict[str, object]:
    """Parse a run-configuration file into simulate-request fields."""
    src = Path(path)
    if not src.is_file():
        raise ConfigError(f"config file not found: {src}")
    fields: dict[str, object] = {}
    seen: set[str] = set()
    for lineno, raw in enumerate(src.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{src}:{lineno}"
        key = line.partition("=")[0].strip()
        if key in seen:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        seen.add(key)
        field, value = parse_assignment(line, where)
        fields[field] = value
    return fields


def parse_overrides(items: list[str]) -> dict[str, object]:
    """Parse repeated ``--set key=value`` overrides."""
    fields: dict[str, object] = {}
    for item in items:
        field, value = parse_assignment(item, f"--set {item!r}")
        fields[field] = value
    return fields
