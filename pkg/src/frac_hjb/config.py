"""Structured flat config files (INI sections) for the study harness.

Sections and keys mirror the library surface: `grid`, `operator`,
`hamiltonian`, `solver`, `study`.  Unknown sections or keys are rejected
naming the offender.  A resolved config serializes back to canonical INI
text (fixed section and key order, shortest round-trip floats), which is
what reports embed and hash, so re-running from an embedded config
reproduces the report byte for byte.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import json
import math
from dataclasses import dataclass

__all__ = ["ConfigError", "ResolvedConfig", "load_config", "resolve_config", "DEFAULTS"]


class ConfigError(ValueError):
    """Configuration problem: maps to CLI exit code 1."""


DEFAULT_LADDER = [2.0**-k for k in range(3, 11)]

# section -> key -> default (None means optional with no default)
DEFAULTS: dict[str, dict] = {
    "grid": {"n": 512, "length": 2.0 * math.pi, "dim": 1},
    "operator": {"kind": "quadrature", "kappa": None},
    "hamiltonian": {"kind": "eikonal", "lambda": 0.0, "a": 1.0, "b": "zero", "f": "zero"},
    "solver": {"epsilon": 0.5, "s": 1.0, "T": 0.5, "cfl": 0.9, "snapshots": "auto"},
    "study": {
        "kind": "property",
        "epsilon_ladder": DEFAULT_LADDER,
        "seed": 0,
        "initial_data": "triangle",
        "model": "auto",
        "pow_q": None,
        "times": [0.1, 0.2, 0.4],
        "pairs": 12,
        "ell_ladder": [0.01, 0.02, 0.04, 0.08],
        "eps_values": [0.1, 0.5, 1.0],
        "ratio_cap": 1.2,
        "slope_tol": 0.1,
        "min_ratio_gain": 1.15,
        "holder_alpha": 0.5,
        "excess_tol": 0.1,
        "refine_tol": 0.15,
    },
}

_SECTION_ORDER = ["grid", "operator", "hamiltonian", "solver", "study"]

_STR_KEYS = {
    ("operator", "kind"),
    ("hamiltonian", "kind"),
    ("hamiltonian", "b"),
    ("hamiltonian", "f"),
    ("solver", "snapshots"),
    ("study", "kind"),
    ("study", "initial_data"),
    ("study", "model"),
}
_INT_KEYS = {("grid", "n"), ("grid", "dim"), ("study", "seed"), ("study", "pairs")}
_LIST_KEYS = {
    ("solver", "snapshots"),
    ("study", "epsilon_ladder"),
    ("study", "times"),
    ("study", "ell_ladder"),
    ("study", "eps_values"),
}


@dataclass(frozen=True)
class ResolvedConfig:
    """Fully defaulted configuration with typed accessors."""

    data: dict

    def __getitem__(self, section: str) -> dict:
        return self.data[section]

    def to_ini_text(self) -> str:
        out = io.StringIO()
        for section in _SECTION_ORDER:
            out.write(f"[{section}]\n")
            for key in DEFAULTS[section]:
                value = self.data[section][key]
                if value is None:
                    continue
                out.write(f"{key} = {_format_value(value)}\n")
            out.write("\n")
        return out.getvalue()

    def to_dict(self) -> dict:
        return json.loads(json.dumps(self.data))

    def sha256(self) -> str:
        return hashlib.sha256(self.to_ini_text().encode()).hexdigest()


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, str)):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize config value {value!r}")


def _parse_value(section: str, key: str, raw: str):
    raw = raw.strip()
    if (section, key) in _LIST_KEYS and raw.startswith("["):
        try:
            parsed = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed list for {section}.{key}: {raw!r} ({exc})") from None
        if not isinstance(parsed, list):
            raise ConfigError(f"{section}.{key} must be a list, got {raw!r}")
        return [float(v) for v in parsed]
    if (section, key) in _STR_KEYS:
        return raw
    if (section, key) in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{section}.{key} must be an integer, got {raw!r}") from None
    if raw.lower() in ("none", "default"):
        return None
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key} must be a number, got {raw!r}") from None


def resolve_config(overrides: dict | None = None) -> ResolvedConfig:
    """Merge (already typed) overrides onto the defaults, rejecting unknown keys."""
    data = {section: dict(keys) for section, keys in DEFAULTS.items()}
    for section, keys in (overrides or {}).items():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section: {section}")
        for key, value in keys.items():
            if key not in DEFAULTS[section]:
                raise ConfigError(f"unknown config key: {section}.{key}")
            data[section][key] = value
    return ResolvedConfig(data)


def load_config(path) -> ResolvedConfig:
    """Read an INI config file, validate every key, and apply defaults."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case: solver.T is not solver.t
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from None

    overrides: dict[str, dict] = {}
    for section in parser.sections():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section: {section}")
        overrides[section] = {}
        for key, raw in parser.items(section):
            if key not in DEFAULTS[section]:
                raise ConfigError(f"unknown config key: {section}.{key}")
            overrides[section][key] = _parse_value(section, key, raw)
    return resolve_config(overrides)
