"""Run configuration: flat section/key=value text, strictly validated.

Precedence: built-in defaults < config file < CVMDI_<SECTION>_<KEY>
environment variables < --set section.key=value overrides.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

from .protocol import ChannelParams, DetectorParams, Scenario

ENV_PREFIX = "CVMDI_"

_SCHEMA = {
    "scenario": {
        "v_a": float, "v_b": float,
        "l_ac_km": float, "l_bc_km": float,
        "attenuation_db_per_km": float,
        "eps_a": float, "eps_b": float,
        "beta_r": float,
        "eta_d": float, "v_el": float,
        "gain_mode": str, "gain": float,
    },
    "sweep": {
        "l_min_km": float, "l_max_km": float, "points": int,
        "l_bc_values_km": str,
    },
    "mc": {"n": int, "seed": int},
    "output": {"path": str},
}

_DEFAULTS = {
    "scenario": {
        "v_a": 40.0, "v_b": 40.0,
        "l_ac_km": 0.0, "l_bc_km": 0.0,
        "attenuation_db_per_km": 0.2,
        "eps_a": 0.002, "eps_b": 0.002,
        "beta_r": 1.0,
        "eta_d": 1.0, "v_el": 0.0,
        "gain_mode": "optimal", "gain": None,
    },
    "sweep": {
        "l_min_km": 0.0, "l_max_km": 10.0, "points": 51,
        "l_bc_values_km": "0,1,3",
    },
    "mc": {"n": 100_000, "seed": 12345},
    "output": {"path": ""},
}


class ConfigError(ValueError):
    """Invalid, unknown, or out-of-range configuration entry."""


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, section: str) -> dict:
        return self.values[section]

    def scenario(self) -> Scenario:
        s = self.values["scenario"]
        try:
            return Scenario(
                v_a=s["v_a"], v_b=s["v_b"],
                channel_a=ChannelParams(s["l_ac_km"], s["attenuation_db_per_km"], s["eps_a"]),
                channel_b=ChannelParams(s["l_bc_km"], s["attenuation_db_per_km"], s["eps_b"]),
                beta_r=s["beta_r"],
                detector=DetectorParams(s["eta_d"], s["v_el"]),
                gain_mode=s["gain_mode"],
                gain=s["gain"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def l_bc_values(self) -> list[float]:
        raw = self.values["sweep"]["l_bc_values_km"]
        try:
            return [float(tok) for tok in str(raw).split(",") if tok.strip() != ""]
        except ValueError as exc:
            raise ConfigError(f"sweep.l_bc_values_km: {exc}") from exc

    def effective_lines(self) -> list[str]:
        """Config block that re-parses to an equivalent RunConfig."""
        lines = []
        for section in _SCHEMA:
            lines.append(f"[{section}]")
            for key, val in self.values[section].items():
                if val is None:
                    continue
                lines.append(f"{key} = {val!r}" if isinstance(val, float) else f"{key} = {val}")
        return lines


def _convert(section: str, key: str, raw, where: str):
    if section not in _SCHEMA:
        raise ConfigError(f"unknown section [{section}] ({where})")
    if key not in _SCHEMA[section]:
        raise ConfigError(f"unknown key {section}.{key} ({where})")
    typ = _SCHEMA[section][key]
    if isinstance(raw, typ):
        return raw
    try:
        return typ(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r} as {typ.__name__} ({where})") from exc


def load_config(path: str | None = None, overrides: list[str] | None = None,
                environ: dict | None = None) -> RunConfig:
    values = {sec: dict(d) for sec, d in _DEFAULTS.items()}

    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
        for section in parser.sections():
            for key, raw in parser.items(section):
                # RHS raises ConfigError for unknown sections/keys
                values[section][key] = _convert(section, key, raw, f"file {path}")

    environ = os.environ if environ is None else environ
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        rest = name[len(ENV_PREFIX):].lower()
        for section in _SCHEMA:
            if rest.startswith(section + "_"):
                key = rest[len(section) + 1:]
                values[section][key] = _convert(section, key, raw, f"env {name}")
                break
        else:
            raise ConfigError(f"unrecognized environment override {name}")

    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        target, raw = item.split("=", 1)
        section, key = target.split(".", 1)
        values[section.strip()][key.strip()] = _convert(section.strip(), key.strip(), raw.strip(), "--set")

    cfg = RunConfig(values)
    cfg.scenario()  # validate ranges now, before any computation
    if values["sweep"]["points"] < 1:
        raise ConfigError("sweep.points must be >= 1")
    if values["sweep"]["l_min_km"] < 0 or values["sweep"]["l_max_km"] < values["sweep"]["l_min_km"]:
        raise ConfigError("sweep grid must satisfy 0 <= l_min_km <= l_max_km")
    if values["mc"]["n"] < 1:
        raise ConfigError("mc.n must be >= 1")
    return cfg


def parse_effective_lines(lines: list[str]) -> RunConfig:
    """Re-parse a config block produced by RunConfig.effective_lines."""
    parser = configparser.ConfigParser()
    parser.read_string("\n".join(lines))
    values = {sec: dict(d) for sec, d in _DEFAULTS.items()}
    for section in parser.sections():
        for key, raw in parser.items(section):
            values[section][key] = _convert(section, key, raw, "effective-config block")
    return RunConfig(values)
