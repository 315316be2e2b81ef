"""YAML configuration for experiment sweeps.

The file is one mapping; unknown keys are rejected so typos fail loudly.
All keys are optional except ``strategies``.  ``snr_db`` takes either an
explicit list or {start, stop, step} (inclusive stop).  Strategy entries
are either a name string or a mapping with ``name`` plus optional
``coop_sets`` ({user: [helpers]}) and ``multihop_mode``.
"""

from __future__ import annotations

import math

import yaml

from .harness import ExperimentConfig
from .network import GeometryParams
from .power import PowerConfig
from .strategies import Strategy, parse_strategy

__all__ = ["ConfigError", "load_config", "config_from_dict"]


class ConfigError(ValueError):
    """Invalid or malformed experiment configuration."""


_TOP_KEYS = {
    "seed",
    "workers",
    "placements",
    "snr_db",
    "target_events",
    "trial_ceiling",
    "x_axis",
    "per_user_rows",
    "bounds_only",
    "output",
    "geometry",
    "power",
    "bounds",
    "strategies",
}
_GEOMETRY_KEYS = {
    "num_users",
    "sector_radius",
    "sector_angle_deg",
    "exclusion_radius",
    "relay",
    "destination",
    "path_loss_exponent",
}
_POWER_KEYS = {
    "rate",
    "relay_factor",
    "encode_factor",
    "decode_factor",
    "overhead_power",
}
_BOUNDS_KEYS = {"theta_star", "optimize"}


def _check_keys(section: dict, allowed: set, where: str):
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"unknown {where} keys: {unknown}")


def _snr_grid(raw) -> tuple[float, ...]:
    if isinstance(raw, dict):
        _check_keys(raw, {"start", "stop", "step"}, "snr_db")
        try:
            start, stop, step = float(raw["start"]), float(raw["stop"]), float(raw["step"])
        except KeyError as exc:
            raise ConfigError(f"snr_db range needs start/stop/step: missing {exc}") from exc
        if step <= 0 or stop < start:
            raise ConfigError("snr_db range needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + i * step for i in range(count))
    if isinstance(raw, (list, tuple)):
        return tuple(float(x) for x in raw)
    raise ConfigError("snr_db must be a list or a start/stop/step mapping")


def _geometry(raw: dict) -> GeometryParams:
    _check_keys(raw, _GEOMETRY_KEYS, "geometry")
    kwargs = {}
    if "num_users" in raw:
        kwargs["num_users"] = int(raw["num_users"])
    if "sector_radius" in raw:
        kwargs["sector_radius"] = float(raw["sector_radius"])
    if "sector_angle_deg" in raw:
        kwargs["sector_angle"] = math.radians(float(raw["sector_angle_deg"]))
    if "exclusion_radius" in raw:
        kwargs["exclusion_radius"] = float(raw["exclusion_radius"])
    if "relay" in raw:
        kwargs["relay_position"] = tuple(float(x) for x in raw["relay"])
    if "destination" in raw:
        kwargs["destination_position"] = tuple(float(x) for x in raw["destination"])
    if "path_loss_exponent" in raw:
        kwargs["path_loss_exponent"] = float(raw["path_loss_exponent"])
    return GeometryParams(**kwargs)


def _power(raw: dict) -> PowerConfig:
    _check_keys(raw, _POWER_KEYS, "power")
    return PowerConfig(
        user_power=1.0,
        rate=float(raw.get("rate", 0.25)),
        relay_power_factor=float(raw.get("relay_factor", 0.5)),
        encode_factor=float(raw.get("encode_factor", 0.0)),
        decode_factor=float(raw.get("decode_factor", 0.0)),
        overhead_power=float(raw.get("overhead_power", 0.0)),
    )


def _coop_sets(raw, num_users: int):
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ConfigError("coop_sets must map user -> helper list")
    out = []
    for k in range(1, num_users + 1):
        if k not in raw:
            raise ConfigError(f"coop_sets missing user {k}")
        out.append(tuple(int(j) for j in raw[k]))
    return tuple(out)


def _strategy(entry, num_users: int) -> Strategy:
    if isinstance(entry, str):
        return parse_strategy(entry, num_users)
    if not isinstance(entry, dict) or "name" not in entry:
        raise ConfigError("strategy entries must be a name or a mapping with 'name'")
    _check_keys(entry, {"name", "coop_sets", "multihop_mode"}, "strategy")
    return parse_strategy(
        entry["name"],
        num_users,
        coop_sets=_coop_sets(entry.get("coop_sets"), num_users),
        multihop_mode=entry.get("multihop_mode", "accumulating"),
    )


def config_from_dict(raw: dict, **overrides) -> ExperimentConfig:
    """Build a validated ExperimentConfig; overrides replace file values.

    Supported overrides: seed, workers, snr_db, target_events,
    trial_ceiling, output, strategies (list of names), bounds_only,
    per_user_rows.
    """
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a mapping")
    _check_keys(raw, _TOP_KEYS, "top-level")
    merged = dict(raw)
    for key, val in overrides.items():
        if val is not None:
            merged[key] = val
    if "strategies" not in merged:
        raise ConfigError("configuration must list at least one strategy")
    geometry = _geometry(merged.get("geometry", {}) or {})
    power = _power(merged.get("power", {}) or {})
    bounds = merged.get("bounds", {}) or {}
    _check_keys(bounds, _BOUNDS_KEYS, "bounds")
    strategies = tuple(
        _strategy(e, geometry.num_users) for e in merged["strategies"]
    )
    if len({s.name for s in strategies}) != len(strategies):
        raise ConfigError("duplicate strategy names")
    try:
        return ExperimentConfig(
            geometry=geometry,
            power=power,
            strategies=strategies,
            snr_db=_snr_grid(merged.get("snr_db", [0.0])),
            num_placements=int(merged.get("placements", 100)),
            master_seed=int(merged.get("seed", 0)),
            target_events=int(merged.get("target_events", 100)),
            trial_ceiling=int(merged.get("trial_ceiling", 10_000_000)),
            workers=int(merged.get("workers", 1)),
            x_axis=str(merged.get("x_axis", "transmit-snr")),
            output_path=merged.get("output"),
            per_user_rows=bool(merged.get("per_user_rows", False)),
            theta_star=float(bounds.get("theta_star", 0.5)),
            optimize_bounds=bool(bounds.get("optimize", False)),
            bounds_only=bool(merged.get("bounds_only", False)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str, **overrides) -> ExperimentConfig:
    """Parse a YAML config file into an ExperimentConfig."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return config_from_dict(raw if raw is not None else {}, **overrides)
