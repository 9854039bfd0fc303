"""Experiment configuration: JSON ingestion with strict validation.

One JSON document per experiment.  Lengths are meters, rates 1/m, powers
dBm.  Unknown keys are rejected so typos cannot silently fall back to
defaults.  Fields the reference scenario leaves open (wall distance l,
obstacle rate gamma2, probe position x) have package defaults; when a run
relies on them they are flagged in the output metadata.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields

from .street import ExpoEnvParams, StreetGeometry
from .sinr import RadioParams

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "config_sha256"]

# Values used for quantities the source setting does not pin down (l, gamma2,
# x), plus the reference-regime values (rho, gamma1) as overall defaults.
DEFAULT_L = 10.0
DEFAULT_GAMMA2 = 0.5
DEFAULT_X = 10.0
DEFAULT_RHO = 20.0
DEFAULT_GAMMA1 = 0.5


class ConfigError(ValueError):
    """Invalid or unknown configuration content."""


@dataclass(frozen=True)
class McSettings:
    n_trials: int = 100_000
    seed: int = 0
    window_t: float | None = None
    threads: int = 1
    chunk_size: int = 1024

    def __post_init__(self):
        if self.n_trials < 0:
            raise ConfigError(f"mc.n_trials must be >= 0, got {self.n_trials}")
        if self.threads < 1:
            raise ConfigError(f"mc.threads must be >= 1, got {self.threads}")
        if self.chunk_size < 1:
            raise ConfigError(f"mc.chunk_size must be >= 1, got {self.chunk_size}")
        if self.window_t is not None and self.window_t <= 0:
            raise ConfigError(f"mc.window_t must be > 0, got {self.window_t}")


@dataclass(frozen=True)
class SinrSettings:
    x: float = DEFAULT_X
    theta_grid: tuple[float, ...] = (0.1, 0.5, 1.0, 5.0, 10.0, 25.0)
    n_trials_h0: int = 200_000
    n_configs_dependent: int = 50_000
    use_thinned_intensity: bool = False
    resample_phi: bool = False

    def __post_init__(self):
        if not self.theta_grid:
            raise ConfigError("sinr.theta_grid must not be empty")
        if any(t <= 0 for t in self.theta_grid):
            raise ConfigError("sinr.theta_grid entries must be > 0")
        if self.n_trials_h0 < 1 or self.n_configs_dependent < 1:
            raise ConfigError("sinr trial counts must be >= 1")


@dataclass(frozen=True)
class SweepSettings:
    variable: str = "alpha"
    grid: tuple[float, ...] = ()

    def __post_init__(self):
        if self.variable not in ("alpha",):
            raise ConfigError(f"unknown sweep variable {self.variable!r}")
        if not self.grid:
            raise ConfigError("sweep.grid must not be empty")
        if any(g <= 0 for g in self.grid):
            raise ConfigError("sweep.grid entries must be > 0")


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: StreetGeometry
    env: ExpoEnvParams
    radio: RadioParams
    mc: McSettings
    sinr: SinrSettings
    sweep: SweepSettings | None
    output: str | None
    include_gap0: bool
    defaults_used: tuple[str, ...]
    raw: dict


def _take(section: dict, name: str, keys: dict) -> dict:
    """Pop known keys from a section dict, rejecting leftovers."""
    out = {}
    for key, default in keys.items():
        if key in section:
            out[key] = section.pop(key)
        elif default is not ...:
            out[key] = default
        else:
            raise ConfigError(f"missing required key {name}.{key}")
    if section:
        raise ConfigError(f"unknown keys in {name}: {sorted(section)}")
    return out


def _build(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    doc = dict(doc)
    defaults_used: list[str] = []

    geo_raw = dict(doc.pop("geometry", {}))
    if "l" not in geo_raw:
        defaults_used.append(f"geometry.l={DEFAULT_L}")
    if "rho" in geo_raw and "d" in geo_raw:
        raise ConfigError("geometry: give either rho or d, not both")
    geo_kw = _take(geo_raw, "geometry",
                   {"l": DEFAULT_L, "d": None, "rho": None, "a": 0.0, "delta": 0.0})
    rho = geo_kw.pop("rho")
    d = geo_kw.pop("d")
    if rho is None and d is None:
        rho = DEFAULT_RHO
    try:
        if d is None:
            geometry = StreetGeometry.from_rho(rho, l=geo_kw["l"], a=geo_kw["a"],
                                               delta=geo_kw["delta"])
        else:
            geometry = StreetGeometry(l=geo_kw["l"], d=d, a=geo_kw["a"],
                                      delta=geo_kw["delta"])
    except ValueError as exc:
        raise ConfigError(f"geometry: {exc}") from exc

    env_raw = dict(doc.pop("env", {}))
    if "gamma2" not in env_raw:
        defaults_used.append(f"env.gamma2={DEFAULT_GAMMA2}")
    env_kw = _take(env_raw, "env",
                   {"gamma1": DEFAULT_GAMMA1, "gamma2": DEFAULT_GAMMA2})
    try:
        env = ExpoEnvParams(**env_kw)
    except ValueError as exc:
        raise ConfigError(f"env: {exc}") from exc

    radio_raw = dict(doc.pop("radio", {}))
    radio_kw = _take(radio_raw, "radio",
                     {"p_t_dbm": 20.0, "p_a_dbm": 20.0, "sigma2_dbm": -90.0,
                      "sigma_v2_dbm": -90.0, "n_elements": 100, "lambda": 0.2})
    try:
        radio = RadioParams(p_t_dbm=radio_kw["p_t_dbm"], p_a_dbm=radio_kw["p_a_dbm"],
                            sigma2_dbm=radio_kw["sigma2_dbm"],
                            sigma_v2_dbm=radio_kw["sigma_v2_dbm"],
                            n_elements=radio_kw["n_elements"],
                            intensity=radio_kw["lambda"])
    except ValueError as exc:
        raise ConfigError(f"radio: {exc}") from exc

    try:
        mc = McSettings(**_take(dict(doc.pop("mc", {})), "mc",
                                {f.name: getattr(McSettings, f.name)
                                 for f in fields(McSettings)}))
        sinr_section = dict(doc.pop("sinr", {}))
        if "x" not in sinr_section:
            defaults_used.append(f"sinr.x={DEFAULT_X}")
        sinr_raw = _take(sinr_section, "sinr",
                         {f.name: getattr(SinrSettings, f.name)
                          for f in fields(SinrSettings)})
        sinr_raw["theta_grid"] = tuple(sinr_raw["theta_grid"])
        sinr = SinrSettings(**sinr_raw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    sweep = None
    if "sweep" in doc:
        sweep_raw = _take(dict(doc.pop("sweep")), "sweep",
                          {"variable": "alpha", "grid": ...})
        sweep = SweepSettings(variable=sweep_raw["variable"],
                              grid=tuple(sweep_raw["grid"]))

    output = doc.pop("output", None)
    include_gap0 = doc.pop("include_gap0", True)
    if not isinstance(include_gap0, bool):
        raise ConfigError("include_gap0 must be a boolean")
    if doc:
        raise ConfigError(f"unknown top-level keys: {sorted(doc)}")

    return ExperimentConfig(geometry=geometry, env=env, radio=radio, mc=mc,
                            sinr=sinr, sweep=sweep, output=output,
                            include_gap0=include_gap0,
                            defaults_used=tuple(defaults_used), raw={})


def load_config(path: str | None, text: str | None = None) -> ExperimentConfig:
    """Parse an experiment config from a file path or a JSON string."""
    if text is None:
        if path is None:
            doc = {}
        else:
            try:
                with open(path) as fh:
                    doc = json.load(fh)
            except FileNotFoundError as exc:
                raise ConfigError(f"config file not found: {path}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    raw = json.loads(json.dumps(doc))
    cfg = _build(doc)
    object.__setattr__(cfg, "raw", raw)
    return cfg


def config_sha256(cfg: ExperimentConfig, overrides: dict | None = None) -> str:
    """Stable hash of the resolved configuration (for output provenance)."""
    payload = {
        "geometry": {"l": cfg.geometry.l, "d": cfg.geometry.d,
                     "a": cfg.geometry.a, "delta": cfg.geometry.delta},
        "env": {"gamma1": cfg.env.gamma1, "gamma2": cfg.env.gamma2},
        "radio": {"p_t_dbm": cfg.radio.p_t_dbm, "p_a_dbm": cfg.radio.p_a_dbm,
                  "sigma2_dbm": cfg.radio.sigma2_dbm,
                  "sigma_v2_dbm": cfg.radio.sigma_v2_dbm,
                  "n_elements": cfg.radio.n_elements,
                  "lambda": cfg.radio.intensity},
        "mc": {"n_trials": cfg.mc.n_trials, "seed": cfg.mc.seed,
               "window_t": cfg.mc.window_t, "chunk_size": cfg.mc.chunk_size},
        "sinr": {"x": cfg.sinr.x, "theta_grid": list(cfg.sinr.theta_grid),
                 "n_trials_h0": cfg.sinr.n_trials_h0,
                 "n_configs_dependent": cfg.sinr.n_configs_dependent,
                 "use_thinned_intensity": cfg.sinr.use_thinned_intensity,
                 "resample_phi": cfg.sinr.resample_phi},
        "sweep": None if cfg.sweep is None else
                 {"variable": cfg.sweep.variable, "grid": list(cfg.sweep.grid)},
        "include_gap0": cfg.include_gap0,
    }
    if overrides:
        payload["overrides"] = overrides
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()
