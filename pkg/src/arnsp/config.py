"""Experiment configuration: defaults, YAML file loading, flag overrides, validation.

Angles are in degrees here and converted to radians by the experiment code.
A config file is a flat YAML mapping whose keys are the field names of
:class:`ExperimentConfig`; hyphens and underscores are interchangeable.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

EXPERIMENTS = ("estimate", "snr-est", "rmse-vs-snr", "sweep-ber", "sweep-sr", "sweep-rho", "eye-pattern")
MODES = ("full", "synthetic")

# experiment-specific defaults applied when the user leaves a field unset
_DEFAULT_MODE = {"sweep-rho": "full"}
_DEFAULT_TRIALS = {
    "estimate": 1,
    "snr-est": 500,
    "rmse-vs-snr": 500,
    "sweep-ber": 200,
    "sweep-sr": 200,
    "sweep-rho": 200,
    "eye-pattern": 50,
}

# fields that do not influence results and stay out of the CSV header
RUNTIME_ONLY = ("out", "workers")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "estimate"
    # array
    n_antennas: int = 16
    spacing: float = 0.5
    # scenario
    theta_b_deg: float = 45.0
    theta_e_deg: float = -30.0
    total_power_dbm: float = 30.0
    beta1_sq: float = 0.9
    beta2_sq: float = 0.1
    snr_db: float = 10.0
    uplink_snr_db: float | None = None
    eve_snr_offset_db: float = 0.0
    snapshots: int = 100
    # design
    rho: float = 1.0
    fixed_delta_deg: float = 1.0
    delta_cap_deg: float = 10.0
    max_angle_deg: float = 80.0
    mode: str | None = None
    # sweeps
    snr_grid_db: list = field(default_factory=lambda: [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0])
    n_grid: list = field(default_factory=lambda: [8, 16, 32])
    interval_grid_deg: list = field(default_factory=lambda: [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
    rho_grid: list = field(default_factory=lambda: [0.25, 0.5, 1.0, 1.5, 2.0, 3.0])
    interval_deg: float = 4.0
    angle_step_deg: float = 1.0
    eye_symbols: int = 1000
    symbols_per_trial: int = 1000
    # execution
    trials: int | None = None
    seed: int = 0
    workers: int | None = None
    out: str | None = None

    def resolved(self) -> "ExperimentConfig":
        """Copy with experiment-dependent defaults filled in, then validated."""
        cfg = dataclasses.replace(self)
        if cfg.mode is None:
            cfg.mode = _DEFAULT_MODE.get(cfg.experiment, "synthetic")
        if cfg.trials is None:
            cfg.trials = _DEFAULT_TRIALS.get(cfg.experiment, 100)
        if cfg.uplink_snr_db is None:
            cfg.uplink_snr_db = cfg.snr_db
        validate(cfg)
        return cfg

    def echo(self, runtime: bool = False) -> list[str]:
        """``key = value`` lines for every field, sorted by declaration order."""
        lines = []
        for f in dataclasses.fields(self):
            if not runtime and f.name in RUNTIME_ONLY:
                continue
            lines.append(f"{f.name} = {_fmt(getattr(self, f.name))}")
        return lines


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_INT_FIELDS = {"n_antennas", "snapshots", "eye_symbols", "symbols_per_trial", "trials", "seed", "workers"}
_LIST_FIELDS = {"snr_grid_db": float, "n_grid": int, "interval_grid_deg": float, "rho_grid": float}
_STR_FIELDS = {"experiment", "mode", "out"}


def _coerce(key: str, value):
    if value is None:
        return None
    try:
        if key in _LIST_FIELDS:
            if isinstance(value, str):
                value = [x for x in value.replace(",", " ").split() if x]
            if not isinstance(value, (list, tuple)):
                value = [value]
            return [_LIST_FIELDS[key](x) for x in value]
        if key in _INT_FIELDS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if key in _STR_FIELDS:
            return str(value)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot interpret {value!r}") from None


def _normalize_key(key: str) -> str:
    k = str(key).strip().replace("-", "_")
    if k not in _FIELDS:
        raise ConfigError(f"unknown config key '{key}'")
    return k


def load_file(path) -> dict:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: malformed config ({e})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a key-value mapping")
    return data


def parse_config(file=None, **overrides) -> ExperimentConfig:
    """Build a resolved config from defaults, an optional file, then overrides.

    Overrides whose value is ``None`` are ignored, so unset CLI flags never
    mask file values.
    """
    values: dict = {}
    if file is not None:
        for k, v in load_file(file).items():
            values[_normalize_key(k)] = _coerce(_normalize_key(k), v)
    for k, v in overrides.items():
        if v is None:
            continue
        key = _normalize_key(k)
        values[key] = _coerce(key, v)
    return ExperimentConfig(**values).resolved()


def _require(cond: bool, key: str, msg: str):
    if not cond:
        raise ConfigError(f"{key}: {msg}")


def validate(cfg: ExperimentConfig) -> None:
    _require(cfg.experiment in EXPERIMENTS, "experiment", f"must be one of {', '.join(EXPERIMENTS)}")
    _require(cfg.mode in MODES, "mode", "must be 'full' or 'synthetic'")
    _require(cfg.n_antennas >= 3, "n_antennas", "need at least 3 antennas for two sources")
    _require(all(n >= 3 for n in cfg.n_grid) and cfg.n_grid, "n_grid", "entries must be >= 3")
    _require(0 < cfg.spacing <= 0.5, "spacing", "must lie in (0, 0.5] wavelengths")
    _require(0 < cfg.max_angle_deg < 90, "max_angle_deg", "must lie in (0, 90)")
    for key in ("theta_b_deg", "theta_e_deg"):
        v = getattr(cfg, key)
        _require(
            math.isfinite(v) and abs(v) < cfg.max_angle_deg,
            key,
            f"must lie in (-{cfg.max_angle_deg:g}, {cfg.max_angle_deg:g}) degrees",
        )
    _require(cfg.theta_b_deg != cfg.theta_e_deg, "theta_e_deg", "must differ from theta_b_deg")
    _require(cfg.beta1_sq >= 0 and cfg.beta2_sq >= 0, "beta1_sq", "power fractions must be >= 0")
    _require(
        abs(cfg.beta1_sq + cfg.beta2_sq - 1) <= 1e-9,
        "beta2_sq",
        f"beta1_sq + beta2_sq must equal 1 (got {cfg.beta1_sq:g} + {cfg.beta2_sq:g})",
    )
    _require(cfg.snapshots >= 1, "snapshots", "must be >= 1")
    _require(cfg.rho >= 0 and all(r >= 0 for r in cfg.rho_grid), "rho", "must be >= 0")
    _require(cfg.fixed_delta_deg >= 0, "fixed_delta_deg", "must be >= 0")
    _require(cfg.delta_cap_deg > 0, "delta_cap_deg", "must be > 0")
    _require(all(i >= 0 for i in cfg.interval_grid_deg), "interval_grid_deg", "must be >= 0")
    _require(cfg.interval_deg >= 0, "interval_deg", "must be >= 0")
    _require(cfg.angle_step_deg > 0, "angle_step_deg", "must be > 0")
    _require(cfg.trials >= 1, "trials", "must be >= 1")
    _require(cfg.eye_symbols >= 1, "eye_symbols", "must be >= 1")
    _require(cfg.symbols_per_trial >= 1, "symbols_per_trial", "must be >= 1")
    _require(0 <= cfg.seed < 2**64, "seed", "must be an unsigned 64-bit integer")
    _require(cfg.workers is None or cfg.workers >= 1, "workers", "must be >= 1")
    for v in (cfg.snr_db, cfg.uplink_snr_db, cfg.total_power_dbm, *cfg.snr_grid_db):
        _require(math.isfinite(v), "snr_db", "must be finite")
