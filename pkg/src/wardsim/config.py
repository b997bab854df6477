"""Experiment configuration: JSON schema, defaults and validation.

Keys in JSON files are camelCase; every key is optional and falls back to
the documented default::

    {
      "doctors": {"senior": 2, "junior": 2},
      "robots": {"humanlike": 0, "robotlike": 0, "hHumanlike": 0.75, "hRobotlike": 0.25},
      "patients": 20, "beds": 20, "visitors": 20,
      "durationDays": 30, "seedBase": 0, "replications": 1,
      "effects": {"doctorSatGain": 0.1, ...},
      "fls": {"doctor": null, "robot": null, "visitorPropensity": null, "visitorDuration": null},
      "network": {"alphaPerHour": 0.05, "greenMax": 0.1, "yellowMax": 0.3},
      "schedule": {"windowStart": 840, "windowLength": 60, ...},
      "initial": {"mentalLow": 0.4, "mentalHigh": 0.8, ...}
    }
"""

from __future__ import annotations

import copy
import dataclasses
import hashlib
import json
import typing
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .agents import EffectParams, VISIT_WINDOW_MINUTES


class ConfigError(ValueError):
    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


@dataclass(frozen=True)
class DoctorMix:
    senior: int = 2
    junior: int = 2

    @property
    def total(self) -> int:
        return self.senior + self.junior


@dataclass(frozen=True)
class RobotMix:
    humanlike: int = 0
    robotlike: int = 0
    h_humanlike: float = 0.75
    h_robotlike: float = 0.25

    @property
    def total(self) -> int:
        return self.humanlike + self.robotlike


@dataclass(frozen=True)
class FlsPaths:
    """Paths to fuzzy system definitions; None selects the shipped default."""

    doctor: str | None = None
    robot: str | None = None
    visitor_propensity: str | None = None
    visitor_duration: str | None = None


@dataclass(frozen=True)
class NetworkParams:
    alpha_per_hour: float = 0.05
    green_max: float = 0.1
    yellow_max: float = 0.3


@dataclass(frozen=True)
class ScheduleParams:
    window_start: int = 14 * 60
    window_length: int = VISIT_WINDOW_MINUTES
    self_request_mean_hours: float = 8.0
    p_admit: float = 0.2
    trace_interval: int = 60
    prefer_doctors: bool = False


@dataclass(frozen=True)
class InitialParams:
    mental_low: float = 0.4
    mental_high: float = 0.8
    trust_robots: float = 0.5
    severity_low: float = 3.0
    severity_high: float = 8.0


@dataclass(frozen=True)
class ExperimentConfig:
    doctors: DoctorMix = field(default_factory=DoctorMix)
    robots: RobotMix = field(default_factory=RobotMix)
    patients: int = 20
    beds: int = 20
    visitors: int = 20
    duration_days: int = 30
    seed_base: int = 0
    replications: int = 1
    effects: EffectParams = field(default_factory=EffectParams)
    fls: FlsPaths = field(default_factory=FlsPaths)
    network: NetworkParams = field(default_factory=NetworkParams)
    schedule: ScheduleParams = field(default_factory=ScheduleParams)
    initial: InitialParams = field(default_factory=InitialParams)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        cfg = _build(cls, data, "")
        validate(cfg)
        return cfg

    def to_dict(self) -> dict:
        return _unbuild(self)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def camel(name: str) -> str:
    head, *rest = name.split("_")
    return head + "".join(part[:1].upper() + part[1:] for part in rest)


def _build(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError("expected an object", path or "<root>")
    hints = typing.get_type_hints(cls)
    known = {camel(f.name): f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        where = f"{path}.{key}" if path else key
        f = known.get(key)
        if f is None:
            raise ConfigError("unknown key", where)
        kwargs[f.name] = _coerce(hints[f.name], value, where)
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc), path or "<root>") from None


def _coerce(hint, value, where: str):
    if dataclasses.is_dataclass(hint):
        return _build(hint, value, where)
    args = typing.get_args(hint)
    if type(None) in args:
        if value is None:
            return None
        hint = next(a for a in args if a is not type(None))
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {value!r}", where)
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", where)
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", where)
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", where)
        return value
    raise ConfigError(f"unsupported field type {hint}", where)


def _unbuild(obj) -> dict:
    out = {}
    for f in dataclasses.fields(obj):
        value = getattr(obj, f.name)
        out[camel(f.name)] = _unbuild(value) if dataclasses.is_dataclass(value) else value
    return out


def validate(cfg: ExperimentConfig) -> None:
    def need(ok: bool, where: str, message: str):
        if not ok:
            raise ConfigError(message, where)

    for where, value in [
        ("doctors.senior", cfg.doctors.senior),
        ("doctors.junior", cfg.doctors.junior),
        ("robots.humanlike", cfg.robots.humanlike),
        ("robots.robotlike", cfg.robots.robotlike),
        ("patients", cfg.patients),
        ("visitors", cfg.visitors),
        ("durationDays", cfg.duration_days),
        ("seedBase", cfg.seed_base),
    ]:
        need(value >= 0, where, f"must be >= 0, got {value}")
    need(cfg.seed_base < 2**64, "seedBase", "must fit in 64 bits")
    need(cfg.beds >= 1, "beds", f"must be >= 1, got {cfg.beds}")
    need(cfg.replications >= 1, "replications", f"must be >= 1, got {cfg.replications}")
    need(cfg.visitors == 0 or cfg.patients > 0, "visitors", "visitors need at least one patient")
    need(0.5 <= cfg.robots.h_humanlike <= 1.0, "robots.hHumanlike", "humanlike robots need h in [0.5, 1]")
    need(0.0 <= cfg.robots.h_robotlike < 0.5, "robots.hRobotlike", "robotlike robots need h in [0, 0.5)")

    s = cfg.schedule
    need(0 <= s.window_start < 1440, "schedule.windowStart", "must be a minute of the day (0-1439)")
    need(
        1 <= s.window_length <= VISIT_WINDOW_MINUTES and s.window_start + s.window_length < 1440,
        "schedule.windowLength",
        f"must be 1-{VISIT_WINDOW_MINUTES} minutes and end before midnight",
    )
    need(s.self_request_mean_hours > 0, "schedule.selfRequestMeanHours", "must be > 0")
    need(0.0 <= s.p_admit <= 1.0, "schedule.pAdmit", "must be a probability")
    need(s.trace_interval >= 1, "schedule.traceInterval", "must be >= 1 minute")

    n = cfg.network
    need(0.0 < n.alpha_per_hour <= 1.0, "network.alphaPerHour", "must be in (0, 1]")
    need(0.0 < n.green_max < n.yellow_max <= 2.0, "network", "need 0 < greenMax < yellowMax <= 2")

    i = cfg.initial
    need(0.0 <= i.mental_low <= i.mental_high <= 1.0, "initial", "need 0 <= mentalLow <= mentalHigh <= 1")
    need(0.0 <= i.trust_robots <= 1.0, "initial.trustRobots", "must be in [0, 1]")
    need(0.0 <= i.severity_low <= i.severity_high <= 10.0, "initial", "need 0 <= severityLow <= severityHigh <= 10")


def deep_merge(base: dict, delta: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in delta.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _split(total: int, first: int, second: int) -> tuple[int, int]:
    """Divide ``total`` in the proportion first:second (even split if both are 0)."""
    if first + second == 0:
        a = total - total // 2
    else:
        a = int(round(total * first / (first + second)))
    return a, total - a


def apply_overrides(
    cfg: ExperimentConfig,
    *,
    doctors: int | None = None,
    robots: int | None = None,
    patients: int | None = None,
    beds: int | None = None,
    days: int | None = None,
    seed: int | None = None,
    replications: int | None = None,
) -> ExperimentConfig:
    """Command-line style overrides; doctor/robot totals keep the configured stereotype mix."""
    data = cfg.to_dict()
    if doctors is not None:
        senior, junior = _split(doctors, cfg.doctors.senior, cfg.doctors.junior)
        data["doctors"].update(senior=senior, junior=junior)
    if robots is not None:
        humanlike, robotlike = _split(robots, cfg.robots.humanlike, cfg.robots.robotlike)
        data["robots"].update(humanlike=humanlike, robotlike=robotlike)
    for key, value in [("patients", patients), ("beds", beds), ("durationDays", days),
                       ("seedBase", seed), ("replications", replications)]:
        if value is not None:
            data[key] = value
    return ExperimentConfig.from_dict(data)


def resolve_fls_paths(data: dict, base_dir) -> dict:
    """Make relative FLS paths in a raw config dict relative to ``base_dir``."""
    fls = data.get("fls")
    if not isinstance(fls, dict):
        return data
    resolved = {
        key: str(Path(base_dir) / value) if isinstance(value, str) and not Path(value).is_absolute() else value
        for key, value in fls.items()
    }
    return {**data, "fls": resolved}


def read_json(path) -> dict:
    """Parse a JSON file. OSError propagates; bad content raises ConfigError."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON ({exc})", str(path)) from None


def load_config(path) -> ExperimentConfig:
    data = read_json(path)
    if isinstance(data, dict):
        data = resolve_fls_paths(data, Path(path).parent)
    return ExperimentConfig.from_dict(data)


def shipped_json(name: str) -> dict:
    text = resources.files("wardsim.data").joinpath(name).read_text(encoding="utf-8")
    return json.loads(text)


def default_config() -> ExperimentConfig:
    return ExperimentConfig.from_dict(shipped_json("base.json"))
