"""Replications, scenario sweeps and the scenario-vs-baseline comparison."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .config import ConfigError, ExperimentConfig, deep_merge, read_json, resolve_fls_paths, shipped_json
from .simulation import RunResult, run_simulation

RESPONSES = (
    "finalMeanMentalState",
    "finalMeanTrustRobots",
    "finalMeanOpinionDoctors",
    "finalMeanOpinionRobots",
    "redEdgeFraction",
)

DEFAULT_BASELINE = "baseline-all-doctors"


class SweepError(ConfigError):
    pass


def _run_one(args) -> RunResult:
    cfg, seed = args
    return run_simulation(cfg, seed)


def run_replications(cfg: ExperimentConfig, jobs: int = 1) -> list[RunResult]:
    """Replication k runs with seed ``seedBase + k``; results come back in k order."""
    tasks = [(cfg, cfg.seed_base + k) for k in range(cfg.replications)]
    return _run_tasks(tasks, jobs)


def _run_tasks(tasks: list, jobs: int) -> list[RunResult]:
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        # map preserves submission order whatever order workers finish in
        return list(pool.map(_run_one, tasks))


@dataclass(frozen=True)
class Summary:
    n: int
    mean: float
    std: float
    min: float
    max: float


def aggregate(values) -> Summary:
    """Mean, sample standard deviation, min and max; independent of input order."""
    xs = [float(v) for v in values]
    if not xs:
        raise ValueError("nothing to aggregate")
    n = len(xs)
    mean = math.fsum(xs) / n
    std = math.sqrt(math.fsum((x - mean) ** 2 for x in xs) / (n - 1)) if n > 1 else 0.0
    return Summary(n, mean, std, min(xs), max(xs))


def summarize(results: list[RunResult]) -> dict[str, Summary]:
    return {r: aggregate(res.responses()[r] for res in results) for r in RESPONSES}


@dataclass(frozen=True)
class Scenario:
    name: str
    config: ExperimentConfig
    description: str = ""


@dataclass(frozen=True)
class SweepSpec:
    base: ExperimentConfig
    scenarios: tuple[Scenario, ...]
    baseline: str = DEFAULT_BASELINE

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.scenarios]


def build_sweep(data: dict, base_dir: Path | None = None) -> SweepSpec:
    """Build a sweep from its JSON form, validating every scenario up front."""
    if not isinstance(data, dict):
        raise ConfigError("a sweep file holds a JSON object")
    unknown = set(data) - {"base", "baseline", "scenarios", "replications", "durationDays"}
    if unknown:
        raise ConfigError("unknown key", sorted(unknown)[0])
    base = data.get("base", {})
    if isinstance(base, str):
        path = Path(base) if base_dir is None else base_dir / base
        base = read_json(path)
        if isinstance(base, dict):
            base = resolve_fls_paths(base, path.parent)
    for key in ("replications", "durationDays"):
        if key in data:
            base = deep_merge(base, {key: data[key]})
    base_cfg = ExperimentConfig.from_dict(base)

    raw = data.get("scenarios")
    if not isinstance(raw, list) or not raw:
        raise ConfigError("a sweep needs a non-empty list", "scenarios")
    scenarios = []
    seen = set()
    for i, item in enumerate(raw):
        where = f"scenarios[{i}]"
        if not isinstance(item, dict) or not isinstance(item.get("name"), str):
            raise ConfigError("each scenario needs a name", where)
        name = item["name"]
        if name in seen:
            raise ConfigError(f"duplicate scenario name {name!r}", where)
        seen.add(name)
        extra = set(item) - {"name", "description", "overrides"}
        if extra:
            raise ConfigError("unknown key", f"{where}.{sorted(extra)[0]}")
        overrides = item.get("overrides", {})
        for key in ("seedBase", "replications"):
            if key in overrides:
                raise ConfigError("scenarios share the base seeds and replication count", f"{where}.overrides.{key}")
        try:
            cfg = ExperimentConfig.from_dict(deep_merge(base_cfg.to_dict(), overrides))
        except ConfigError as exc:
            raise ConfigError(f"scenario {name!r}: {exc}") from None
        scenarios.append(Scenario(name, cfg, item.get("description", "")))

    baseline = data.get("baseline", DEFAULT_BASELINE)
    if baseline not in seen:
        raise SweepError(f"missing baseline scenario {baseline!r}")
    return SweepSpec(base_cfg, tuple(scenarios), baseline)


def load_sweep(path) -> SweepSpec:
    path = Path(path)
    return build_sweep(read_json(path), base_dir=path.parent)


def default_sweep() -> SweepSpec:
    data = shipped_json("sweep.json")
    data["base"] = shipped_json("base.json")
    return build_sweep(data)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> dict[str, list[RunResult]]:
    """All scenarios with common random numbers: replication k uses the same seed everywhere."""
    tasks = [
        (sc.config, spec.base.seed_base + k)
        for sc in spec.scenarios
        for k in range(spec.base.replications)
    ]
    flat = _run_tasks(tasks, jobs)
    r = spec.base.replications
    return {sc.name: flat[i * r:(i + 1) * r] for i, sc in enumerate(spec.scenarios)}


def hypothesis_report(results: dict[str, list[RunResult]], baseline: str = DEFAULT_BASELINE) -> list[dict]:
    """Per scenario: mean of every response and its difference from the baseline."""
    if baseline not in results:
        raise SweepError(f"missing baseline scenario {baseline!r}")
    base = {k: s.mean for k, s in summarize(results[baseline]).items()}
    rows = []
    for name, res in results.items():
        row = {"scenario": name, "replications": len(res)}
        summary = summarize(res)
        for key in RESPONSES:
            row[key] = summary[key].mean
        for key in RESPONSES:
            row[f"delta_{key}"] = summary[key].mean - base[key]
        rows.append(row)
    return rows


def default_jobs() -> int:
    return max(1, min(8, os.cpu_count() or 1))
