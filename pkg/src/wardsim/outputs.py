"""CSV writers.  Every file starts with ``#`` header lines that record the
version, seed and configuration hash needed to reproduce it."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

from . import __version__
from .experiments import RESPONSES, SweepSpec, summarize
from .simulation import TRACE_COLUMNS, RunResult

PATIENT_COLUMNS = (
    "id", "state", "bed", "mentalState", "trustRobots", "opinionDoctors", "opinionRobots",
    "severity", "lastVisitDay", "treatmentsByDoctor", "treatmentsByRobot", "visits",
)
NETWORK_COLUMNS = ("day", "i", "j", "absDiff", "color")


def _fmt(x: float) -> str:
    return f"{x + 0.0:.6f}"


def run_header(result: RunResult, extra: dict | None = None) -> list[str]:
    cfg = result.config
    lines = [
        f"wardsim {__version__}",
        f"seed: {result.seed}",
        f"config_sha256: {cfg.sha256()}",
        f"config: {cfg.canonical_json()}",
        f"edge thresholds: green < {cfg.network.green_max:g} <= yellow < {cfg.network.yellow_max:g} <= red",
    ]
    for key, value in (extra or {}).items():
        lines.append(f"{key}: {value}")
    return lines


def _write(path: Path, header: list[str], columns, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def write_trace(result: RunResult, path, extra: dict | None = None):
    rows = [
        (r.tick, r.day, _fmt(r.mean_mental_state), _fmt(r.mean_trust_robots),
         _fmt(r.mean_opinion_doctors), _fmt(r.mean_opinion_robots),
         r.queue_length, r.edges_green, r.edges_yellow, r.edges_red)
        for r in result.trace
    ]
    _write(Path(path), run_header(result, extra), TRACE_COLUMNS, rows)


def write_patients(result: RunResult, path, extra: dict | None = None):
    rows = [
        (p.id, p.state.value, "" if p.bed is None else p.bed, _fmt(p.mental_state), _fmt(p.trust_robots),
         _fmt(p.opinion_doctors), _fmt(p.opinion_robots), _fmt(p.severity),
         "" if p.last_visit_day is None else p.last_visit_day,
         p.treatments_by_doctor, p.treatments_by_robot, p.visits)
        for p in result.patients
    ]
    _write(Path(path), run_header(result, extra), PATIENT_COLUMNS, rows)


def write_network(result: RunResult, path, extra: dict | None = None):
    rows = [(day, i, j, _fmt(gap), color) for day, i, j, gap, color in result.network_dump]
    _write(Path(path), run_header(result, extra), NETWORK_COLUMNS, rows)


def write_run(result: RunResult, out_dir, dump_network: bool = False, extra: dict | None = None) -> dict[str, Path]:
    out = Path(out_dir)
    paths = {"trace": out / "trace.csv", "patients": out / "patients.csv"}
    write_trace(result, paths["trace"], extra)
    write_patients(result, paths["patients"], extra)
    if dump_network:
        paths["network"] = out / "network.csv"
        write_network(result, paths["network"], extra)
    return paths


def sweep_header(spec: SweepSpec) -> list[str]:
    doc = {
        "baseline": spec.baseline,
        "scenarios": {sc.name: sc.config.to_dict() for sc in spec.scenarios},
    }
    digest = hashlib.sha256(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()).hexdigest()
    seeds = [spec.base.seed_base + k for k in range(spec.base.replications)]
    return [
        f"wardsim {__version__}",
        f"seeds: {seeds[0]}..{seeds[-1]} (shared by every scenario)",
        f"base_config_sha256: {spec.base.sha256()}",
        f"sweep_sha256: {digest}",
        f"baseline: {spec.baseline}",
    ]


def write_summary(spec: SweepSpec, results: dict[str, list[RunResult]], path):
    rows = []
    for name, res in results.items():
        for key, s in summarize(res).items():
            rows.append((name, key, s.n, f"{s.mean:.10g}", f"{s.std:.10g}", f"{s.min:.10g}", f"{s.max:.10g}"))
    _write(Path(path), sweep_header(spec), ("scenario", "response", "n", "mean", "std", "min", "max"), rows)


def write_report(spec: SweepSpec, report: list[dict], path):
    columns = ["scenario", "replications", *RESPONSES, *(f"delta_{k}" for k in RESPONSES)]
    rows = [
        [row["scenario"], row["replications"], *(f"{row[c]:.10g}" for c in columns[2:])]
        for row in report
    ]
    _write(Path(path), sweep_header(spec), columns, rows)


def read_csv(path) -> list[dict]:
    """Rows of a file written here, skipping the header comment lines."""
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))
