"""Figures for runs, sweeps and fuzzy-system response surfaces (PNG, Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiments import RESPONSES, summarize  # noqa: E402
from .fuzzy import FuzzySystem  # noqa: E402
from .simulation import RunResult  # noqa: E402

EDGE_COLOURS = {"green": "tab:green", "yellow": "gold", "red": "tab:red"}


def _save(fig, path, header: list[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, dpi=100, metadata={"Software": None, "Description": "\n".join(header)})
    plt.close(fig)
    return path


def plot_trace(result: RunResult, path, header: list[str] | None = None) -> Path:
    trace = result.trace
    days = np.array([row.tick for row in trace]) / 1440.0
    fig, axes = plt.subplots(3, 1, figsize=(8, 9), sharex=True)

    ax = axes[0]
    ax.plot(days, [r.mean_mental_state for r in trace], label="mental state")
    ax.plot(days, [r.mean_trust_robots for r in trace], label="trust in robots")
    ax.set_ylim(-0.02, 1.02)
    ax.set_ylabel("mean")
    ax.legend(loc="best", fontsize="small")

    ax = axes[1]
    ax.plot(days, [r.mean_opinion_doctors for r in trace], label="opinion of doctors")
    ax.plot(days, [r.mean_opinion_robots for r in trace], label="opinion of robots")
    ax.axhline(0.0, color="grey", lw=0.5)
    ax.set_ylim(-1.05, 1.05)
    ax.set_ylabel("mean")
    ax.legend(loc="best", fontsize="small")

    ax = axes[2]
    for colour, attr in [("green", "edges_green"), ("yellow", "edges_yellow"), ("red", "edges_red")]:
        ax.plot(days, [getattr(r, attr) for r in trace], color=EDGE_COLOURS[colour], label=colour)
    ax.plot(days, [r.queue_length for r in trace], color="black", ls="--", lw=0.8, label="queue")
    ax.set_ylabel("count")
    ax.set_xlabel("day")
    ax.legend(loc="best", fontsize="small")

    fig.suptitle(f"seed {result.seed}")
    fig.tight_layout()
    return _save(fig, path, header or [])


def plot_sweep(results: dict[str, list[RunResult]], report: list[dict], out_dir, header: list[str] | None = None) -> list[Path]:
    out = Path(out_dir)
    names = list(results)
    x = np.arange(len(names))
    paths = []

    fig, axes = plt.subplots(len(RESPONSES), 1, figsize=(8, 2.2 * len(RESPONSES)), sharex=True)
    summaries = {name: summarize(res) for name, res in results.items()}
    for ax, key in zip(axes, RESPONSES):
        means = [summaries[n][key].mean for n in names]
        stds = [summaries[n][key].std for n in names]
        ax.errorbar(x, means, yerr=stds, fmt="o", capsize=3)
        ax.set_ylabel(key, fontsize="small")
    axes[-1].set_xticks(x, names, rotation=20, ha="right", fontsize="small")
    fig.tight_layout()
    paths.append(_save(fig, out / "responses.png", header or []))

    fig, axes = plt.subplots(len(RESPONSES), 1, figsize=(8, 2.2 * len(RESPONSES)), sharex=True)
    rows = {row["scenario"]: row for row in report}
    for ax, key in zip(axes, RESPONSES):
        deltas = [rows[n][f"delta_{key}"] for n in names]
        ax.bar(x, deltas, color=["tab:blue" if d >= 0 else "tab:orange" for d in deltas])
        ax.axhline(0.0, color="grey", lw=0.5)
        ax.set_ylabel(f"Δ {key}", fontsize="small")
    axes[-1].set_xticks(x, names, rotation=20, ha="right", fontsize="small")
    fig.tight_layout()
    paths.append(_save(fig, out / "deltas.png", header or []))
    return paths


def surface(fs: FuzzySystem, grid: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Crisp output on a grid x grid lattice over the first two inputs."""
    if len(fs.inputs) != 2:
        raise ValueError("a response surface needs exactly two inputs")
    if grid < 2:
        raise ValueError("grid must be at least 2")
    a, b = fs.inputs
    xs = np.linspace(a.lo, a.hi, grid)
    ys = np.linspace(b.lo, b.hi, grid)
    z = np.array([[fs.infer(**{a.name: x, b.name: y}) for x in xs] for y in ys])
    return xs, ys, z


def plot_surface(fs: FuzzySystem, grid: int, path, header: list[str] | None = None) -> Path:
    xs, ys, z = surface(fs, grid)
    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(xs, ys, z, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=fs.output.name)
    ax.set_xlabel(fs.inputs[0].name)
    ax.set_ylabel(fs.inputs[1].name)
    fig.tight_layout()
    return _save(fig, path, header or [])
