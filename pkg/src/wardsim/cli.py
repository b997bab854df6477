"""``wardsim`` command line: single runs, sweeps and fuzzy-system inspection.

Exit codes: 0 success, 1 invalid configuration or definition, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, apply_overrides, default_config, load_config
from .experiments import (
    RESPONSES,
    build_sweep,
    default_jobs,
    default_sweep,
    hypothesis_report,
    load_sweep,
    run_sweep,
)
from .fuzzy import FLSError, check_completeness, load_fls_definition
from .outputs import run_header, sweep_header, write_report, write_run, write_summary
from .simulation import run_simulation

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2

log = logging.getLogger(__name__)


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """Usage errors count as invalid input (exit 1) rather than argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> Parser:
    parser = Parser(prog="wardsim", description="Hospital ward simulation with doctors, robots and visitors.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    run = sub.add_parser("run", help="one simulation run")
    run.add_argument("--config", type=Path, help="experiment JSON (default: shipped base config)")
    run.add_argument("--seed", type=_non_negative, help="seed (default: the config's seedBase)")
    run.add_argument("--days", type=_non_negative)
    run.add_argument("--doctors", type=_non_negative, help="total doctors; keeps the senior/junior mix")
    run.add_argument("--robots", type=_non_negative, help="total robots; keeps the humanlike/robotlike mix")
    run.add_argument("--patients", type=_non_negative)
    run.add_argument("--beds", type=_positive)
    run.add_argument("--output", type=Path, default=Path("wardsim-run"), help="output directory")
    run.add_argument("--dump-network", action="store_true", help="also write the daily edge list")
    run.add_argument("--no-figures", action="store_true", help="skip PNG figures")

    sweep = sub.add_parser("sweep", help="scenario sweep with shared seeds")
    sweep.add_argument("path", nargs="?", type=Path, help="sweep JSON (default: shipped sweep)")
    sweep.add_argument("--jobs", type=_positive, default=None, help="parallel worker processes")
    sweep.add_argument("--days", type=_non_negative)
    sweep.add_argument("--seed", type=_non_negative, help="seed of replication 0")
    sweep.add_argument("--replications", type=_positive)
    sweep.add_argument("--output", type=Path, default=Path("wardsim-sweep"), help="output directory")
    sweep.add_argument("--no-figures", action="store_true", help="skip PNG figures")

    val = sub.add_parser("validate-fls", help="parse a fuzzy system and check rule coverage")
    val.add_argument("path", type=Path)

    surf = sub.add_parser("fls-surface", help="crisp output over a grid of the two inputs, as CSV")
    surf.add_argument("path", type=Path)
    surf.add_argument("--grid", type=_positive, default=21, help="points per input (default 21)")
    surf.add_argument("--output", type=Path, help="CSV file (default: standard output)")
    surf.add_argument("--figure", type=Path, help="also render a heatmap PNG")
    return parser


def cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else default_config()
    cfg = apply_overrides(cfg, doctors=args.doctors, robots=args.robots, patients=args.patients,
                          beds=args.beds, days=args.days)
    seed = cfg.seed_base if args.seed is None else args.seed
    result = run_simulation(cfg, seed, dump_network=args.dump_network)
    paths = write_run(result, args.output, dump_network=args.dump_network)
    if not args.no_figures:
        from .plotting import plot_trace

        paths["figure"] = plot_trace(result, args.output / "trace.png", run_header(result))
    for key, value in result.responses().items():
        print(f"{key}: {value + 0.0:.6f}")
    edges = result.final_edges
    print(f"finalEdges: green={edges['green']} yellow={edges['yellow']} red={edges['red']}")
    for path in paths.values():
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = load_sweep(args.path) if args.path else default_sweep()
    if args.days is not None or args.seed is not None or args.replications is not None:
        data = {
            "base": apply_overrides(spec.base, days=args.days, seed=args.seed,
                                    replications=args.replications).to_dict(),
            "baseline": spec.baseline,
            "scenarios": [
                {"name": sc.name, "description": sc.description,
                 "overrides": _scenario_delta(sc.config.to_dict(), spec.base.to_dict())}
                for sc in spec.scenarios
            ],
        }
        spec = build_sweep(data)
    jobs = args.jobs or default_jobs()
    results = run_sweep(spec, jobs)
    report = hypothesis_report(results, spec.baseline)
    out = args.output
    for name, runs in results.items():
        for k, result in enumerate(runs):
            write_run(result, out / name / f"rep{k}", extra={"scenario": name, "replication": k})
    write_summary(spec, results, out / "summary.csv")
    write_report(spec, report, out / "report.csv")
    if not args.no_figures:
        from .plotting import plot_sweep

        plot_sweep(results, report, out, sweep_header(spec))

    width = max(len(n) for n in results)
    print(f"{'scenario':<{width}}  " + "  ".join(f"{k:>24}" for k in RESPONSES))
    for row in report:
        print(f"{row['scenario']:<{width}}  " + "  ".join(f"{row[k]:>24.6f}" for k in RESPONSES))
    log.info("wrote %s", out)
    return EXIT_OK


def _scenario_delta(cfg: dict, base: dict) -> dict:
    """Keys of ``cfg`` that differ from ``base``, nested."""
    delta = {}
    for key, value in cfg.items():
        if isinstance(value, dict):
            sub = _scenario_delta(value, base[key])
            if sub:
                delta[key] = sub
        elif value != base[key] and key not in ("seedBase", "replications"):
            delta[key] = value
    return delta


def _load_fls(path: Path):
    text = path.read_text(encoding="utf-8")
    return load_fls_definition(text, name=str(path), check=False)


def cmd_validate_fls(args) -> int:
    fs = _load_fls(args.path)
    print(fs.describe())
    check_completeness(fs)
    print(f"ok: {len(fs.rules)} rules, rule base complete")
    return EXIT_OK


def cmd_fls_surface(args) -> int:
    from .plotting import surface

    fs = _load_fls(args.path)
    check_completeness(fs)
    xs, ys, z = surface(fs, args.grid)
    a, b = fs.inputs
    rows = [(f"{x:.6g}", f"{y:.6g}", f"{z[j, i]:.6f}") for i, x in enumerate(xs) for j, y in enumerate(ys)]
    header = [f"wardsim {__version__}", f"fls: {args.path}", f"grid: {args.grid}"]

    def emit(fh):
        for line in header:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([a.name, b.name, fs.output.name])
        writer.writerows(rows)

    if args.output:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            emit(fh)
    else:
        emit(sys.stdout)
    if args.figure:
        from .plotting import plot_surface

        plot_surface(fs, args.grid, args.figure, header)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "validate-fls": cmd_validate_fls,
    "fls-surface": cmd_fls_surface,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    level = {0: logging.ERROR, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, FLSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
