import itertools
import math

import pytest

from wardsim.config import ExperimentConfig
from wardsim.experiments import (
    RESPONSES,
    SweepError,
    aggregate,
    build_sweep,
    default_sweep,
    hypothesis_report,
    run_replications,
    run_sweep,
)
from wardsim.config import ConfigError
from wardsim.simulation import run_simulation

BASE = {"patients": 6, "beds": 6, "visitors": 6, "durationDays": 1, "replications": 3}


def test_aggregate_single_value():
    s = aggregate([0.5])
    assert (s.n, s.mean, s.std, s.min, s.max) == (1, 0.5, 0.0, 0.5, 0.5)


def test_aggregate_two_values():
    s = aggregate([0.4, 0.6])
    assert s.mean == pytest.approx(0.5)
    assert s.std == pytest.approx(math.sqrt(0.02), abs=1e-12)


def test_aggregate_is_permutation_invariant():
    values = [0.1, 0.7, 1e-9, 0.33, 0.9999, 0.25]
    ref = aggregate(values)
    for perm in itertools.permutations(values):
        assert aggregate(perm) == ref


def test_aggregate_empty_rejected():
    with pytest.raises(ValueError):
        aggregate([])


def test_single_replication_is_a_plain_run():
    cfg = ExperimentConfig.from_dict({**BASE, "replications": 1, "seedBase": 17})
    [rep] = run_replications(cfg)
    assert rep.trace == run_simulation(cfg, 17).trace


def test_replications_deterministic_and_worker_count_invariant():
    cfg = ExperimentConfig.from_dict(BASE)
    a = run_replications(cfg, jobs=1)
    b = run_replications(cfg, jobs=1)
    c = run_replications(cfg, jobs=3)
    assert [r.seed for r in a] == [0, 1, 2]
    assert [r.trace for r in a] == [r.trace for r in b] == [r.trace for r in c]


def sweep_data(**extra):
    data = {
        "base": BASE,
        "baseline": "doctors",
        "scenarios": [
            {"name": "doctors", "overrides": {"robots": {"humanlike": 0, "robotlike": 0}}},
            {"name": "doctors-again", "overrides": {"robots": {"humanlike": 0, "robotlike": 0}}},
            {"name": "robots", "overrides": {"doctors": {"senior": 0, "junior": 0},
                                             "robots": {"humanlike": 0, "robotlike": 2, "hRobotlike": 0.1}}},
        ],
    }
    data.update(extra)
    return data


def test_identical_scenario_has_zero_deltas():
    spec = build_sweep(sweep_data())
    report = hypothesis_report(run_sweep(spec), spec.baseline)
    again = next(r for r in report if r["scenario"] == "doctors-again")
    assert all(again[f"delta_{k}"] == 0 for k in RESPONSES)
    robots = next(r for r in report if r["scenario"] == "robots")
    assert robots["delta_finalMeanTrustRobots"] < 0


def test_scenarios_share_seeds():
    spec = build_sweep(sweep_data())
    results = run_sweep(spec)
    for runs in results.values():
        assert [r.seed for r in runs] == [0, 1, 2]


def test_missing_baseline():
    with pytest.raises(SweepError, match="missing baseline"):
        build_sweep(sweep_data(baseline="nobody"))


@pytest.mark.parametrize("mutate", [
    lambda d: d["scenarios"].append({"name": "doctors"}),
    lambda d: d["scenarios"][0]["overrides"].update(seedBase=4),
    lambda d: d["scenarios"][0]["overrides"].update(patients=-2),
    lambda d: d.update(extra=1),
    lambda d: d.update(scenarios=[]),
])
def test_bad_sweeps_rejected(mutate):
    data = sweep_data()
    mutate(data)
    with pytest.raises(ConfigError):
        build_sweep(data)


def test_top_level_overrides_apply_to_all_scenarios():
    spec = build_sweep(sweep_data(replications=2, durationDays=0))
    assert all(sc.config.replications == 2 and sc.config.duration_days == 0 for sc in spec.scenarios)


def test_default_sweep_shape():
    spec = default_sweep()
    assert len(spec.scenarios) == 5
    assert spec.baseline == "baseline-all-doctors"
    by_name = {sc.name: sc.config for sc in spec.scenarios}
    assert by_name["all-robots-robotlike"].doctors.total == 0
    assert by_name["all-robots-robotlike"].robots.h_robotlike == pytest.approx(0.1)
    assert by_name["half-robots-humanlike"].robots.h_humanlike == pytest.approx(0.9)
    assert by_name["baseline-all-doctors"].robots.total == 0
