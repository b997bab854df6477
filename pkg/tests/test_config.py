import json
from pathlib import Path

import pytest

from wardsim.config import (
    ConfigError,
    ExperimentConfig,
    apply_overrides,
    default_config,
    load_config,
    shipped_json,
)


def test_defaults_round_trip():
    cfg = ExperimentConfig()
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    assert ExperimentConfig.from_dict({}) == cfg
    assert len(cfg.sha256()) == 64


@pytest.mark.parametrize("name", ["base.json", "sweep.json"])
def test_repo_configs_match_packaged_copies(name):
    repo_copy = Path(__file__).resolve().parents[1] / "configs" / name
    assert json.loads(repo_copy.read_text()) == shipped_json(name)


def test_default_config_is_shipped_base():
    assert default_config() == ExperimentConfig.from_dict(shipped_json("base.json"))


@pytest.mark.parametrize("data, field", [
    ({"patients": -1}, "patients"),
    ({"patients": "many"}, "patients"),
    ({"patients": True}, "patients"),
    ({"pateints": 3}, "pateints"),
    ({"robots": {"hHumanlike": 0.3}}, "robots.hHumanlike"),
    ({"network": {"greenMax": 0.5, "yellowMax": 0.3}}, "network"),
    ({"schedule": {"windowLength": 90}}, "schedule.windowLength"),
    ({"effects": {"trustGain": -1}}, "effects"),
    ({"beds": 0}, "beds"),
])
def test_invalid_config_names_the_field(data, field):
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict(data)
    assert info.value.field == field
    assert field in str(info.value)


def test_integers_accepted_as_floats():
    cfg = ExperimentConfig.from_dict({"network": {"alphaPerHour": 1}})
    assert cfg.network.alpha_per_hour == 1.0


def test_overrides_keep_stereotype_mix():
    cfg = ExperimentConfig.from_dict({"doctors": {"senior": 1, "junior": 3}, "robots": {"humanlike": 0, "robotlike": 0}})
    out = apply_overrides(cfg, doctors=8, robots=4, patients=5, beds=4, days=2, seed=9)
    assert (out.doctors.senior, out.doctors.junior) == (2, 6)
    assert (out.robots.humanlike, out.robots.robotlike) == (2, 2)
    assert (out.patients, out.beds, out.duration_days, out.seed_base) == (5, 4, 2, 9)
    assert apply_overrides(cfg, doctors=0).doctors.total == 0


def test_load_config_resolves_fls_relative_to_file(tmp_path):
    (tmp_path / "sub").mkdir()
    path = tmp_path / "sub" / "cfg.json"
    path.write_text(json.dumps({"fls": {"doctor": "doc.fls"}}))
    assert load_config(path).fls.doctor == str(tmp_path / "sub" / "doc.fls")


def test_bad_json_is_a_config_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_file_is_an_os_error(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "missing.json")
