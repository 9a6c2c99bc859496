import json

import pytest
import yaml

from config_manager import ConfigManager
from qp_errors import InvalidInputError


def test_defaults_without_a_file(tmp_path):
    config = ConfigManager(str(tmp_path / "missing.json"))
    assert config.get_setting("cert_tol") == 1e-8
    assert config.get_setting("unknown", "fallback") == "fallback"
    assert set(config.get_presets("forge")) == {"default", "sparse", "wide", "tight_floor"}
    assert not (tmp_path / "missing.json").exists()


def test_json_file_merges_with_defaults(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"settings": {"cert_tol": 1e-6},
                                "presets": {"forge": {"huge": {"magnitude": 100.0}}}}))
    config = ConfigManager(str(path))
    assert config.get_setting("cert_tol") == 1e-6
    assert config.get_setting("psd_tol") == 1e-8
    assert "default" in config.get_presets("forge")
    assert config.forge_spec("huge", seed=1).magnitude == 100.0


def test_yaml_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump({"settings": {"workers": 2, "log_level": "INFO"}}))
    config = ConfigManager(str(path))
    assert config.get_setting("workers") == 2
    assert config.get_setting("log_level") == "INFO"


def test_corrupt_file_falls_back_to_defaults(tmp_path, caplog):
    path = tmp_path / "config.json"
    path.write_text("{not json")
    config = ConfigManager(str(path))
    assert config.get_setting("exactness_tol") == 1e-7
    assert "Error loading config" in caplog.text


@pytest.mark.parametrize("name", ["config.json", "config.yml"])
def test_update_setting_persists(tmp_path, name):
    path = tmp_path / name
    config = ConfigManager(str(path))
    config.update_setting("global_dimension_cap", 9)
    assert ConfigManager(str(path)).get_setting("global_dimension_cap") == 9


def test_add_preset(tmp_path):
    path = tmp_path / "config.json"
    config = ConfigManager(str(path))
    config.add_preset("forge", "thin", magnitude=2.0, density=0.1, strict_floor=0.2,
                      description="Very sparse")
    reloaded = ConfigManager(str(path))
    assert reloaded.get_presets("forge")["thin"]["density"] == 0.1
    spec = reloaded.forge_spec("thin", seed=3)
    assert (spec.magnitude, spec.density, spec.strict_floor) == (2.0, 0.1, 0.2)


def test_preset_carries_zero_psd_probability(tmp_path):
    path = tmp_path / "config.json"
    config = ConfigManager(str(path))
    config.add_preset("forge", "flat", magnitude=1.0, density=1.0, strict_floor=0.1,
                      description="Half the PSD multipliers zeroed", zero_psd_probability=0.5)
    reloaded = ConfigManager(str(path))
    assert reloaded.get_presets("forge")["flat"]["zero_psd_probability"] == 0.5
    assert reloaded.forge_spec("flat", seed=1).zero_psd_probability == 0.5
    assert reloaded.forge_spec("flat", seed=1, zero_psd_probability=0.25).zero_psd_probability == 0.25
    assert reloaded.forge_spec("default", seed=1).zero_psd_probability == 0.0
    with pytest.raises(InvalidInputError):
        config.add_preset("forge", "bad", magnitude=1.0, density=1.0, strict_floor=0.1,
                          description="", zero_psd_probability=1.5)


def test_add_preset_validates(tmp_path):
    config = ConfigManager(str(tmp_path / "config.json"))
    with pytest.raises(InvalidInputError):
        config.add_preset("forge", "broken", magnitude=1.0, density=0.0, strict_floor=0.1,
                          description="")
    assert "broken" not in config.get_presets("forge")


def test_forge_spec_overrides(tmp_path):
    config = ConfigManager(str(tmp_path / "config.json"))
    spec = config.forge_spec("sparse", seed=5, magnitude=4.0, density=None)
    assert spec.seed == 5
    assert spec.magnitude == 4.0
    assert spec.density == 0.3


def test_unknown_preset(tmp_path):
    config = ConfigManager(str(tmp_path / "config.json"))
    with pytest.raises(InvalidInputError) as err:
        config.forge_spec("nope", seed=0)
    assert err.value.code == "unknown_preset"


def test_threads_overrides_workers(tmp_path, monkeypatch):
    config = ConfigManager(str(tmp_path / "config.json"))
    monkeypatch.delenv("THREADS", raising=False)
    assert config.workers() == 4
    monkeypatch.setenv("THREADS", "2")
    assert config.workers() == 2


def test_invalid_threads_falls_back_to_setting(tmp_path, monkeypatch):
    config = ConfigManager(str(tmp_path / "config.json"))
    config.update_setting("workers", 3)
    monkeypatch.setenv("THREADS", "many")
    assert config.workers() == 3
