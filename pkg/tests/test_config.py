import pytest

from sefcsim.core.config import (
    Algorithm,
    SimConfig,
    default_config,
    dump_config_yaml,
    merge_overrides,
    validate_config,
)
from sefcsim.core.exceptions import (
    ConfigFileNotFoundError,
    ConfigParseError,
    ConfigValidationError,
)


def _fields(error: ConfigValidationError) -> set[str]:
    return {violation.field for violation in error.violations}


def test_default_config_matches_documented_values():
    config = default_config()

    assert config.n_uavs == 60
    assert config.comm_range == 400.0
    assert config.radio.comm_range == 400.0
    assert (config.med_weights.c1, config.med_weights.c2, config.med_weights.c3) == (0.4, 0.3, 0.3)
    assert config.osf_weights.alpha == 0.25
    assert config.med_threshold == 0.5
    assert config.direction_cos_threshold == 0.707
    assert config.handover_margin == 0.10
    assert config.recluster_threshold == 0.3
    assert config.algorithm is Algorithm.SEFC
    assert config.payload_bits == config.radio.data_bits


def test_validate_config_is_idempotent():
    once = validate_config({"n_uavs": 25, "seed": 9, "mobility": {"max_speed": 40.0}})

    assert validate_config(once) == once
    assert validate_config(validate_config(once)) == once


def test_med_weights_must_sum_to_one():
    with pytest.raises(ConfigValidationError) as excinfo:
        validate_config({"med_weights": {"c1": 0.5, "c2": 0.4, "c3": 0.3}})

    assert "med_weights" in _fields(excinfo.value)
    assert "sum to 1" in str(excinfo.value)


def test_zero_uavs_is_rejected():
    with pytest.raises(ConfigValidationError) as excinfo:
        validate_config({"n_uavs": 0})

    assert "at least one UAV required" in str(excinfo.value)


def test_every_violation_is_named():
    with pytest.raises(ConfigValidationError) as excinfo:
        validate_config({"n_uavs": 0, "tick_dt": -1.0, "comm_range": 0.0})

    assert {"n_uavs", "tick_dt", "comm_range"} <= _fields(excinfo.value)


def test_intervals_shorter_than_a_tick_are_rejected():
    with pytest.raises(ConfigValidationError) as excinfo:
        validate_config({"tick_dt": 1.0, "clustering_interval": 0.5})

    assert "clustering_interval must be >= tick_dt" in str(excinfo.value)


def test_radio_range_follows_top_level_range():
    assert default_config(comm_range=250.0).radio.comm_range == 250.0

    with pytest.raises(ConfigValidationError):
        validate_config({"comm_range": 250.0, "radio": {"comm_range": 300.0}})


def test_loss_probability_of_one_is_rejected():
    with pytest.raises(ConfigValidationError) as excinfo:
        validate_config({"radio": {"loss_prob": 1.0}})

    assert "radio.loss_prob" in _fields(excinfo.value)


def test_from_yaml_reads_nested_keys(config_file):
    path = config_file(
        "n_uavs: 20\nseed: 5\nalgorithm: OSCA_LITE\ngs:\n  position: [100, 200, 0]\n"
    )

    config = SimConfig.from_yaml(path)

    assert config.n_uavs == 20
    assert config.algorithm is Algorithm.OSCA_LITE
    assert config.gs.position.as_tuple() == (100.0, 200.0, 0.0)


def test_from_yaml_names_unknown_keys(config_file):
    path = config_file("n_uavs: 20\nmobility:\n  top_speed: 4\n")

    with pytest.raises(ConfigParseError) as excinfo:
        SimConfig.from_yaml(path)

    assert excinfo.value.key == "mobility.top_speed"


def test_from_yaml_rejects_malformed_text(config_file):
    path = config_file("n_uavs: [1, 2\n")

    with pytest.raises(ConfigParseError):
        SimConfig.from_yaml(path)


@pytest.mark.parametrize("text", ["- n_uavs\n- 5\n", "5\n", "just words\n"])
def test_from_yaml_needs_a_mapping(config_file, text):
    with pytest.raises(ConfigParseError, match="must hold a mapping"):
        SimConfig.from_yaml(config_file(text))


def test_from_yaml_missing_file(tmp_path):
    with pytest.raises(ConfigFileNotFoundError):
        SimConfig.from_yaml(tmp_path / "absent.yaml")


def test_environment_overrides_yaml(config_file, monkeypatch):
    path = config_file("n_uavs: 20\nseed: 5\n")
    monkeypatch.setenv("SEFCSIM_SEED", "77")
    monkeypatch.setenv("SEFCSIM_MOBILITY__MAX_SPEED", "45")

    config = SimConfig.from_yaml(path)

    assert config.seed == 77
    assert config.mobility.max_speed == 45.0
    assert config.n_uavs == 20


def test_validate_config_ignores_environment(monkeypatch):
    monkeypatch.setenv("SEFCSIM_SEED", "77")

    assert validate_config({}).seed == 0


def test_merge_overrides_keeps_sibling_keys():
    base = default_config(mobility={"gm_alpha": 0.6})

    merged = merge_overrides(base, {"mobility": {"max_speed": 20.0}})

    assert merged.mobility.gm_alpha == 0.6
    assert merged.mobility.max_speed == 20.0


def test_dumped_yaml_loads_back(config_file):
    config = default_config(n_uavs=33, algorithm="PICA_LITE", seed=3)

    reloaded = SimConfig.from_yaml(config_file(dump_config_yaml(config)))

    assert reloaded == config
