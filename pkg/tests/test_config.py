"""Config loading, validation, and world construction."""

import numpy as np
import pytest
import yaml

from maglab import config, defaults
from maglab.config import (
    DEFAULT_CONFIG_FILENAME,
    ENV_VAR,
    LabConfig,
    QubitConfig,
    build_world,
    default_config,
    load_config,
    to_yaml,
)
from maglab.errors import ConfigError
from maglab.scenarios import SCENARIOS
from maglab.world import World


def _worlds_match(a: World, b: World, tol=1e-14):
    assert a.magnet.dims == pytest.approx(b.magnet.dims, rel=tol)
    assert a.magnet.remanence_t == pytest.approx(b.magnet.remanence_t, rel=tol)
    np.testing.assert_allclose(a.magnet.orientation, b.magnet.orientation, atol=tol)
    np.testing.assert_allclose(
        a.magnet.position.as_array(), b.magnet.position.as_array(), atol=tol
    )
    assert a.solenoid.setpoint_t == b.solenoid.setpoint_t
    assert a.qubit.name == b.qubit.name
    assert a.qubit.g.principal_values == pytest.approx(
        b.qubit.g.principal_values, rel=tol
    )
    np.testing.assert_allclose(a.qubit.g.orientation, b.qubit.g.orientation, atol=tol)
    assert a.qubit.sigma_par == pytest.approx(b.qubit.sigma_par, rel=tol)
    assert a.qubit.sigma_perp == pytest.approx(b.qubit.sigma_perp, rel=tol)
    assert a.stage.commanded == b.stage.commanded
    assert a.master_seed == b.master_seed


def test_default_config_builds_default_world():
    _worlds_match(build_world(default_config()), World.default())


def test_default_config_fills_both_qubits_and_scenarios():
    cfg = default_config()
    assert set(cfg.qubits) == {"Q8", "Q3"}
    assert cfg.default_qubit == "Q8"
    assert cfg.scenarios == tuple(SCENARIOS)


def test_unknown_keys_rejected_at_every_level():
    with pytest.raises(Exception):
        LabConfig.model_validate({"extra_toplevel": 1})
    with pytest.raises(Exception):
        LabConfig.model_validate({"magnet": {"dims_mm": [1, 1, 1], "colour": "red"}})
    with pytest.raises(Exception):
        LabConfig.model_validate({"stage": {"speed_mm_s": 10.0}})


def test_solenoid_limit_enforced():
    with pytest.raises(Exception, match=r"\+/-3\.0 T coil limit"):
        LabConfig.model_validate({"solenoid": {"setpoint_t": 3.5}})
    # the boundary itself is legal
    LabConfig.model_validate({"solenoid": {"setpoint_t": -3.0}})


def test_unknown_scenario_listed_with_known_names():
    with pytest.raises(Exception, match="fig4_sweet_spot"):
        LabConfig.model_validate({"scenarios": ["fig9_imaginary"]})


def test_scenario_subset_preserved():
    cfg = LabConfig.model_validate({"scenarios": ["fig4_sweet_spot", "fig1d_profile"]})
    assert cfg.scenarios == ("fig4_sweet_spot", "fig1d_profile")


def test_default_qubit_must_resolve():
    with pytest.raises(Exception, match="default_qubit"):
        LabConfig.model_validate({"default_qubit": "Q99"})


def test_stage_limits_must_be_ordered():
    with pytest.raises(Exception, match="empty travel range"):
        LabConfig.model_validate({"stage": {"x_limits_mm": [50.0, -50.0]}})


def test_magnet_dims_must_be_positive():
    with pytest.raises(Exception, match="positive"):
        LabConfig.model_validate({"magnet": {"dims_mm": [110.6, 0.0, 19.5]}})


def test_qubit_config_round_trips_through_model():
    q = defaults.second_qubit()
    back = QubitConfig.from_model(q).to_model("Q3")
    assert back.g.principal_values == pytest.approx(q.g.principal_values, rel=1e-12)
    np.testing.assert_allclose(back.g.orientation, q.g.orientation, atol=1e-12)
    assert back.sigma_par == pytest.approx(q.sigma_par, rel=1e-12)
    assert back.echo_gain_anchors == q.echo_gain_anchors
    assert back.eta0 == q.eta0
    assert back.baseline == q.baseline


def test_yaml_round_trip(tmp_path):
    cfg = default_config()
    path = tmp_path / "lab.yaml"
    path.write_text(to_yaml(cfg), encoding="utf-8")
    again = load_config(path)
    assert again == cfg
    _worlds_match(build_world(again), build_world(cfg))


def test_load_config_resolution_order(tmp_path, monkeypatch):
    explicit = tmp_path / "explicit.yaml"
    explicit.write_text("master_seed: 111\n", encoding="utf-8")
    via_env = tmp_path / "env.yaml"
    via_env.write_text("master_seed: 222\n", encoding="utf-8")
    cwd_file = tmp_path / DEFAULT_CONFIG_FILENAME
    cwd_file.write_text("master_seed: 333\n", encoding="utf-8")

    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv(ENV_VAR, str(via_env))
    assert load_config(explicit).master_seed == 111
    assert load_config().master_seed == 222
    monkeypatch.delenv(ENV_VAR)
    assert load_config().master_seed == 333
    cwd_file.unlink()
    assert load_config() == default_config()


def test_load_config_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.yaml")


def test_load_config_rejects_broken_yaml(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("magnet: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid YAML"):
        load_config(p)


def test_load_config_rejects_non_mapping_root(tmp_path):
    p = tmp_path / "list.yaml"
    p.write_text("- a\n- b\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="must be a mapping"):
        load_config(p)


def test_load_config_wraps_validation_error(tmp_path):
    p = tmp_path / "invalid.yaml"
    p.write_text(yaml.safe_dump({"solenoid": {"setpoint_t": 9.0}}), encoding="utf-8")
    with pytest.raises(ConfigError, match="coil limit"):
        load_config(p)


def test_empty_file_means_defaults(tmp_path):
    p = tmp_path / "empty.yaml"
    p.write_text("", encoding="utf-8")
    assert load_config(p) == default_config()


def test_build_world_selects_qubit():
    cfg = default_config()
    assert build_world(cfg, "Q3").qubit.name == "Q3"
    with pytest.raises(ConfigError, match="unknown qubit"):
        build_world(cfg, "Q99")


def test_build_world_honors_stage_overrides():
    cfg = LabConfig.model_validate(
        {"stage": {"home": [0.0, 0.0, -250.0], "eps_per_event_mm": 0.02}}
    )
    w = build_world(cfg)
    assert w.stage.commanded.z == -250.0
    assert w.stage.eps_per_event == 0.02
    # magnet is anchored wherever the stage actually sits
    assert w.magnet.position == w.stage.true_pos
