from pathlib import Path

import numpy as np
import pytest

from modquad import actuation, config
from modquad.errors import ParseError, SchemaError

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def test_fixture_configs_all_parse():
    for path in sorted(FIXTURES.glob("*.cfg")):
        cfg = config.load_config(path)
        assert cfg.modules


def test_exp4_fixture_has_four_t_modules():
    cfg = config.load_config(FIXTURES / "exp4.cfg")
    assert len(cfg.modules) == 4
    assert all(m.kind == "T" for m in cfg.modules)
    etas = sorted(m.eta_rad for m in cfg.modules)
    assert etas == pytest.approx([-np.pi / 4, -np.pi / 4, np.pi / 4, np.pi / 4])
    # opposite tilt types sit on the two diagonals
    by_cell = {m.cell[:2]: m.eta_rad for m in cfg.modules}
    assert by_cell[(0, 0)] == by_cell[(1, 1)]
    assert by_cell[(0, 1)] == by_cell[(1, 0)]
    assert by_cell[(0, 0)] == -by_cell[(0, 1)]


def test_empty_document_rejected():
    with pytest.raises(SchemaError):
        config.parse_config("")


def test_missing_modules_rejected():
    with pytest.raises(SchemaError) as info:
        config.parse_config("physical:\n  arm_m: 0.05\n")
    assert any("modules" in p for p in info.value.problems)


def test_duplicate_cell_rejected():
    text = """
modules:
  - kind: T
    eta_rad: 0.1
    cell: [0, 0, 0]
  - kind: T
    eta_rad: 0.1
    cell: [0, 0, 0]
"""
    with pytest.raises(SchemaError) as info:
        config.parse_config(text)
    assert any("share a grid cell" in p for p in info.value.problems)


def test_unknown_key_rejected_with_location():
    text = """
modules:
  - kind: T
    eta_rad: 0.1
    cell: [0, 0, 0]
    masse_kg: 1.0
"""
    with pytest.raises(SchemaError) as info:
        config.parse_config(text)
    message = str(info.value)
    assert "unknown key 'masse_kg'" in message
    assert "line" in message


def test_kind_specific_keys_enforced():
    text = """
modules:
  - kind: R
    eta_rad: 0.3
    cell: [0, 0, 0]
"""
    with pytest.raises(SchemaError) as info:
        config.parse_config(text)
    assert any("not valid for an R module" in p for p in info.value.problems)


def test_invalid_yaml_raises_parse_error():
    with pytest.raises(ParseError):
        config.parse_config("modules: [unclosed")


def test_multiple_problems_reported_together():
    text = """
modules:
  - kind: Q
    cell: [0, 0]
physical:
  arm_m: -1
"""
    with pytest.raises(SchemaError) as info:
        config.parse_config(text)
    assert len(info.value.problems) >= 3


def test_custom_module_roundtrip():
    text = """
modules:
  - kind: custom
    cell: [0, 0, 0]
    propellers:
      - {tilt_axis: [0.70710678, 0.70710678, 0], tilt_angle_rad: 0.5, spin: 1}
      - {tilt_axis: [0, 0, 1], tilt_angle_rad: 0.0, spin: -1}
      - {tilt_axis: [0, 0, 1], tilt_angle_rad: 0.0, spin: 1}
      - {tilt_axis: [0, 0, 1], tilt_angle_rad: 0.0, spin: -1}
"""
    cfg = config.parse_config(text)
    structure = config.build_structure(cfg)
    assert structure.n_rotors == 4
    # one tilted rotor breaks torque balance
    from modquad import vehicle
    report = vehicle.check_torque_balance(structure.placements[0].module)
    assert not report.balanced


def test_render_parse_roundtrip():
    for name in ("exp1.cfg", "exp4.cfg", "sim3.cfg", "fig5d.cfg"):
        cfg = config.load_config(FIXTURES / name)
        rendered = config.render_config(cfg)
        again = config.parse_config(rendered)
        assert config.render_config(again) == rendered
        assert [m.cell for m in again.modules] == [m.cell for m in cfg.modules]
        assert again.physical == cfg.physical
        assert np.array_equal(again.gains.k_att, cfg.gains.k_att)
        if cfg.scenario is not None:
            assert again.scenario.trajectory == cfg.scenario.trajectory
            assert again.scenario.duration_s == cfg.scenario.duration_s


def test_build_structure_matches_fixture_layout():
    cfg = config.load_config(FIXTURES / "sim1.cfg")
    structure = config.build_structure(cfg)
    assert structure.n_modules == 16
    assert structure.mass == pytest.approx(16 * 0.135)
    analysis = actuation.analyze_structure(structure)
    assert analysis.controllable_dof == 6


def test_build_trajectory_requires_scenario():
    cfg = config.load_config(FIXTURES / "fig5d.cfg")
    with pytest.raises(SchemaError):
        config.build_trajectory(cfg, 6)


def test_module_yaw_is_applied():
    text = """
modules:
  - kind: R
    tilt_axis: [0, 1, 0]
    tilt_angle_rad: 0.3
    yaw_rad: 1.5707963267948966
    cell: [0, 0, 0]
"""
    cfg = config.parse_config(text)
    structure = config.build_structure(cfg)
    # a quarter-turn yaw moves the lean from +x toward +y
    axis = structure.rotor_axes[0]
    assert axis[1] == pytest.approx(np.sin(0.3), abs=1e-12)
    assert abs(axis[0]) < 1e-12
