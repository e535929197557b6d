import json
from pathlib import Path

import numpy as np
import pytest

from modquad import cli

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def write_hover_config(path, duration=0.5, extra=""):
    path.write_text(f"""
modules:
  - kind: T
    eta_rad: 0.7853981633974483
    cell: [0, 0, 0]
  - kind: T
    eta_rad: -0.7853981633974483
    cell: [0, 1, 0]
  - kind: T
    eta_rad: -0.7853981633974483
    cell: [1, 0, 0]
  - kind: T
    eta_rad: 0.7853981633974483
    cell: [1, 1, 0]
gains:
  k_pos: [6, 6, 6]
  k_vel: [4, 4, 4]
  k_att: [100, 100, 100]
  k_omega: [20, 20, 20]
scenario:
  trajectory:
    kind: hover
    point_m: [0.0, 0.0, 0.5]
  duration_s: {duration}
  dt_ctrl_s: 0.002
  dt_sim_s: 0.001
{extra}""")


def test_analyze_exp1_reports_dof4(capsys):
    code = cli.main(["analyze", str(FIXTURES / "exp1.cfg"), "--format", "json"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["controllable_dof"] == 4
    rf = np.array(payload["f_frame"])
    expected = np.array([
        [np.cos(np.pi / 18), 0.0, np.sin(np.pi / 18)],
        [0.0, 1.0, 0.0],
        [-np.sin(np.pi / 18), 0.0, np.cos(np.pi / 18)],
    ])
    assert np.max(np.abs(rf - expected)) < 1e-9


def test_analyze_exp2_reports_dof5(capsys):
    code = cli.main(["analyze", str(FIXTURES / "exp2.cfg"), "--format", "json"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["controllable_dof"] == 5
    assert np.max(np.abs(np.array(payload["f_frame"]) - np.eye(3))) < 1e-9


def test_analyze_inapplicable_design_exits_3(capsys):
    code = cli.main(["analyze", str(FIXTURES / "fig5d.cfg")])
    assert code == 3
    err = capsys.readouterr().err
    assert "inapplicable" in err


def test_analyze_schema_error_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("modules: []\n")
    code = cli.main(["analyze", str(bad)])
    assert code == 2


def test_analyze_text_output(capsys):
    code = cli.main(["analyze", str(FIXTURES / "exp4.cfg")])
    assert code == 0
    out = capsys.readouterr().out
    assert "controllable DOF: 6" in out
    assert "balanced" in out


def test_simulate_writes_csv(tmp_path, capsys):
    cfg = tmp_path / "hover.cfg"
    write_hover_config(cfg)
    out = tmp_path / "run.csv"
    code = cli.main(["simulate", str(cfg), "-o", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("t,rx,ry,rz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,"
                               "rdx,rdy,rdz,yaw_d,pitch_d,u1")
    assert lines[0].endswith(",sat")
    assert len(lines) == 1 + int(0.5 / 0.002) + 1


def test_simulate_zero_duration_single_row(tmp_path):
    cfg = tmp_path / "hover.cfg"
    write_hover_config(cfg, duration=0.0)
    out = tmp_path / "run.csv"
    assert cli.main(["simulate", str(cfg), "-o", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 2


def test_simulate_missing_scenario_exits_2(tmp_path, capsys):
    cfg = tmp_path / "nos.cfg"
    cfg.write_text("modules:\n  - kind: T\n    eta_rad: 0.0\n    cell: [0, 0, 0]\n")
    code = cli.main(["simulate", str(cfg), "-o", str(tmp_path / "x.csv")])
    assert code == 2


def test_simulate_deterministic_bytes(tmp_path):
    cfg = tmp_path / "hover.cfg"
    write_hover_config(cfg, duration=0.3)
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert cli.main(["simulate", str(cfg), "-o", str(out1)]) == 0
    assert cli.main(["simulate", str(cfg), "-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_simulate_multiple_configs_with_jobs(tmp_path):
    cfg1 = tmp_path / "one.cfg"
    cfg2 = tmp_path / "two.cfg"
    write_hover_config(cfg1, duration=0.2)
    write_hover_config(cfg2, duration=0.2)
    outdir = tmp_path / "runs"
    code = cli.main(["simulate", str(cfg1), str(cfg2), "-o", str(outdir),
                     "--jobs", "2"])
    assert code == 0
    assert (outdir / "one.csv").exists()
    assert (outdir / "two.csv").exists()


def test_metrics_reports_errors(tmp_path, capsys):
    cfg = tmp_path / "hover.cfg"
    write_hover_config(cfg, duration=0.5, extra="  skip_s: 0.1\n")
    out = tmp_path / "run.csv"
    assert cli.main(["simulate", str(cfg), "-o", str(out)]) == 0
    capsys.readouterr()
    code = cli.main(["metrics", str(out), "--skip-s", "0.1", "--format", "json"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert max(payload["max_position_error_m"]) < 1e-6
    assert not payload["diverged"]


def test_metrics_with_frame_config(tmp_path, capsys):
    csv = tmp_path / "run.csv"
    code = cli.main(["simulate", str(FIXTURES / "exp1.cfg"), "-o", str(csv)])
    assert code == 0
    capsys.readouterr()
    code = cli.main(["metrics", str(csv), "--config", str(FIXTURES / "exp1.cfg"),
                     "--format", "json"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert max(payload["max_position_error_m"]) < 0.05
    assert payload["max_attitude_error_deg"][2] < 2.0


def test_metrics_malformed_file_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n1,2\n")
    assert cli.main(["metrics", str(bad)]) == 2


def test_analyze_out_of_range_eta_exits_2(tmp_path, capsys):
    bad = tmp_path / "steep.cfg"
    bad.write_text("modules:\n  - kind: T\n    eta_rad: 1.6\n    cell: [0, 0, 0]\n")
    code = cli.main(["analyze", str(bad)])
    assert code == 2
    assert "pi/2" in capsys.readouterr().err
