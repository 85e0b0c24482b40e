import json
import os

import pytest

from slipsteer.cli import main
from slipsteer.scenario import ConfigError, load_scenario

SCENARIO_DIR = os.path.join(os.path.dirname(__file__), "..", "scenarios")
L_PATH_CFG = os.path.join(SCENARIO_DIR, "l_path_prop.cfg")


def _write_cfg(tmp_path, body: str) -> str:
    p = tmp_path / "scn.cfg"
    p.write_text(body)
    return str(p)


def test_simulate_happy_path(tmp_path):
    out = tmp_path / "runs"
    rc = main(["simulate", "--scenario", L_PATH_CFG, "--out", str(out)])
    assert rc == 0
    assert (out / "trace.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["controller"] == "PROP"
    assert summary["flags"]["reached_path_end"]
    assert len(summary["segments"]) == 3
    # the manifest hash is stamped on every artifact
    assert summary["manifest"] in (out / "trace.csv").read_text()[:80]


def test_simulate_missing_required_field(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, "[run]\nname = broken\n")
    rc = main(["simulate", "--scenario", cfg, "--out", str(tmp_path / "o")])
    assert rc == 1
    err = capsys.readouterr().err
    assert "[run]" in err and "controller" in err


def test_simulate_bad_value_names_field(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, "[run]\ncontroller = PROP\ndt = fast\n")
    rc = main(["simulate", "--scenario", cfg, "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "dt" in capsys.readouterr().err


def test_load_scenario_unknown_controller(tmp_path):
    cfg = _write_cfg(tmp_path, "[run]\ncontroller = MPC\n")
    with pytest.raises(ConfigError):
        load_scenario(cfg)


def test_simulate_deterministic_summaries(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        rc = main(["simulate", "--scenario", L_PATH_CFG, "--out", str(out),
                   "--controller", "PROP-S", "--seed", "7"])
        assert rc == 0
        outs.append((out / "summary.json").read_bytes())
    assert outs[0] == outs[1]


def test_compare_structure(tmp_path):
    cfg = _write_cfg(tmp_path, "\n".join([
        "[run]", "controller = PROP", "duration = 6", "",
        "[path]", "segments = line length=80", "",
        "[speed]", "profile = 0:8", "",
        "[initial]", "y_e0 = 0.3",
    ]))
    out = tmp_path / "cmp"
    rc = main(["compare", "--scenario", cfg, "--controllers", "B,PROP",
               "--seeds", "2", "--out", str(out)])
    assert rc == 0
    table = (out / "comparison.txt").read_text()
    assert "E_RMS" in table and "%C" in table
    csv = (out / "comparison.csv").read_text()
    assert csv.splitlines()[0] == "controller,seg,metric,avg,std"
    assert (out / "compare_e_rms.svg").exists()
    agg = json.loads((out / "comparison.json").read_text())
    assert [a["controller"] for a in agg["aggregates"]] == ["B", "PROP"]
    assert agg["seeds"] == 2


def test_compare_rejects_single_controller(tmp_path, capsys):
    rc = main(["compare", "--scenario", L_PATH_CFG, "--controllers", "PROP",
               "--out", str(tmp_path / "x")])
    assert rc == 1


def test_figures_fast_set(tmp_path):
    out = tmp_path / "figs"
    assert main(["figures", "--figure", "fig4", "--out", str(out)]) == 0
    assert (out / "fig4.csv").exists() and (out / "fig4.svg").exists()
    assert main(["figures", "--figure", "fig13", "--out", str(out)]) == 0
    body = (out / "fig13.csv").read_text().splitlines()
    assert body[0] == "S_kin,W_dot"
    vals = [float(line.split(",")[1]) for line in body[1:]]
    assert all(v < 0 for v in vals)


def test_scenario_round_trip_fields():
    scn = load_scenario(os.path.join(SCENARIO_DIR, "comprehensive.cfg"))
    assert scn.controller == "PROP-S"
    assert scn.path_name == "comprehensive"
    assert scn.design_speed_range == (8.0, 10.0)
    assert scn.disturbances.pose_noise_std == pytest.approx(0.02)
    assert scn.speed.v(5.0) == pytest.approx(10.0)
    assert scn.kin_gains.t_end == pytest.approx(5.0)
