import json
from pathlib import Path

import numpy as np
import pytest

from robustpi.cli import main, parse_config, read_config, shipped_configs
from robustpi.errors import ConfigError
from robustpi.indicators import IndicatorReport
from robustpi.metrics import MetricsReport
from robustpi.tuner import TuningResult

DATA = Path(__file__).parent / "data"


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path), "--quiet"])


def write_cfg(tmp_path, cfg) -> str:
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def aircraft_cfg(**over):
    cfg = read_config("aircraft")
    cfg.update(over)
    return cfg


def test_shipped_configs_listed():
    assert {"aircraft", "aircraft_optimize", "duffing", "toy"} <= set(shipped_configs())


def test_all_shipped_configs_parse():
    for name in shipped_configs():
        parse_config(read_config(name))


def test_indicators_json(tmp_path):
    assert run(tmp_path, "indicators", "--config", "aircraft") == 0
    d = json.loads((tmp_path / "indicators.json").read_text())
    assert d["hurwitz"] is True
    rep = IndicatorReport.from_dict(d)
    assert rep.to_dict() == d
    assert d["i_k"] == pytest.approx(4.9244, rel=0.01)


def test_zero_gains_exit_2(tmp_path):
    z = {"rows": 2, "cols": 2, "data": [[0, 0], [0, 0]]}
    cfg = write_cfg(tmp_path, aircraft_cfg(gains={"kp": z, "ki": z}))
    assert run(tmp_path / "o", "indicators", "--config", cfg) == 2
    assert json.loads((tmp_path / "o" / "indicators.json").read_text())["hurwitz"] is False


def test_malformed_json_exit_1(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"plant": {"name": "aircraft",')
    assert run(tmp_path, "indicators", "--config", str(path)) == 1
    assert "invalid JSON" in capsys.readouterr().err


def test_empty_plant_exit_1(tmp_path):
    assert run(tmp_path, "simulate", "--config", write_cfg(tmp_path, aircraft_cfg(plant={}))) == 1


@pytest.mark.parametrize("mutate", [
    lambda c: c.update(extra={}),
    lambda c: c["plant"].update(name="boat"),
    lambda c: c["gains"]["kp"].update(rows=3),
    lambda c: c["sim"].update(step=1.0),
    lambda c: c["gains"].update(optimize=True),
    lambda c: c["disturbance"].update(kind=["sin", "tan"]),
])
def test_config_errors_exit_1(tmp_path, mutate):
    cfg = aircraft_cfg()
    mutate(cfg)
    assert run(tmp_path, "indicators", "--config", write_cfg(tmp_path, cfg)) == 1


def test_missing_config_exit_1(tmp_path):
    assert run(tmp_path, "indicators", "--config", str(tmp_path / "nope.json")) == 1


def test_matrix_dims_checked():
    cfg = aircraft_cfg()
    cfg["gains"]["ki"]["data"] = [[1.0, 2.0]]
    with pytest.raises(ConfigError, match="shape"):
        parse_config(cfg)


def test_simulate_outputs(tmp_path):
    out = tmp_path / "new" / "dir"
    assert run(out, "simulate", "--config", "aircraft") == 0
    header = (out / "trace.csv").read_text().splitlines()[0]
    assert header + "\n" == (DATA / "trace_header_aircraft.csv").read_text()
    d = json.loads((out / "metrics.json").read_text())
    assert MetricsReport.from_dict(d, ["e_chi", "e_gamma"]).to_dict() == d
    assert (out / "violations.csv").read_text().startswith("t,channel,kind\n")


def test_rerun_overwrites_identically(tmp_path):
    assert run(tmp_path, "simulate", "--config", "aircraft") == 0
    first = (tmp_path / "trace.csv").read_bytes()
    assert run(tmp_path, "simulate", "--config", "aircraft") == 0
    assert (tmp_path / "trace.csv").read_bytes() == first


def test_sweeps(tmp_path):
    assert run(tmp_path, "sweep", "--config", "aircraft", "--kind", "delta_k") == 0
    lines = (tmp_path / "delta_k.csv").read_text().splitlines()
    assert lines[0] + "\n" == (DATA / "delta_k_header.csv").read_text()
    assert len(lines) == 8
    assert run(tmp_path, "sweep", "--config", "aircraft", "--kind", "disturbance") == 0
    lines = (tmp_path / "disturbance.csv").read_text().splitlines()
    assert lines[0] + "\n" == (DATA / "disturbance_header.csv").read_text()
    assert len(lines) == 1 + 9 * 4


def test_optimize_toy(tmp_path):
    assert run(tmp_path, "optimize", "--config", "toy", "--seed", "3") == 0
    d = json.loads((tmp_path / "tuning.json").read_text())
    assert TuningResult.from_dict(d).to_dict() == d
    hist = np.loadtxt(tmp_path / "fitness_history.csv", delimiter=",", skiprows=1)
    assert np.all(np.diff(hist[:, 1]) >= 0)


def test_seed_override_changes_run(tmp_path):
    run(tmp_path / "a", "optimize", "--config", "toy", "--seed", "1")
    run(tmp_path / "b", "optimize", "--config", "toy", "--seed", "2")
    a = json.loads((tmp_path / "a" / "tuning.json").read_text())
    b = json.loads((tmp_path / "b" / "tuning.json").read_text())
    assert a["history"] != b["history"]


def test_infeasible_optimize_exit_2(tmp_path):
    cfg = read_config("toy")
    cfg["tuning"]["i_star"] = 0.0
    cfg["tuning"]["ga"].update(population=8, generations=3)
    assert run(tmp_path, "optimize", "--config", write_cfg(tmp_path, cfg)) == 2


def test_verify_duffing(tmp_path):
    assert run(tmp_path, "verify-duffing", "--config", "duffing") == 0
    d = json.loads((tmp_path / "duffing_verdict.json").read_text())
    assert d["verdict"]["dominated"] is True
    assert d["verdict"]["final_quarter_max"] < d["verdict"]["radius"]


def test_verify_duffing_wrong_plant(tmp_path):
    assert run(tmp_path, "verify-duffing", "--config", "aircraft") == 1


def test_plots_written(tmp_path):
    assert run(tmp_path, "simulate", "--config", "aircraft", "--plots") == 0
    assert (tmp_path / "trace.png").stat().st_size > 1000
