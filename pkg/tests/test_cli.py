import json
import subprocess
import sys

import pytest

from subterra.cli import main
from subterra.config import ConfigError, load_config
from subterra.pipeline import derive_seed
from subterra.scenario import ScenarioKind

SMALL = {
    "city": {"grid": 9, "total_parcels": 1500, "hub_ring": 1800.0},
    "solver": {"iterations": 20, "shuttle_iterations": 10},
    "replications": 1,
}


@pytest.fixture
def small(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(SMALL))
    return path


def test_config_defaults():
    cfg = load_config(environ={})
    assert cfg.replications == 3 and cfg.shuttle.carriers == 4 and cfg.shuttle.tunnel_speed == 10
    assert cfg.scenarios == list(ScenarioKind)


def test_config_rejects_unknown_keys(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"sead": 1}))
    with pytest.raises(ConfigError, match="sead"):
        load_config(p, environ={})
    p.write_text(json.dumps({"solver": {"iteration": 5}}))
    with pytest.raises(ConfigError):
        load_config(p, environ={})


def test_config_precedence(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"seed": 1, "replications": 2, "out": "a"}))
    env = {"SUBTERRA_SEED": "7", "SUBTERRA_SCENARIO": "whu,bc"}
    cfg = load_config(p, {"replications": 5}, environ=env)
    assert (cfg.seed, cfg.replications, cfg.out) == (7, 5, "a")
    assert cfg.scenarios == [ScenarioKind.WHU, ScenarioKind.BC]


def test_config_rejects_zero_replications():
    with pytest.raises(ConfigError):
        load_config(overrides={"replications": 0}, environ={})


def test_missing_config_file_exit_code(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_input_path(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"demand": str(tmp_path / "gone.json")}))
    assert main(["generate", "--config", str(p), "--out", str(tmp_path / "o"), "-q"]) == 1
    assert "gone.json" in capsys.readouterr().err


def test_seed_derivation_stable():
    assert derive_seed(0, "demand", 1) == derive_seed(0, "demand", 1)
    assert derive_seed(0, "demand", 1) != derive_seed(0, "demand", 2)
    assert 0 <= derive_seed("x") < 2 ** 63


def test_stages_one_by_one(small, tmp_path, capsys):
    out = tmp_path / "out"
    common = ["--config", str(small), "--out", str(out), "--scenario", "bc,whu-b", "-q"]
    for cmd in ("generate", "plan", "simulate", "shuttle", "report"):
        assert main([cmd] + common) == 0, cmd
    bc = {p.name for p in (out / "bc" / "0").iterdir()}
    assert not any(name.startswith("shuttle") for name in bc)
    assert {"shuttle_shipments.csv", "shuttle_executions.csv"} <= {p.name for p in (out / "whu-b" / "0").iterdir()}
    capsys.readouterr()
    assert main(["compare", "bc", "whu-b"] + common) == 0
    text = capsys.readouterr().out
    assert "WHU_B vs BC" in text and "co2_total_t" in text


def test_rerun_from_disk_is_identical(small, tmp_path):
    out = tmp_path / "out"
    common = ["--config", str(small), "--out", str(out), "--scenario", "shu", "-q"]
    assert main(["run"] + common) == 0
    before = {p: p.read_bytes() for p in out.rglob("*") if p.is_file()}
    assert main(["simulate"] + common) == 0
    assert main(["shuttle"] + common) == 0
    after = {p: p.read_bytes() for p in out.rglob("*") if p.is_file()}
    assert after == before


def test_replication_dirs(small, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(small), "--out", str(out), "--scenario", "whu-b",
                 "--replications", "3", "-q"]) == 0
    assert sorted(p.name for p in (out / "whu-b").iterdir()) == ["0", "1", "2", "kpi_mean.json"]
    mean = json.loads((out / "whu-b" / "kpi_mean.json").read_text())
    assert mean["replications"] == 3


def test_stage_failure_is_named(small, tmp_path, capsys):
    out = tmp_path / "out"
    common = ["--config", str(small), "--out", str(out), "--scenario", "whu", "-q"]
    assert main(["generate"] + common) == 0
    (out / "whu" / "0" / "demand.json").write_text("{}")
    assert main(["plan"] + common) == 1
    assert "stage plan failed" in capsys.readouterr().err


def test_module_entry_point(small, tmp_path):
    res = subprocess.run([sys.executable, "-m", "subterra", "generate", "--config", str(small),
                          "--out", str(tmp_path / "o"), "--scenario", "bc"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "subterra stage=generate scenario=BC rep=0 wall_s=" in res.stderr
