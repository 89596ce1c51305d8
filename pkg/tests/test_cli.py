import json

import pytest

from pplab.cli import ConfigError, ExperimentConfig, env_overrides, main, validate


def test_ini_round_trip():
    cfg = ExperimentConfig(subcommand="energy", k=2, n_per_axis=33, params={"delta": 0.2}, eps=[2, 8],
                           points=[0.25 + 0.1j], lam=3.5)
    back = ExperimentConfig.from_ini(cfg.to_ini())
    assert back == cfg


def test_unknown_key_rejected():
    with pytest.raises(ConfigError) as e:
        ExperimentConfig.from_ini("[grid]\nwidth = 3\n")
    assert e.value.constraint == "unknown_key"


def test_env_override():
    cfg = env_overrides(ExperimentConfig(), {"PPLAB_ALPHA": "1.25", "PPLAB_NORMALIZE": "false", "PPLAB_EPS": "[4, 8]"})
    assert cfg.alpha == 1.25 and cfg.normalize is False and cfg.eps == [4, 8]


@pytest.mark.parametrize("change,constraint", [
    ({"alpha": 2.0}, "1 <= alpha < 2"),
    ({"lam": 2.5}, "2^alpha < lambda < 4"),
    ({"n_per_axis": 64}, "n_per_axis odd and >= 17"),
    ({"delta": 0.5}, "0 < delta < 1/2"),
    ({"eps": [1]}, "eps >= 2h"),
    ({"subcommand": "majorant", "entry": "nope"}, "entry in gallery"),
])
def test_validation_names_the_constraint(change, constraint):
    cfg = ExperimentConfig(**change)
    with pytest.raises(ConfigError) as e:
        validate(cfg)
    assert e.value.constraint == constraint


def test_bad_config_exits_2(tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["majorant", "--out", str(out), "--resolution", "20"])
    assert code == 2
    err = json.loads(capsys.readouterr().out)
    assert err["constraint"] == "n_per_axis odd and >= 17"
    assert json.loads((out / "error.json").read_text()) == err


def test_gallery_listing(capsys):
    assert main(["gallery", "list"]) == 0
    names = {e["name"] for e in json.loads(capsys.readouterr().out)}
    assert {"loglog", "linear", "logmax"} <= names
    assert main(["gallery", "show", "nope"]) == 2


def test_small_run_is_deterministic(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}"
        code = main(["capacity", "--out", str(out), "--resolution", "65", "--seed", "7"])
        assert code == 0
        outs.append(((out / "report.json").read_bytes(), (out / "capacity.csv").read_bytes()))
    assert outs[0] == outs[1]
    report = json.loads(outs[0][0])
    assert report["schema_version"] == 1 and report["status"] == "pass"
    assert outs[0][1].startswith(b"# schema_version=1\n")


def test_config_file_and_flags(tmp_path):
    cfg_path = tmp_path / "run.ini"
    cfg_path.write_text(ExperimentConfig(radius=0.4).to_ini())
    out = tmp_path / "o"
    assert main(["capacity", "--config", str(cfg_path), "--out", str(out), "--resolution", "129"]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["config"]["radius"] == 0.4 and rep["config"]["n_per_axis"] == 129
