import json
import subprocess
import sys

import pytest

from oranlb.cli import main
from oranlb.core import Scenario
from oranlb.dataio import read_snapshot_csv, state_to_dict


@pytest.fixture()
def cfg(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"forest": {"n_trees": 8, "max_depth": 6}, "cv_folds": 3}))
    return str(p)


@pytest.fixture()
def data(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["generate", "--scenario", "4", "--ues", "30", "--snapshots", "400",
                 "--seed", "42", "--out", str(out)]) == 0
    return out


def test_generate_twice_identical(tmp_path, data):
    again = tmp_path / "e.csv"
    main(["generate", "--scenario", "4", "--ues", "30", "--snapshots", "400", "--seed", "42",
          "--out", str(again)])
    assert data.read_bytes() == again.read_bytes()
    assert (tmp_path / "d.csv.meta.json").exists()


def test_generate_parallel_matches_serial(tmp_path, data):
    par = tmp_path / "p.csv"
    main(["generate", "--scenario", "4", "--snapshots", "400", "--seed", "42", "--n-jobs", "2",
          "--out", str(par)])
    assert data.read_bytes() == par.read_bytes()


def test_label_then_evaluate(tmp_path, data, cfg):
    assert main(["label", "--data", str(data), "--policy", "moderate"]) == 0
    _, labels = read_snapshot_csv(data)
    assert set(labels) == {"label_moderate"}
    out = tmp_path / "bundle.json"
    assert main(["--config", cfg, "evaluate", "--data", str(data), "--policy", "moderate",
                 "--seed", "1", "--out", str(out)]) == 0
    b = json.loads(out.read_text())
    assert len(b["baselines"]) == 6
    assert all(len(m["report"]["confusion"]) == 3 for m in b["models"].values())
    assert "improvement_pct" in b["forest_vs_best_baseline"]
    rep = tmp_path / "rep"
    assert main(["report", "--bundle", str(out), "--out-dir", str(rep)]) == 0
    assert (rep / "category_impact.csv").exists()


def test_train_and_optimize(tmp_path, data, cfg, capsys):
    model = tmp_path / "m.json"
    rep = tmp_path / "r.json"
    assert main(["--config", cfg, "train", "--data", str(data), "--policy", "aggressive",
                 "--model", "forest", "--model-out", str(model), "--seed", "2",
                 "--report", str(rep)]) == 0
    assert json.loads(rep.read_text())["test"]["f1_macro"] >= 0
    states, _ = read_snapshot_csv(data)
    s = next(x for x in states if x.config.mask.sum() == 4)
    sfile = tmp_path / "state.json"
    sfile.write_text(json.dumps(state_to_dict(s, Scenario(n_rus=4))))
    capsys.readouterr()
    assert main(["optimize", "--state", str(sfile), "--model", str(model),
                 "--location", "energy_priority", "--mode", "exhaustive"]) == 0
    lines = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert lines[0]["record"] == "decision" and lines[0]["policy"] == "aggressive"
    assert len(lines) == 1 + 15
    assert main(["optimize", "--data", str(data), "--snapshot-id", str(s.snapshot_id),
                 "--model", "oracle", "--out", str(tmp_path / "dec.txt")]) == 0


def test_train_logreg(tmp_path, data):
    assert main(["train", "--data", str(data), "--policy", "moderate", "--model", "logreg",
                 "--model-out", str(tmp_path / "lr.json"), "--seed", "0",
                 "--report", str(tmp_path / "r.json")]) == 0


def test_usage_errors(tmp_path, data, capsys):
    assert main(["train", "--data", str(data), "--policy", "moderate",
                 "--model-out", str(tmp_path / "m.json")]) == 1  # seed is mandatory
    assert main(["label", "--data", str(data), "--policy", "balanced"]) == 1
    assert main(["optimize", "--model", "oracle"]) == 1
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["generate", "--snapshots", "3", "--seed", "1", "--out", "x", "--bogus"])
    assert e.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_data_errors(tmp_path, data):
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,snapshot\n")
    assert main(["label", "--data", str(bad), "--policy", "moderate"]) == 2
    assert main(["featurize", "--data", str(tmp_path / "missing.csv"), "--out", "x"]) == 2
    empty = tmp_path / "b.json"
    empty.write_text("{not json")
    assert main(["report", "--bundle", str(empty), "--out-dir", str(tmp_path)]) == 2
    header_only = tmp_path / "h.csv"
    header_only.write_text(data.read_text().splitlines()[0] + "\n")
    assert main(["evaluate", "--data", str(header_only), "--policy", "moderate", "--seed", "1",
                 "--out", str(tmp_path / "o.json")]) == 2


def test_featurize(tmp_path, data):
    out = tmp_path / "f.csv"
    assert main(["featurize", "--data", str(data), "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 401


def test_module_entry_point_exit_code(tmp_path):
    r = subprocess.run([sys.executable, "-m", "oranlb", "nosuch"], capture_output=True, text=True)
    assert r.returncode == 1
    assert "usage" in r.stderr
