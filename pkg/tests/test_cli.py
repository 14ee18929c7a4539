import json
import re
from pathlib import Path

import numpy as np

from eccmark.cli import main
from eccmark.geometry import Window, write_pattern_csv, read_pattern_csv
from eccmark.scenarios import ScenarioSpec, simulate_scenario_pattern


def make_csv(tmp_path, n=12, seed=0, name="pattern.csv"):
    pat = simulate_scenario_pattern(ScenarioSpec("csr", "random", n=n, seed=seed))
    path = tmp_path / name
    write_pattern_csv(pat, path)
    return path


def read_tree(root: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(root.iterdir()) if p.is_file()}


def test_test_command_two_points(tmp_path, capsys):
    csv = tmp_path / "two.csv"
    csv.write_text("x,y,mark\n1,1,0\n4,1,8\n")
    out = tmp_path / "out"
    rc = main(["test", "--input", str(csv), "--window", "0", "10", "0", "10",
               "--s", "9", "--seed", "1", "--out", str(out)])
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["schema"] == 1
    assert len(report["tests"]) == 2
    for t in report["tests"]:
        assert 0.1 <= t["p_value"] <= 1.0
    for name in ("curves.csv", "report.json", "zscores.csv", "figure.svg"):
        assert (out / name).exists()
    lines = capsys.readouterr().out.strip().splitlines()
    pattern = re.compile(r"^null=\S+ p=\S+ eps_crit=\S+ rank=\S+$")
    assert len(lines) == 2
    assert all(pattern.match(line) for line in lines)


def test_test_command_missing_mark_column(tmp_path, capsys):
    csv = tmp_path / "bad.csv"
    csv.write_text("x,y\n1,1\n2,2\n")
    rc = main(["test", "--input", str(csv), "--infer-window", "--s", "9",
               "--out", str(tmp_path / "o")])
    assert rc != 0
    assert "mark" in capsys.readouterr().err


def test_test_command_malformed_row(tmp_path, capsys):
    csv = tmp_path / "bad.csv"
    csv.write_text("x,y,mark\n1,1,2\nx,y\n")
    rc = main(["test", "--input", str(csv), "--infer-window", "--s", "9",
               "--out", str(tmp_path / "o")])
    assert rc != 0
    assert "line 3" in capsys.readouterr().err


def test_simulate_writes_csv(tmp_path, capsys):
    out = tmp_path / "sim.csv"
    rc = main(["simulate", "--spatial", "csr", "--marks", "random", "--n", "25",
               "--seed", "3", "--out", str(out)])
    assert rc == 0
    pat = read_pattern_csv(out, window=Window(0, 10, 0, 10))
    assert pat.n == 25


def test_simulate_hardcore_verify(tmp_path):
    out = tmp_path / "hc.csv"
    rc = main(["simulate", "--spatial", "hardcore", "--marks", "random",
               "--n", "30", "--seed", "4", "--verify", "--out", str(out)])
    assert rc == 0
    pat = read_pattern_csv(out, window=Window(0, 10, 0, 10))
    d = np.sqrt(((pat.points[:, None] - pat.points[None, :]) ** 2).sum(-1))
    assert d[np.triu_indices(pat.n, 1)].min() >= 0.9


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["simulate", "--spatial", "thomas", "--marks", "positive",
                     "--n", "40", "--seed", "5", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_scenario_command_outputs(tmp_path, capsys):
    out = tmp_path / "scen"
    rc = main(["scenario", "--spatial", "csr", "--marks", "random", "--n", "20",
               "--s", "9", "--seed", "6", "--out", str(out)])
    assert rc == 0
    for name in ("pattern.csv", "report.json", "curves.csv", "zscores.csv",
                 "figure.svg", "panel.svg"):
        assert (out / name).exists(), name
    assert len(capsys.readouterr().out.strip().splitlines()) == 2


def test_bands_command(tmp_path):
    out = tmp_path / "bands"
    rc = main(["bands", "--spatial", "csr", "--marks", "random", "--n", "20",
               "--B", "6", "--K", "20", "--seed", "7", "--out", str(out)])
    assert rc == 0
    lines = (out / "bands.csv").read_text().strip().splitlines()
    assert lines[0].startswith("epsilon,median_plain")
    assert len(lines) == 21


def test_zscores_command_explicit_epsilon(tmp_path):
    csv = make_csv(tmp_path, n=15, seed=8)
    out = tmp_path / "z"
    rc = main(["zscores", "--input", str(csv), "--window", "0", "10", "0", "10",
               "--epsilon-crit", "3.0", "--s", "19", "--seed", "8", "--out", str(out)])
    assert rc == 0
    lines = (out / "zscores.csv").read_text().strip().splitlines()
    assert lines[0] == "index,x,y,mark,obs_degree,perm_mean,perm_sd,z"
    assert len(lines) == 16


def test_cli_rerun_byte_identical(tmp_path):
    csv = make_csv(tmp_path, n=14, seed=9)
    args = ["test", "--input", str(csv), "--window", "0", "10", "0", "10",
            "--s", "19", "--seed", "11"]
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(args + ["--threads", "1", "--out", str(out1)]) == 0
    assert main(args + ["--threads", "3", "--out", str(out2)]) == 0
    t1, t2 = read_tree(out1), read_tree(out2)
    assert t1.keys() == t2.keys()
    for name in t1:
        assert t1[name] == t2[name], name


def test_scenario_config_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "spatial": {"tag": "hpp", "rate": 0.3},
        "marks": {"tag": "iid_uniform", "lo": 0, "hi": 8},
        "n": 18, "seed": 12,
    }))
    out = tmp_path / "sim.csv"
    rc = main(["simulate", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    pat = read_pattern_csv(out, infer_window=True)
    assert pat.n == 18
