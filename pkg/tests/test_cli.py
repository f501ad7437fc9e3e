import builtins
import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from fedgl.cli import main
from fedgl.config import ConfigError, ExperimentConfig, config_text, parse_config
from fedgl.evaluation import read_metrics_csv

SMALL = """
d = 10
clients = 3
q = 0.5
n_samples = 30
seed = 3
rounds = 12
"""


def write_config(tmp_path, text=SMALL, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def dir_digest(root: Path) -> dict:
    out = {}
    for path in sorted(root.rglob("*")):
        if path.is_file():
            out[str(path.relative_to(root))] = hashlib.sha256(path.read_bytes()).hexdigest()
    return out


def test_config_parsing_and_round_trip(tmp_path):
    cfg = parse_config("lambda = 0.25\nnu = 3 # inline comment\nn_samples = 5,6,7\nclients = 3")
    assert cfg.lambda_ == 0.25 and cfg.nu == 3.0
    assert cfg.n_samples == (5, 6, 7)
    text = config_text(cfg)
    again = parse_config(text)
    assert again == cfg


def test_config_rejects_unknown_and_bad_values():
    with pytest.raises(ConfigError):
        parse_config("betta = 1")
    with pytest.raises(ConfigError):
        parse_config("beta = fast")
    with pytest.raises(ConfigError):
        parse_config("q = 1.5")
    with pytest.raises(ConfigError):
        parse_config("n_samples = 5,6\nclients = 3")
    with pytest.raises(ConfigError):
        parse_config("just some words")


def test_generate_writes_dataset(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "data"
    assert main(["generate", "--config", str(cfg), "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["clients"] == 3 and manifest["seed"] == 3
    for i in range(3):
        X = np.loadtxt(out / f"signals_client_{i}.csv", delimiter=",")
        assert X.shape == (10, 30)
    assert (out / "config.txt").exists()


def test_generate_marks_homogeneous(tmp_path):
    cfg = write_config(tmp_path, SMALL.replace("q = 0.5", "q = 1"))
    out = tmp_path / "data"
    main(["generate", "--config", str(cfg), "--out", str(out)])
    assert json.loads((out / "manifest.json").read_text())["homogeneous"] is True


def test_generate_deterministic(tmp_path):
    cfg = write_config(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["generate", "--config", str(cfg), "--out", str(out1)])
    main(["generate", "--config", str(cfg), "--out", str(out2)])
    assert dir_digest(out1) == dir_digest(out2)


@pytest.fixture()
def dataset(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "data"
    main(["generate", "--config", str(cfg), "--out", str(out)])
    return cfg, out


def test_run_ppgl_outputs(dataset, tmp_path):
    cfg, data = dataset
    out = tmp_path / "ppgl"
    assert main(["run", str(data), "--config", str(cfg), "--method", "ppgl",
                 "--out", str(out)]) == 0
    for i in range(3):
        assert (out / f"graph_client_{i}.edges").exists()
    assert (out / "graph_consensus.edges").exists()
    assert (out / "trace.csv").exists()
    rows = read_metrics_csv(out / "metrics.csv")
    assert [r["method"] for r in rows] == ["ppgl-l", "ppgl-c"]
    assert rows[0]["N"] == "30" and rows[0]["q"] == "0.5"


def test_run_igl_outputs(dataset, tmp_path):
    cfg, data = dataset
    out = tmp_path / "igl"
    assert main(["run", str(data), "--config", str(cfg), "--method", "igl",
                 "--out", str(out)]) == 0
    assert not (out / "trace.csv").exists()
    assert not (out / "graph_consensus.edges").exists()
    for i in range(3):
        assert (out / f"graph_client_{i}.edges").exists()
    rows = read_metrics_csv(out / "metrics.csv")
    assert [r["method"] for r in rows] == ["igl"]


def test_run_global_outputs(dataset, tmp_path):
    cfg, data = dataset
    out = tmp_path / "glob"
    assert main(["run", str(data), "--config", str(cfg), "--method", "global",
                 "--out", str(out)]) == 0
    assert (out / "graph_global.edges").exists()
    rows = read_metrics_csv(out / "metrics.csv")
    assert [r["method"] for r in rows] == ["global"]


def test_run_deterministic_byte_identical(dataset, tmp_path):
    cfg, data = dataset
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    main(["run", str(data), "--config", str(cfg), "--method", "ppgl", "--out", str(out1)])
    main(["run", str(data), "--config", str(cfg), "--method", "ppgl", "--out", str(out2)])
    assert dir_digest(out1) == dir_digest(out2)


def test_run_exit_codes(dataset, tmp_path):
    cfg, data = dataset
    # unreadable config
    assert main(["run", str(data), "--config", str(tmp_path / "nope.cfg"),
                 "--method", "igl", "--out", str(tmp_path / "x")]) == 2
    # missing dataset directory
    assert main(["run", str(tmp_path / "missing"), "--config", str(cfg),
                 "--method", "igl", "--out", str(tmp_path / "y")]) == 2
    # iteration cap too tight: solver flags non-convergence
    tight = write_config(tmp_path, SMALL + "max_iter = 5\n", name="tight.cfg")
    assert main(["run", str(data), "--config", str(tight), "--method", "igl",
                 "--out", str(tmp_path / "z")]) == 3


def test_solvers_touch_no_client_files_after_load(dataset, tmp_path, monkeypatch):
    cfg, data = dataset
    from fedgl import cli as cli_module
    from fedgl.datagen import load_dataset as real_load

    opened = []
    phase = {"loading": True}

    def tracking_load(path):
        phase["loading"] = True
        try:
            return real_load(path)
        finally:
            phase["loading"] = False

    real_open = builtins.open

    def tracking_open(file, *args, **kwargs):
        if not phase["loading"] and "signals_client" in str(file):
            opened.append(str(file))
        return real_open(file, *args, **kwargs)

    monkeypatch.setattr(cli_module, "load_dataset", tracking_load)
    monkeypatch.setattr(builtins, "open", tracking_open)
    out = tmp_path / "audit"
    assert main(["run", str(data), "--config", str(cfg), "--method", "ppgl",
                 "--out", str(out)]) == 0
    assert opened == []  # no client file is re-read while solving


def test_grid_single_point_matches_run(dataset, tmp_path):
    cfg_text = SMALL + "beta_grid = 0.005\nnu_grid = 2.6\nlambda_grid = 0.08\n"
    cfg = write_config(tmp_path, cfg_text, name="grid.cfg")
    _, data = dataset
    gout = tmp_path / "grid"
    assert main(["grid", str(data), "--config", str(cfg), "--out", str(gout)]) == 0
    grid_rows = list(read_rows(gout / "grid.csv"))
    assert len(grid_rows) == 1
    rout = tmp_path / "run"
    main(["run", str(data), "--config", str(cfg), "--method", "ppgl", "--out", str(rout)])
    run_rows = read_metrics_csv(rout / "metrics.csv")
    assert float(grid_rows[0]["fs_local"]) == pytest.approx(float(run_rows[0]["fs"]))
    assert float(grid_rows[0]["fs_consensus"]) == pytest.approx(float(run_rows[1]["fs"]))
    sel = list(read_rows(gout / "selection.csv"))
    assert [r["selected_by"] for r in sel] == ["fs_local", "fs_consensus"]


def read_rows(path):
    import csv

    with open(path, newline="") as fh:
        yield from csv.DictReader(fh)


def test_grid_extremes_degrade_consensus(dataset, tmp_path):
    # coupling-weight extremes collapse the consensus F-score (spread grid)
    cfg_text = SMALL + "beta_grid = 0.005\nnu_grid = 1.0,2.6,100.0\nlambda_grid = 0.08\n"
    cfg = write_config(tmp_path, cfg_text, name="spread.cfg")
    _, data = dataset
    gout = tmp_path / "spread"
    assert main(["grid", str(data), "--config", str(cfg), "--out", str(gout)]) == 0
    rows = {float(r["nu"]): float(r["fs_consensus"]) for r in read_rows(gout / "grid.csv")}
    assert rows[1.0] <= rows[2.6]
    assert rows[100.0] <= rows[2.6]


def test_report_aggregates(dataset, tmp_path):
    cfg, data = dataset
    outs = []
    for i, seed in enumerate((3, 4)):
        out = tmp_path / f"run{i}"
        main(["run", str(data), "--config", str(cfg), "--seed", str(seed),
              "--method", "igl", "--out", str(out)])
        outs.append(str(out))
    report = tmp_path / "report.csv"
    assert main(["report", *outs, "--out", str(report)]) == 0
    rows = list(read_rows(report))
    assert rows[0]["method"] == "igl"
    assert int(rows[0]["runs"]) == 2
    assert main(["report", str(tmp_path / "nowhere")]) == 2
