import numpy as np
import pytest

from sgnav.cli import (EXIT_NOPATH, EXIT_OK, EXIT_PARSE, EXIT_USAGE, Config,
                       main)
from sgnav.grid import GridMap, load_map, random_map, save_map
from sgnav.lspi import BasisSpec, Policy


def write_map(path, grid):
    path.write_text(save_map(grid))
    return str(path)


def small_map(tmp_path, name="m.map", seed=3):
    return write_map(tmp_path / name, random_map(30, 30, 0.08, seed=seed))


def forward_oa_policy_file(tmp_path):
    spec = BasisSpec(dim=6, order=3, lows=(0.0,) * 6, highs=(5.0,) * 6)
    w = np.zeros(spec.feature_len)
    w[0] = 1.0
    path = tmp_path / "oa.txt"
    with open(path, "w") as f:
        Policy(spec, w).save(f)
    return str(path)


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

def test_unknown_config_key_rejected(tmp_path):
    code = main(["--set", "warp_speed=9", "fixtures", "--out", str(tmp_path)])
    assert code == EXIT_USAGE
    assert not (tmp_path / "office.map").exists()  # rejected before any work


def test_config_file_round_trip(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("r_alert = 2.0\nn_queries=7  # comment\n")
    cfg = Config()
    cfg.load_file(cfg_file)
    assert cfg.r_alert == 2.0 and cfg.n_queries == 7


def test_config_file_bad_line(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("r_alert\n")
    code = main(["--config", str(cfg_file), "fixtures", "--out", str(tmp_path)])
    assert code == EXIT_USAGE


def test_invalid_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["train", "xyzzy", "--out", "/tmp/x"])
    assert err.value.code == 2


# ---------------------------------------------------------------------------
# preprocess
# ---------------------------------------------------------------------------

def test_preprocess_outputs_and_rerun_identical(tmp_path, capsys):
    map_path = small_map(tmp_path)
    out1 = tmp_path / "out1"
    out2 = tmp_path / "out2"
    assert main(["preprocess", map_path, "--out", str(out1)]) == EXIT_OK
    assert main(["preprocess", map_path, "--out", str(out2)]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "vertices=" in printed and "preprocess_ms=" in printed
    for name in ("alert.map", "field.csv", "graph.txt", "manifest.txt"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_preprocess_empty_map_gives_empty_graph(tmp_path):
    map_path = write_map(tmp_path / "e.map",
                         GridMap(np.zeros((20, 20), dtype=bool)))
    out = tmp_path / "out"
    assert main(["--set", "r_alert=0.0", "preprocess", map_path,
                 "--out", str(out)]) == EXIT_OK
    assert (out / "graph.txt").read_text() == ""


def test_preprocess_parse_error(tmp_path):
    bad = tmp_path / "bad.map"
    bad.write_text("not a map\n")
    assert main(["preprocess", str(bad), "--out", str(tmp_path / "o")]) == EXIT_PARSE


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

def test_train_sa_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    args = ["--set", "sample_count=1200", "--seed", "11"]
    assert main(args + ["train", "sa", "--out", str(out1)]) == EXIT_OK
    assert main(args + ["train", "sa", "--out", str(out2)]) == EXIT_OK
    assert (out1 / "policy.txt").read_bytes() == (out2 / "policy.txt").read_bytes()
    report = (out1 / "report.csv").read_text().strip().split("\n")
    assert report[0] == "seed,success,switch_freq,lspi_iters"
    assert len(report) == 2


def test_train_oa_on_random_env(tmp_path):
    out = tmp_path / "oa"
    assert main(["--set", "sample_count=1500", "--seed", "3", "train", "oa",
                 "--env", "random", "--switch-penalty",
                 "--out", str(out)]) == EXIT_OK
    with open(out / "policy.txt") as f:
        policy = Policy.load(f)
    assert policy.spec.dim == 6 and policy.spec.order == 3


# ---------------------------------------------------------------------------
# plan
# ---------------------------------------------------------------------------

def plan_setup(tmp_path):
    grid = GridMap(np.zeros((30, 30), dtype=bool))
    map_path = write_map(tmp_path / "w.map", grid)
    pre = tmp_path / "pre"
    assert main(["preprocess", map_path, "--out", str(pre)]) == EXIT_OK
    sa_out = tmp_path / "sa"
    assert main(["--set", "sample_count=4000", "--seed", "42", "train", "sa",
                 "--out", str(sa_out)]) == EXIT_OK
    return map_path, pre, str(sa_out / "policy.txt"), forward_oa_policy_file(tmp_path)


def test_plan_trivial_and_outputs(tmp_path):
    map_path, pre, sa, oa = plan_setup(tmp_path)
    out = tmp_path / "run"
    code = main(["plan", "--map", map_path, "--alert", str(pre / "alert.map"),
                 "--graph", str(pre / "graph.txt"), "--sa", sa, "--oa", oa,
                 "--start", "10.5,10.5", "--goal", "10,10",
                 "--out", str(out)])
    assert code == EXIT_OK
    metrics = (out / "metrics.csv").read_text().strip().split("\n")
    assert metrics[0] == "run_id,seed,outcome,switch_freq,path_len,h_time"
    assert "reached" in metrics[1]
    traj = (out / "trajectory.csv").read_text().split("\n")
    assert traj[0] == "t,x,y,theta,action,mdp_mode"
    assert (out / "scene.svg").read_text().startswith("<svg")


def test_plan_real_query(tmp_path):
    map_path, pre, sa, oa = plan_setup(tmp_path)
    out = tmp_path / "run2"
    code = main(["plan", "--map", map_path, "--alert", str(pre / "alert.map"),
                 "--graph", str(pre / "graph.txt"), "--sa", sa, "--oa", oa,
                 "--start", "5.5,15.5", "--goal", "24,15", "--out", str(out)])
    assert code == EXIT_OK
    metrics = (out / "metrics.csv").read_text()
    assert "reached" in metrics


def test_plan_blocked_goal_nopath_exit(tmp_path):
    map_path, pre, sa, oa = plan_setup(tmp_path)
    code = main(["plan", "--map", map_path, "--alert", str(pre / "alert.map"),
                 "--graph", str(pre / "graph.txt"), "--sa", sa, "--oa", oa,
                 "--start", "5.5,15.5", "--goal", "0,0",
                 "--out", str(tmp_path / "run3")])
    assert code == EXIT_NOPATH


# ---------------------------------------------------------------------------
# bench and experiment
# ---------------------------------------------------------------------------

def test_bench_small_map(tmp_path, capsys):
    map_path = small_map(tmp_path, seed=9)
    out = tmp_path / "bench"
    code = main(["--set", "n_queries=5", "bench", "--map", map_path,
                 "--out", str(out)])
    assert code == EXIT_OK
    summary = (out / "summary.txt").read_text()
    assert "speedup=" in summary and "median_graph_s=" in summary
    pairs = (out / "pairs.csv").read_text().strip().split("\n")
    assert len(pairs) == 6


def test_experiment_single_seed(tmp_path):
    out = tmp_path / "exp"
    code = main(["--set", "n_seeds=1", "--set", "sample_count=1200",
                 "experiment", "--map-kind", "random", "--reward", "concise",
                 "--switch-penalty", "--out", str(out)])
    assert code == EXIT_OK
    report = (out / "report-random-concise-switch.csv").read_text().strip().split("\n")
    assert report[0] == "seed,success,switch_freq,lspi_iters"
    assert len(report) == 2


def test_fixtures_command(tmp_path):
    out = tmp_path / "fix"
    assert main(["fixtures", "--out", str(out)]) == EXIT_OK
    office = load_map((out / "office.map").read_text())
    assert (office.width, office.height) == (50, 50)
    assert (out / "gauntlet.map").exists()
