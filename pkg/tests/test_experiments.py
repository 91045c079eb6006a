import json
import math
import os

import numpy as np
import pytest

from hrisac.config import ExperimentConfig, load_config, parse_override
from hrisac.experiments import (read_csv, ris_shape, run_train, sweep_elements,
                                sweep_power, write_csv)
from hrisac.plotting import plot_csv


def tiny_cfg(**kw):
    base = dict(episodes=1, steps_per_episode=6, batch_size=4,
                random_samples=25, greedy_max_sweeps=1)
    base.update(kw)
    return ExperimentConfig.desk(**base)


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


# --- config -------------------------------------------------------------

def test_profiles_have_expected_scales():
    paper = ExperimentConfig.paper()
    assert (paper.num_bs, paper.num_ris, paper.num_sensing) == (64, 80, 20)
    assert paper.num_users == 3 and paper.num_active == 30
    desk = ExperimentConfig.desk()
    assert (desk.num_bs, desk.num_ris, desk.num_sensing) == (8, 16, 4)
    assert desk.num_users == 2 and desk.num_active == 4


def test_dbm_conversions():
    cfg = ExperimentConfig.desk()
    assert cfg.bs_power_w == pytest.approx(1.0)          # 30 dBm
    assert cfg.ris_power_w == pytest.approx(0.01)        # 10 dBm
    assert ExperimentConfig.paper().noise_w == pytest.approx(1e-12)  # -90 dBm


def test_config_hash_stable_and_sensitive():
    a = ExperimentConfig.desk()
    b = ExperimentConfig.desk()
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != a.replace(bs_power_dbm=29.0).config_hash()


def test_load_config_file_and_overrides(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('profile = "desk"\n[budgets]\nbs_power_dbm = 27.0\n'
                    '[agent]\nepisodes = 3\n')
    cfg = load_config(str(path))
    assert cfg.profile == "desk"
    assert cfg.bs_power_dbm == 27.0
    assert cfg.episodes == 3
    cfg2 = load_config(str(path), overrides={"episodes": 5})
    assert cfg2.episodes == 5


def test_load_config_unknown_field_is_named(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("not_a_real_field = 3\n")
    with pytest.raises(ValueError, match="not_a_real_field"):
        load_config(str(path))


def test_load_config_invalid_value_is_rejected(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text('profile = "desk"\nnum_users = 0\n')
    with pytest.raises(ValueError, match="num_users"):
        load_config(str(path))


def test_parse_override_literals():
    assert parse_override("episodes=3") == ("episodes", 3)
    assert parse_override("bs_power_dbm=27.5") == ("bs_power_dbm", 27.5)
    assert parse_override('echo_gain_mode="fixed"') == ("echo_gain_mode", "fixed")
    assert parse_override("agent.episodes=3") == ("episodes", 3)


# --- CSV layer ------------------------------------------------------------

def test_write_csv_refuses_overwrite(tmp_path):
    path = str(tmp_path / "x.csv")
    write_csv(path, ["a"], [{"a": 1}], {"h": "x"})
    with pytest.raises(FileExistsError):
        write_csv(path, ["a"], [{"a": 1}], {"h": "x"})
    write_csv(path, ["a"], [{"a": 2}], {"h": "x"}, force=True)
    meta, rows = read_csv(path)
    assert meta["h"] == "x"
    assert rows[0]["a"] == "2"


def test_read_csv_empty_errors(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(ValueError):
        read_csv(str(path))


# --- train ------------------------------------------------------------------

@pytest.mark.parametrize("scheme", ["ddpg", "random", "greedy"])
def test_run_train_writes_csv_and_summary(tmp_path, scheme):
    cfg = tiny_cfg()
    record = run_train(cfg, scheme, 0, str(tmp_path))
    assert os.path.exists(record.telemetry_path)
    meta, rows = read_csv(record.telemetry_path)
    assert meta["config_hash"] == cfg.config_hash()
    assert meta["seed"] == "0"
    assert rows, "telemetry should not be empty"
    assert all(r["scheme"] == scheme for r in rows)
    summary = json.loads(read_bytes(
        record.telemetry_path.replace(".csv", ".json")))
    assert summary["scheme"] == scheme
    assert summary["best_reward"] >= max(float(r["reward"]) for r in rows) - 1e-12


def test_run_train_ddpg_saves_checkpoints(tmp_path):
    cfg = tiny_cfg()
    record = run_train(cfg, "ddpg", 2, str(tmp_path))
    from hrisac.nn import load_mlp
    actor = load_mlp(str(tmp_path / "train_ddpg_seed2_actor.npz"))
    critic = load_mlp(str(tmp_path / "train_ddpg_seed2_critic.npz"))
    assert actor.sizes == [cfg.state_dim, 64, 64, cfg.action_dim]
    assert critic.sizes == [cfg.state_dim + cfg.action_dim, 64, 64, 1]
    state = np.zeros(cfg.state_dim)
    action = actor.forward(state)
    assert action.shape == (cfg.action_dim,)
    assert np.all(np.abs(action) <= 1.0)
    assert record.summary["steps"] == cfg.episodes * cfg.steps_per_episode


def test_run_train_rerun_is_byte_identical(tmp_path):
    cfg = tiny_cfg()
    a = run_train(cfg, "ddpg", 1, str(tmp_path / "a"))
    b = run_train(cfg, "ddpg", 1, str(tmp_path / "b"))
    assert read_bytes(a.telemetry_path) == read_bytes(b.telemetry_path)


def test_run_train_respects_force(tmp_path):
    cfg = tiny_cfg()
    run_train(cfg, "random", 0, str(tmp_path))
    with pytest.raises(FileExistsError):
        run_train(cfg, "random", 0, str(tmp_path))
    run_train(cfg, "random", 0, str(tmp_path), force=True)


# --- sweeps -----------------------------------------------------------------

def test_sweep_power_rows_and_determinism(tmp_path):
    cfg = tiny_cfg()
    powers = [25.0, 30.0]
    schemes = ["random", "greedy"]
    seeds = [0, 1]
    path, mean_path = sweep_power(cfg, powers, schemes, seeds,
                                  str(tmp_path / "a"))
    meta, rows = read_csv(path)
    assert len(rows) == len(powers) * len(schemes) * len(seeds)
    _, mean_rows = read_csv(mean_path)
    assert len(mean_rows) == len(powers) * len(schemes)

    path_b, _ = sweep_power(cfg, powers, schemes, seeds, str(tmp_path / "b"))
    assert read_bytes(path) == read_bytes(path_b)


def test_sweep_power_single_cell_matches_run_train(tmp_path):
    cfg = tiny_cfg()
    path, _ = sweep_power(cfg.replace(bs_power_dbm=28.0), [28.0], ["random"],
                          [3], str(tmp_path / "sweep"))
    _, rows = read_csv(path)
    record = run_train(cfg.replace(bs_power_dbm=28.0), "random", 3,
                       str(tmp_path / "train"))
    assert float(rows[0]["sum_rate"]) == record.summary["best_sum_rate"]


def test_sweep_power_parallel_matches_serial(tmp_path):
    cfg = tiny_cfg()
    serial, _ = sweep_power(cfg, [30.0], ["random"], [0, 1],
                            str(tmp_path / "s"), workers=1)
    parallel, _ = sweep_power(cfg, [30.0], ["random"], [0, 1],
                              str(tmp_path / "p"), workers=2)
    assert read_bytes(serial) == read_bytes(parallel)


def test_ris_shape_factorizations():
    assert ris_shape(8) == (2, 4)
    assert ris_shape(16) == (4, 4)
    assert ris_shape(24) == (4, 6)
    assert ris_shape(7) == (1, 7)


def test_sweep_elements_q_rule_and_schemes(tmp_path):
    cfg = tiny_cfg()
    path, mean_path = sweep_elements(cfg, [8, 16], [2.0, 5.0], [0],
                                     str(tmp_path), optimizer="random")
    _, rows = read_csv(path)
    schemes = {r["scheme"] for r in rows}
    assert schemes == {"hris_a2", "hris_a5", "passive", "random"}
    for r in rows:
        n = int(r["elements"])
        if r["scheme"] == "passive":
            assert int(r["q"]) == 0
        else:
            assert int(r["q"]) == math.ceil(n / 4)
    # 2 element counts x (2 hris + passive + random) x 1 seed
    assert len(rows) == 2 * 4


def test_sweep_elements_determinism(tmp_path):
    cfg = tiny_cfg()
    a, _ = sweep_elements(cfg, [8], [5.0], [0], str(tmp_path / "a"),
                          optimizer="random")
    b, _ = sweep_elements(cfg, [8], [5.0], [0], str(tmp_path / "b"),
                          optimizer="random")
    assert read_bytes(a) == read_bytes(b)


# --- plotting -----------------------------------------------------------------

def test_plot_reward_and_determinism(tmp_path):
    cfg = tiny_cfg()
    record = run_train(cfg, "random", 0, str(tmp_path))
    out_a = str(tmp_path / "a.svg")
    out_b = str(tmp_path / "b.svg")
    plot_csv(record.telemetry_path, "reward", out_a)
    plot_csv(record.telemetry_path, "reward", out_b)
    assert read_bytes(out_a) == read_bytes(out_b)
    svg = read_bytes(out_a).decode()
    assert svg.startswith("<svg") and "polyline" in svg
    assert "Average reward" in svg


def test_plot_power_kind(tmp_path):
    cfg = tiny_cfg()
    path, _ = sweep_power(cfg, [25.0, 30.0], ["random"], [0], str(tmp_path))
    out = str(tmp_path / "p.svg")
    plot_csv(path, "power", out)
    assert b"BS power (dBm)" in read_bytes(out)


def test_plot_empty_csv_errors(tmp_path):
    src = tmp_path / "empty.csv"
    src.write_text("# config_hash=x\nreward,scheme\n")
    with pytest.raises(ValueError):
        plot_csv(str(src), "reward", str(tmp_path / "x.svg"))


def test_plot_refuses_overwrite(tmp_path):
    cfg = tiny_cfg()
    record = run_train(cfg, "random", 1, str(tmp_path))
    out = str(tmp_path / "fig.svg")
    plot_csv(record.telemetry_path, "reward", out)
    with pytest.raises(FileExistsError):
        plot_csv(record.telemetry_path, "reward", out)
    plot_csv(record.telemetry_path, "reward", out, force=True)


# --- CLI ------------------------------------------------------------------

def test_cli_train_and_plot(tmp_path, capsys):
    from hrisac.cli import main
    out_dir = str(tmp_path / "runs")
    code = main(["train", "--profile", "desk", "--seed", "0",
                 "--scheme", "random", "--out", out_dir,
                 "--set", "random_samples=10"])
    assert code == 0
    printed = capsys.readouterr().out
    csv_path = printed.splitlines()[0].split(" ", 1)[1]
    code = main(["plot", csv_path, "--kind", "reward",
                 "--out", str(tmp_path / "fig.svg")])
    assert code == 0
    assert os.path.exists(tmp_path / "fig.svg")


def test_cli_invalid_config_exits_nonzero(tmp_path, capsys):
    from hrisac.cli import main
    bad = tmp_path / "bad.toml"
    bad.write_text("definitely_not_a_field = 1\n")
    code = main(["train", "--config", str(bad), "--seed", "0",
                 "--out", str(tmp_path)])
    assert code == 2
    assert "definitely_not_a_field" in capsys.readouterr().err


def test_cli_overwrite_guard(tmp_path, capsys):
    from hrisac.cli import main
    out_dir = str(tmp_path / "runs")
    args = ["train", "--profile", "desk", "--seed", "0", "--scheme", "random",
            "--out", out_dir, "--set", "random_samples=5"]
    assert main(args) == 0
    assert main(args) == 2  # refuses to overwrite
    assert main(args + ["--force"]) == 0
