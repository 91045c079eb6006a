"""Run orchestration: scheme execution, telemetry CSVs and the two sweeps.

Every CSV starts with a ``#`` metadata line carrying the config hash and
seed(s); floats are written with ``repr`` so identical runs produce
byte-identical files.  Sweep cells may execute in a process pool; results
are sorted before the single writer emits them, so parallelism never
changes the output bytes.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import greedy_optimize, passive_ris_config, random_search
from .config import ExperimentConfig
from .ddpg import Hyperparams, train
from .env import RisIsacEnv, build_scenario

TELEMETRY_COLUMNS = [
    "scheme", "episode", "step", "reward", "sum_rate", "crb", "penalty",
    "feasible", "sinr_ok", "bs_power_ok", "ris_power_ok", "target_noise_ok",
    "amplitude_ok", "crb_ok", "critic_loss", "mean_q", "noise_scale",
]

SWEEP_POWER_COLUMNS = ["power_dbm", "scheme", "seed", "sum_rate", "reward"]
SWEEP_ELEMENTS_COLUMNS = ["elements", "q", "scheme", "amax", "seed",
                          "sum_rate", "reward"]


def _format(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: str, columns: list, rows: list, meta: dict,
              force: bool = False) -> None:
    if os.path.exists(path) and not force:
        raise FileExistsError(f"{path} exists; pass force to overwrite")
    meta_line = "# " + ",".join(f"{k}={v}" for k, v in meta.items())
    lines = [meta_line, ",".join(columns)]
    for row in rows:
        lines.append(",".join(_format(row[c]) for c in columns))
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path: str) -> tuple[dict, list]:
    """Read back a workbench CSV: (metadata dict, list of row dicts)."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    meta: dict = {}
    body = []
    for ln in lines:
        if ln.startswith("#"):
            for chunk in ln.lstrip("# ").split(","):
                if "=" in chunk:
                    k, v = chunk.split("=", 1)
                    meta[k] = v
        elif ln:
            body.append(ln)
    if not body:
        raise ValueError(f"{path} contains no data")
    columns = body[0].split(",")
    rows = [dict(zip(columns, ln.split(","))) for ln in body[1:]]
    return meta, rows


@dataclass
class RunRecord:
    config_hash: str
    seed: int
    scheme: str
    telemetry_path: str | None
    summary: dict


def _flag_cells(report) -> dict:
    if report is None:
        return {"feasible": "", "sinr_ok": "", "bs_power_ok": "",
                "ris_power_ok": "", "target_noise_ok": "", "amplitude_ok": "",
                "crb_ok": ""}
    return report.as_row() | {"feasible": int(report.all_ok)}


def run_scheme(cfg: ExperimentConfig, scheme: str, seed: int
               ) -> tuple[dict, list, object]:
    """Execute one scheme on one scenario seed.

    Returns (summary, telemetry rows, raw result object).
    """
    scenario = build_scenario(cfg, seed)
    rows: list = []
    if scheme == "ddpg":
        env = RisIsacEnv(scenario)
        result = train(env, Hyperparams.from_config(cfg), seed)
        for rec in result.history:
            row = {"scheme": scheme, "episode": rec.episode, "step": rec.step,
                   "reward": rec.reward, "sum_rate": rec.sum_rate,
                   "crb": rec.crb, "penalty": rec.penalty,
                   "critic_loss": rec.critic_loss, "mean_q": rec.mean_q,
                   "noise_scale": rec.noise_scale}
            row.update(_flag_cells(rec.report))
            rows.append(row)
        rewards = result.rewards()
        summary = {
            "best_reward": result.best_reward,
            "best_sum_rate": result.best_sum_rate,
            "best_crb": result.best_crb,
            "final_mean_reward": float(rewards[3 * len(rewards) // 4:].mean()),
            "steps": len(rewards),
        }
    elif scheme in ("random", "greedy"):
        if scheme == "random":
            result = random_search(scenario, cfg.random_samples, seed)
        else:
            result = greedy_optimize(scenario)
        for idx, ev in result.history:
            row = {"scheme": scheme, "episode": 0, "step": idx,
                   "reward": ev.reward, "sum_rate": ev.sum_rate, "crb": ev.crb,
                   "penalty": ev.report.penalty, "critic_loss": float("nan"),
                   "mean_q": float("nan"), "noise_scale": 0.0}
            row.update(_flag_cells(ev.report))
            rows.append(row)
        summary = {
            "best_reward": result.reward,
            "best_sum_rate": result.sum_rate,
            "best_crb": result.crb,
            "final_mean_reward": result.reward,
            "steps": len(result.history),
        }
    else:
        raise ValueError(f"unknown scheme '{scheme}' (expected ddpg|random|greedy)")
    return summary, rows, result


def run_train(cfg: ExperimentConfig, scheme: str, seed: int, out_dir: str,
              force: bool = False) -> RunRecord:
    """One scheme x seed run with its telemetry CSV and summary JSON."""
    cfg.validate()
    summary, rows, result = run_scheme(cfg, scheme, seed)
    path = os.path.join(out_dir, f"train_{scheme}_seed{seed}.csv")
    meta = {"config_hash": cfg.config_hash(), "seed": seed, "scheme": scheme,
            "profile": cfg.profile,
            "bs_power_w": repr(cfg.bs_power_w), "noise_w": repr(cfg.noise_w)}
    write_csv(path, TELEMETRY_COLUMNS, rows, meta, force=force)
    summary_path = os.path.join(out_dir, f"train_{scheme}_seed{seed}.json")
    if os.path.exists(summary_path) and not force:
        raise FileExistsError(f"{summary_path} exists; pass force to overwrite")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump({"config_hash": cfg.config_hash(), "seed": seed,
                   "scheme": scheme, **summary}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if scheme == "ddpg":
        from .nn import save_mlp
        for role, net in (("actor", result.actor), ("critic", result.critic)):
            net_path = os.path.join(out_dir, f"train_{scheme}_seed{seed}_{role}.npz")
            if os.path.exists(net_path) and not force:
                raise FileExistsError(f"{net_path} exists; pass force to overwrite")
            save_mlp(net_path, net)
    return RunRecord(config_hash=cfg.config_hash(), seed=seed, scheme=scheme,
                     telemetry_path=path, summary=summary)


# --- sweeps -----------------------------------------------------------------

def _power_cell(args) -> dict:
    cfg_dict, power, scheme, seed = args
    cfg = ExperimentConfig(**cfg_dict).replace(bs_power_dbm=power)
    summary, _, _ = run_scheme(cfg, scheme, seed)
    return {"power_dbm": power, "scheme": scheme, "seed": seed,
            "sum_rate": summary["best_sum_rate"],
            "reward": summary["best_reward"]}


def _run_cells(worker, cells, workers: int) -> list:
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(worker, cells))
    return [worker(c) for c in cells]


def _as_ctor_dict(cfg: ExperimentConfig) -> dict:
    d = cfg.canonical_dict()
    d["hidden_sizes"] = tuple(d["hidden_sizes"])
    return d


def sweep_power(cfg: ExperimentConfig, powers_dbm: list, schemes: list,
                seeds: list, out_dir: str, force: bool = False,
                workers: int = 1) -> tuple[str, str]:
    """Best sum rate per (BS power, scheme, seed), plus a per-point mean table."""
    cfg.validate()
    cfg_dict = _as_ctor_dict(cfg)
    cells = [(cfg_dict, float(p), s, int(seed))
             for p in powers_dbm for s in schemes for seed in seeds]
    rows = _run_cells(_power_cell, cells, workers)
    rows.sort(key=lambda r: (r["power_dbm"], r["scheme"], r["seed"]))

    mean_rows = []
    for power in powers_dbm:
        for scheme in schemes:
            vals = [r["sum_rate"] for r in rows
                    if r["power_dbm"] == power and r["scheme"] == scheme]
            mean_rows.append({"power_dbm": float(power), "scheme": scheme,
                              "seed": "mean", "sum_rate": float(np.mean(vals)),
                              "reward": float("nan")})

    meta = {"config_hash": cfg.config_hash(),
            "seeds": ";".join(str(s) for s in seeds)}
    path = os.path.join(out_dir, "sweep_power.csv")
    mean_path = os.path.join(out_dir, "sweep_power_mean.csv")
    write_csv(path, SWEEP_POWER_COLUMNS, rows, meta, force=force)
    write_csv(mean_path, SWEEP_POWER_COLUMNS, mean_rows, meta, force=force)
    return path, mean_path


def ris_shape(elements: int) -> tuple[int, int]:
    """Near-square rows x cols factorization of an element count."""
    best = (1, elements)
    for rows in range(1, int(math.isqrt(elements)) + 1):
        if elements % rows == 0:
            best = (rows, elements // rows)
    return best


def _elements_cell(args) -> dict:
    cfg_dict, elements, scheme, amax, optimizer, seed = args
    base = ExperimentConfig(**cfg_dict)
    rows_, cols_ = ris_shape(elements)
    q = math.ceil(elements / 4)
    cell_cfg = base.replace(ris_rows=rows_, ris_cols=cols_, num_active=q)
    if scheme == "passive":
        cell_cfg = passive_ris_config(cell_cfg)
        run_as = optimizer
    elif scheme == "random":
        run_as = "random"
    else:  # HRIS at a given amplitude cap
        cell_cfg = cell_cfg.replace(max_active_amplitude=float(amax))
        run_as = optimizer
    summary, _, _ = run_scheme(cell_cfg, run_as, seed)
    return {"elements": elements, "q": cell_cfg.num_active, "scheme": scheme,
            "amax": float(cell_cfg.max_active_amplitude), "seed": seed,
            "sum_rate": summary["best_sum_rate"],
            "reward": summary["best_reward"]}


def sweep_elements(cfg: ExperimentConfig, elements_list: list, amax_list: list,
                   seeds: list, out_dir: str, optimizer: str = "ddpg",
                   force: bool = False, workers: int = 1) -> tuple[str, str]:
    """Element-count sweep: HRIS per amplitude cap, the passive ablation and
    the random scheme, with q = ceil(N/4) at every HRIS point."""
    cfg.validate()
    cfg_dict = _as_ctor_dict(cfg)
    cells = []
    for elements in elements_list:
        for amax in amax_list:
            cells += [(cfg_dict, int(elements), f"hris_a{amax:g}", float(amax),
                       optimizer, int(seed)) for seed in seeds]
        cells += [(cfg_dict, int(elements), "passive", 1.0, optimizer,
                   int(seed)) for seed in seeds]
        cells += [(cfg_dict, int(elements), "random", cfg.max_active_amplitude,
                   "random", int(seed)) for seed in seeds]
    rows = _run_cells(_elements_cell, cells, workers)
    rows.sort(key=lambda r: (r["elements"], r["scheme"], r["seed"]))

    mean_rows = []
    seen = sorted({(r["elements"], r["scheme"], r["amax"]) for r in rows})
    for elements, scheme, amax in seen:
        vals = [r["sum_rate"] for r in rows
                if r["elements"] == elements and r["scheme"] == scheme]
        qs = [r["q"] for r in rows
              if r["elements"] == elements and r["scheme"] == scheme]
        mean_rows.append({"elements": elements, "q": qs[0], "scheme": scheme,
                          "amax": amax, "seed": "mean",
                          "sum_rate": float(np.mean(vals)),
                          "reward": float("nan")})

    meta = {"config_hash": cfg.config_hash(),
            "seeds": ";".join(str(s) for s in seeds), "optimizer": optimizer}
    path = os.path.join(out_dir, "sweep_elements.csv")
    mean_path = os.path.join(out_dir, "sweep_elements_mean.csv")
    write_csv(path, SWEEP_ELEMENTS_COLUMNS, rows, meta, force=force)
    write_csv(mean_path, SWEEP_ELEMENTS_COLUMNS, mean_rows, meta, force=force)
    return path, mean_path
