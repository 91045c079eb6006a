"""Non-learning comparison schemes on a frozen scenario.

All three evaluate exactly the same reward as the environment, on the same
projected pairs, so scheme orderings are free of channel noise when run on
paired scenario seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .comms import PrecoderPair
from .config import ExperimentConfig
from .env import PairEvaluation, Scenario, evaluate_pair
from .feasibility import project_action


@dataclass
class BaselineResult:
    pair: PrecoderPair
    reward: float
    sum_rate: float
    crb: float
    history: list = field(default_factory=list)  # (index, PairEvaluation)


def sample_raw_action(scenario: Scenario, rng: np.random.Generator
                      ) -> tuple[np.ndarray, np.ndarray]:
    """One i.i.d. raw draw: complex-Gaussian beams; uniform phases with
    uniform amplitudes scaled by the cap on active elements.

    Amplitudes are drawn as a fraction of the cap so that draws are nested
    across different amplitude caps under a common seed.
    """
    cfg = scenario.config
    m, k, n = cfg.num_bs, cfg.num_users, cfg.num_ris
    beams = (rng.standard_normal((m, k + 1))
             + 1j * rng.standard_normal((m, k + 1))) / np.sqrt(2.0)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=n)
    fractions = rng.uniform(0.0, 1.0, size=n)
    amplitudes = np.ones(n)
    mask = np.zeros(n, dtype=bool)
    mask[scenario.active_set] = True
    amplitudes[mask] = fractions[mask] * cfg.max_active_amplitude
    phases = amplitudes * np.exp(1j * angles)
    return beams, phases


def random_search(scenario: Scenario, n_samples: int, seed: int) -> BaselineResult:
    """Best of ``n_samples`` projected random pairs (draws nested in the
    sample count for a fixed seed)."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 3])))
    best: PairEvaluation | None = None
    best_pair: PrecoderPair | None = None
    history = []
    for i in range(n_samples):
        raw_beams, raw_phases = sample_raw_action(scenario, rng)
        pair = project_action(raw_beams, raw_phases, scenario.budgets,
                              scenario.active_set, scenario.channels,
                              scenario.noise)
        ev = evaluate_pair(pair, scenario)
        if best is None or ev.reward > best.reward:
            best = ev
            best_pair = pair
        history.append((i, ev))
    assert best is not None and best_pair is not None
    return BaselineResult(pair=best_pair, reward=best.reward,
                          sum_rate=best.sum_rate, crb=best.crb, history=history)


def matched_filter_beams(scenario: Scenario, phases: np.ndarray,
                         split: np.ndarray | None = None) -> np.ndarray:
    """Per-stream matched filter to the cascaded rows.

    ``split`` holds the per-stream power fractions (summing to one) on the
    BS budget sphere; the default is an equal split across all streams.
    """
    cfg = scenario.config
    ch = scenario.channels
    m, k = cfg.num_bs, cfg.num_users
    if split is None:
        split = np.full(k + 1, 1.0 / (k + 1))
    beams = np.zeros((m, k + 1), dtype=complex)
    for s in range(k + 1):
        row = ch.ris_links[s] if s < k else ch.target_row
        eff = (row * phases) @ ch.bs_ris
        norm = np.linalg.norm(eff)
        direction = eff.conj() / norm if norm > 0.0 else None
        if direction is None:
            direction = np.zeros(m, dtype=complex)
            direction[s % m] = 1.0
        beams[:, s] = direction * np.sqrt(cfg.bs_power_w * split[s])
    return beams


def power_split_candidates(num_users: int) -> list:
    """Small codebook of per-stream power allocations the greedy sweep
    chooses from: equal over all streams, equal over users only, and full
    concentration on each single user."""
    splits = [np.full(num_users + 1, 1.0 / (num_users + 1))]
    users_only = np.zeros(num_users + 1)
    users_only[:num_users] = 1.0 / num_users
    splits.append(users_only)
    for k in range(num_users):
        single = np.zeros(num_users + 1)
        single[k] = 1.0
        splits.append(single)
    return splits


def greedy_optimize(scenario: Scenario, phase_levels: int | None = None,
                    max_sweeps: int | None = None,
                    tolerance: float | None = None) -> BaselineResult:
    """Coordinate sweep over RIS elements with a uniform phase codebook.

    Beams are re-derived after every full sweep by matched filtering with
    the reward-best power split from a small allocation codebook; active
    elements additionally test a small amplitude grid.  Candidate moves are
    accepted only when they improve the reward, and the best pair seen
    anywhere is what gets returned.
    """
    cfg = scenario.config
    phase_levels = cfg.greedy_phase_levels if phase_levels is None else phase_levels
    max_sweeps = cfg.greedy_max_sweeps if max_sweeps is None else max_sweeps
    tolerance = cfg.greedy_tolerance if tolerance is None else tolerance
    if phase_levels < 2:
        raise ValueError("phase codebook needs at least 2 levels")

    n = cfg.num_ris
    mask = np.zeros(n, dtype=bool)
    mask[scenario.active_set] = True
    codebook = np.exp(1j * 2.0 * np.pi * np.arange(phase_levels) / phase_levels)
    amp_grid = np.array([1.0, cfg.max_active_amplitude / 2.0,
                         cfg.max_active_amplitude])

    def _project(beams, phases):
        return project_action(beams, phases, scenario.budgets,
                              scenario.active_set, scenario.channels,
                              scenario.noise)

    def _refreshed_beams(phases):
        chosen = None
        chosen_eval = None
        for split in power_split_candidates(cfg.num_users):
            cand = _project(matched_filter_beams(scenario, phases, split),
                            phases)
            ev = evaluate_pair(cand, scenario)
            if chosen_eval is None or ev.reward > chosen_eval.reward:
                chosen, chosen_eval = cand, ev
        return chosen, chosen_eval

    phases = np.ones(n, dtype=complex)
    pair, current = _refreshed_beams(phases)
    best_pair, best = pair, current
    history = [(0, current)]

    move = 0
    for _ in range(max_sweeps):
        sweep_start_reward = current.reward
        for element in range(n):
            candidates = []
            for ci, code in enumerate(codebook):
                if mask[element]:
                    for ai, amp in enumerate(amp_grid):
                        candidates.append((ci * len(amp_grid) + ai, amp * code))
                else:
                    candidates.append((ci, code))
            chosen = None
            chosen_eval = current
            for _, value in sorted(candidates, key=lambda c: c[0]):
                trial_phases = pair.phases.copy()
                trial_phases[element] = value
                trial = _project(pair.beams, trial_phases)
                ev = evaluate_pair(trial, scenario)
                if ev.reward > chosen_eval.reward:
                    chosen, chosen_eval = trial, ev
            if chosen is not None:
                pair, current = chosen, chosen_eval
                move += 1
                history.append((move, current))
                if current.reward > best.reward:
                    best_pair, best = pair, current
        pair, current = _refreshed_beams(pair.phases)
        move += 1
        history.append((move, current))
        if current.reward > best.reward:
            best_pair, best = pair, current
        if current.reward - sweep_start_reward < tolerance:
            break

    return BaselineResult(pair=best_pair, reward=best.reward,
                          sum_rate=best.sum_rate, crb=best.crb, history=history)


def passive_ris_config(base: ExperimentConfig) -> ExperimentConfig:
    """Ablation: no amplifying elements, amplitudes capped at one.

    With an empty active set, the dynamic-noise terms and the RIS power
    draw vanish identically.
    """
    return base.replace(num_active=0, max_active_amplitude=1.0)
