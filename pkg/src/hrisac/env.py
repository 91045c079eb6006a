"""Markov-decision-process environment for the joint precoding problem.

One :class:`Scenario` freezes everything random (geometry, channels, the
active-element set) for a run; the environment then exposes the standard
reset/step interface over flattened real vectors.

State layout (all blocks Re first, then Im, row-major):
``[W | diag(Phi) | H | G]`` with dimension
``2M(K+1) + 2N + 2NM + 2N(K+1)``.
Action layout: ``[W | diag(Phi)]`` with entries in [-1, 1]; the RIS block is
multiplied by the amplitude cap before projection so active elements can
reach their full range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (ChannelSet, Geometry, PropagationParams, build_channels,
                      build_geometry, path_loss)
from .comms import NoiseParams, PrecoderPair, all_sinrs
from .config import ExperimentConfig
from .feasibility import (Budgets, ConstraintReport, PenaltyWeights,
                          evaluate_constraints, project_action)
from .sensing import TargetParams


@dataclass
class Scenario:
    """Frozen randomness of one run: geometry, channels, active set."""

    config: ExperimentConfig
    geometry: Geometry
    propagation: PropagationParams
    channels: ChannelSet
    target: TargetParams
    noise: NoiseParams
    budgets: Budgets
    weights: PenaltyWeights
    active_set: np.ndarray
    seed: int


def build_scenario(cfg: ExperimentConfig, seed: int) -> Scenario:
    """Deterministically realize a scenario from (config, seed)."""
    cfg.validate()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0])))
    geom = build_geometry(cfg, rng)
    prop = PropagationParams.from_config(cfg)
    channels = build_channels(geom, prop)
    target = TargetParams.from_config(cfg, geom, prop)
    noise = NoiseParams.from_config(cfg)
    budgets = Budgets.from_config(cfg)
    weights = PenaltyWeights.from_config(cfg)
    active_set = np.sort(rng.choice(cfg.num_ris, size=cfg.num_active, replace=False))
    return Scenario(config=cfg, geometry=geom, propagation=prop, channels=channels,
                    target=target, noise=noise, budgets=budgets, weights=weights,
                    active_set=active_set, seed=seed)


@dataclass
class PairEvaluation:
    """Objective, constraint report and reward of one precoder pair."""

    reward: float
    sum_rate: float
    sinrs: np.ndarray
    crb: float
    report: ConstraintReport

    @property
    def penalty(self) -> float:
        return self.report.penalty


def evaluate_pair(pair: PrecoderPair, scenario: Scenario) -> PairEvaluation:
    """Reward = sum rate - penalty, by construction an exact identity."""
    cfg = scenario.config
    sinrs = all_sinrs(pair, scenario.channels, scenario.noise,
                      cfg.sensing_interference_channel)
    rate = float(np.sum(np.log2(1.0 + sinrs)))
    report, crb_value = evaluate_constraints(
        pair, scenario.channels, scenario.geometry, scenario.target,
        scenario.noise, scenario.budgets, scenario.weights,
        sensing_interference_channel=cfg.sensing_interference_channel,
        crb_reduction=cfg.crb_reduction)
    return PairEvaluation(reward=rate - report.penalty, sum_rate=rate,
                          sinrs=sinrs, crb=crb_value, report=report)


@dataclass
class StepOutcome:
    next_state: np.ndarray
    reward: float
    done: bool
    truncated: bool  # done came from the step budget, not a terminal state
    report: ConstraintReport
    sum_rate: float
    crb: float
    sinrs: np.ndarray
    pair: PrecoderPair


class RisIsacEnv:
    """Single-scenario environment; one instance is single-threaded."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        cfg = scenario.config
        self.state_dim = cfg.state_dim
        self.action_dim = cfg.action_dim
        self.steps_per_episode = cfg.steps_per_episode
        self._w_scale = 1.0 / np.sqrt(cfg.bs_power_w)
        self._phi_scale = 1.0 / cfg.max_active_amplitude
        pl = path_loss(cfg.frequency_hz, cfg.bs_ris_distance_m,
                       cfg.absorption_per_m, cfg.speed_of_light)
        self._chan_scale = 1.0 / np.sqrt(cfg.num_ris * cfg.num_bs / pl)
        self._pair: PrecoderPair | None = None
        self._step_count = 0
        self._done = True

    # -- state helpers ---------------------------------------------------
    @staticmethod
    def _flatten(block: np.ndarray, scale: float) -> np.ndarray:
        flat = block.ravel() * scale
        return np.concatenate([flat.real, flat.imag])

    def normalize_state(self, beams: np.ndarray, phases: np.ndarray) -> np.ndarray:
        """Assemble the normalized state for the given decision variables
        and the scenario's frozen channels."""
        ch = self.scenario.channels
        parts = [
            self._flatten(beams, self._w_scale),
            self._flatten(phases, self._phi_scale),
            self._flatten(ch.bs_ris, self._chan_scale),
            self._flatten(ch.ris_links, self._chan_scale),
        ]
        state = np.concatenate(parts)
        assert state.shape == (self.state_dim,)
        return state

    def split_action(self, action: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Raw action vector -> (complex W, complex diag(Phi)), pre-projection."""
        cfg = self.scenario.config
        m, k, n = cfg.num_bs, cfg.num_users, cfg.num_ris
        mw = m * (k + 1)
        action = np.asarray(action, dtype=float)
        if action.shape != (self.action_dim,):
            raise ValueError(f"action must have shape ({self.action_dim},)")
        beams = (action[:mw] + 1j * action[mw:2 * mw]).reshape(m, k + 1)
        phases = action[2 * mw:2 * mw + n] + 1j * action[2 * mw + n:]
        phases = phases * cfg.max_active_amplitude
        return beams, phases

    # -- lifecycle ---------------------------------------------------------
    def initial_pair(self) -> PrecoderPair:
        """Identity-style start: leading-diagonal beams on the power budget
        sphere, all RIS coefficients at unit amplitude and zero phase."""
        cfg = self.scenario.config
        m, k = cfg.num_bs, cfg.num_users
        beams = np.zeros((m, k + 1), dtype=complex)
        streams = min(m, k + 1)
        beams[np.arange(streams), np.arange(streams)] = np.sqrt(cfg.bs_power_w / streams)
        phases = np.ones(cfg.num_ris, dtype=complex)
        return PrecoderPair(beams=beams, phases=phases,
                            active_set=self.scenario.active_set.copy())

    def reset(self, seed: int | None = None) -> np.ndarray:
        """Start an episode; with a seed, re-realize the whole scenario."""
        if seed is not None:
            self.scenario = build_scenario(self.scenario.config, seed)
            pl_cfg = self.scenario.config
            pl = path_loss(pl_cfg.frequency_hz, pl_cfg.bs_ris_distance_m,
                           pl_cfg.absorption_per_m, pl_cfg.speed_of_light)
            self._chan_scale = 1.0 / np.sqrt(pl_cfg.num_ris * pl_cfg.num_bs / pl)
        self._pair = self.initial_pair()
        self._step_count = 0
        self._done = False
        return self.normalize_state(self._pair.beams, self._pair.phases)

    def step(self, action: np.ndarray) -> StepOutcome:
        if self._done:
            raise RuntimeError("step() called on a finished episode; call reset()")
        raw_beams, raw_phases = self.split_action(action)
        sc = self.scenario
        pair = project_action(raw_beams, raw_phases, sc.budgets, sc.active_set,
                              sc.channels, sc.noise)
        evaluation = evaluate_pair(pair, sc)
        self._pair = pair
        self._step_count += 1
        truncated = self._step_count >= self.steps_per_episode
        done = truncated
        if sc.config.stop_on_feasible and evaluation.report.all_ok:
            done = True
            truncated = False
        self._done = done
        next_state = self.normalize_state(pair.beams, pair.phases)
        return StepOutcome(next_state=next_state, reward=evaluation.reward,
                           done=done, truncated=truncated,
                           report=evaluation.report,
                           sum_rate=evaluation.sum_rate, crb=evaluation.crb,
                           sinrs=evaluation.sinrs, pair=pair)
