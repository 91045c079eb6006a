"""Deterministic-policy actor-critic learner over the precoding environment.

The training loop stores every transition, performs one critic and one actor
update per step once the buffer can fill a batch, soft-updates both target
networks, and tracks the projected precoder pair with the best instantaneous
reward, which is what a run returns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .comms import PrecoderPair
from .config import ExperimentConfig
from .env import RisIsacEnv
from .nn import Adam, Mlp, soft_update


@dataclass
class Hyperparams:
    episodes: int = 10
    steps_per_episode: int = 100
    batch_size: int = 100
    discount: float = 0.99
    tau: float = 0.005
    learning_rate: float = 1e-4
    hidden_sizes: tuple = (64, 64)
    buffer_capacity: int = 100_000
    noise_scale: float = 0.1
    noise_decay: float = 0.999

    def __post_init__(self) -> None:
        if not 0.0 < self.discount <= 1.0:
            raise ValueError("discount must lie in (0, 1]")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")

    @classmethod
    def from_config(cls, cfg: ExperimentConfig) -> "Hyperparams":
        return cls(episodes=cfg.episodes, steps_per_episode=cfg.steps_per_episode,
                   batch_size=cfg.batch_size, discount=cfg.discount,
                   tau=cfg.soft_update_tau, learning_rate=cfg.learning_rate,
                   hidden_sizes=tuple(cfg.hidden_sizes),
                   buffer_capacity=cfg.buffer_capacity,
                   noise_scale=cfg.exploration_noise,
                   noise_decay=cfg.exploration_decay)


class ReplayBuffer:
    """Bounded FIFO of transitions with uniform seeded sampling."""

    def __init__(self, capacity: int, state_dim: int, action_dim: int,
                 rng: np.random.Generator):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.rng = rng
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.dones = np.zeros(capacity)
        self._next = 0
        self.size = 0

    def push(self, state, action, reward, next_state, done) -> None:
        i = self._next
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self.dones[i] = float(done)
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int) -> dict:
        if self.size < batch_size:
            raise ValueError("not enough transitions to fill a batch")
        idx = self.rng.integers(0, self.size, size=batch_size)
        return {
            "states": self.states[idx],
            "actions": self.actions[idx],
            "rewards": self.rewards[idx],
            "next_states": self.next_states[idx],
            "dones": self.dones[idx],
        }


@dataclass
class DdpgNets:
    actor: Mlp
    critic: Mlp
    target_actor: Mlp
    target_critic: Mlp
    actor_opt: Adam
    critic_opt: Adam


def build_nets(state_dim: int, action_dim: int, hp: Hyperparams,
               rng: np.random.Generator) -> DdpgNets:
    """Online networks with seeded init; targets start as exact copies."""
    hidden = list(hp.hidden_sizes)
    actor = Mlp([state_dim] + hidden + [action_dim], out_act="tanh", rng=rng)
    critic = Mlp([state_dim + action_dim] + hidden + [1], out_act="linear", rng=rng)
    return DdpgNets(actor=actor, critic=critic,
                    target_actor=actor.copy(), target_critic=critic.copy(),
                    actor_opt=Adam(actor.parameters, lr=hp.learning_rate),
                    critic_opt=Adam(critic.parameters, lr=hp.learning_rate))


def select_action(actor: Mlp, state: np.ndarray, noise_scale: float,
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Actor output plus Gaussian exploration, clipped to the action box."""
    action = actor.forward(state)
    if noise_scale > 0.0:
        if rng is None:
            raise ValueError("an rng is required when noise_scale > 0")
        action = action + noise_scale * rng.standard_normal(action.shape)
    return np.clip(action, -1.0, 1.0)


def critic_update(batch: dict, nets: DdpgNets, hp: Hyperparams) -> float:
    """One mean-squared-error step toward the bootstrapped targets;
    returns the pre-step loss."""
    next_actions = nets.target_actor.forward(batch["next_states"])
    q_next = nets.target_critic.forward(
        np.hstack([batch["next_states"], next_actions]))[:, 0]
    targets = batch["rewards"] + hp.discount * (1.0 - batch["dones"]) * q_next

    critic_in = np.hstack([batch["states"], batch["actions"]])
    q, cache = nets.critic.forward_cached(critic_in)
    err = q[:, 0] - targets
    loss = float(np.mean(err ** 2))
    grad_q = (2.0 / err.size) * err[:, None]
    grads, _ = nets.critic.backward(cache, grad_q)
    nets.critic_opt.step(nets.critic.parameters, grads)
    return loss


def actor_update(batch: dict, nets: DdpgNets, hp: Hyperparams) -> float:
    """One ascent step on mean Q(s, actor(s)) through the critic's action
    gradient; returns the pre-step mean Q."""
    states = batch["states"]
    actions, actor_cache = nets.actor.forward_cached(states)
    critic_in = np.hstack([states, actions])
    q, critic_cache = nets.critic.forward_cached(critic_in)
    mean_q = float(np.mean(q))

    upstream = np.full_like(q, 1.0 / q.shape[0])
    _, d_input = nets.critic.backward(critic_cache, upstream)
    d_actions = d_input[:, states.shape[1]:]
    grads, _ = nets.actor.backward(actor_cache, d_actions)
    ascent = [-g for g in grads]
    nets.actor_opt.step(nets.actor.parameters, ascent)
    return mean_q


@dataclass
class StepRecord:
    episode: int
    step: int
    reward: float
    sum_rate: float
    crb: float
    penalty: float
    feasible: bool
    critic_loss: float
    mean_q: float
    noise_scale: float
    report: object = None  # ConstraintReport of the step, for telemetry


@dataclass
class TrainResult:
    best_pair: PrecoderPair
    best_reward: float
    best_sum_rate: float
    best_crb: float
    history: list = field(default_factory=list)
    actor: Mlp | None = None
    critic: Mlp | None = None

    def rewards(self) -> np.ndarray:
        return np.array([rec.reward for rec in self.history])


def train(env: RisIsacEnv, hp: Hyperparams, seed: int) -> TrainResult:
    """Run the full episode loop on the environment's frozen scenario."""
    init_ss, noise_ss, buffer_ss = np.random.SeedSequence([seed, 1]).spawn(3)
    nets = build_nets(env.state_dim, env.action_dim, hp,
                      np.random.Generator(np.random.PCG64(init_ss)))
    noise_rng = np.random.Generator(np.random.PCG64(noise_ss))
    buffer = ReplayBuffer(hp.buffer_capacity, env.state_dim, env.action_dim,
                          np.random.Generator(np.random.PCG64(buffer_ss)))

    best_reward = -np.inf
    best_pair = env.initial_pair()
    best_sum_rate = 0.0
    best_crb = float("inf")
    noise_scale = hp.noise_scale
    history: list = []

    env.steps_per_episode = hp.steps_per_episode
    for episode in range(hp.episodes):
        state = env.reset()
        for step in range(hp.steps_per_episode):
            action = select_action(nets.actor, state, noise_scale, noise_rng)
            outcome = env.step(action)
            # A step-budget cutoff is not a terminal state: bootstrap through
            # it so the critic's fixed point does not depend on the horizon.
            buffer.push(state, action, outcome.reward, outcome.next_state,
                        outcome.done and not outcome.truncated)

            loss = float("nan")
            mean_q = float("nan")
            if buffer.size >= hp.batch_size:
                batch = buffer.sample(hp.batch_size)
                loss = critic_update(batch, nets, hp)
                mean_q = actor_update(batch, nets, hp)
                soft_update(nets.target_critic.parameters,
                            nets.critic.parameters, hp.tau)
                soft_update(nets.target_actor.parameters,
                            nets.actor.parameters, hp.tau)

            if outcome.reward > best_reward:
                best_reward = outcome.reward
                best_pair = outcome.pair.copy()
                best_sum_rate = outcome.sum_rate
                best_crb = outcome.crb

            history.append(StepRecord(
                episode=episode, step=step, reward=outcome.reward,
                sum_rate=outcome.sum_rate, crb=outcome.crb,
                penalty=outcome.report.penalty,
                feasible=outcome.report.all_ok,
                critic_loss=loss, mean_q=mean_q, noise_scale=noise_scale,
                report=outcome.report))

            noise_scale *= hp.noise_decay
            state = outcome.next_state
            if outcome.done:
                break

    return TrainResult(best_pair=best_pair, best_reward=best_reward,
                       best_sum_rate=best_sum_rate, best_crb=best_crb,
                       history=history, actor=nets.actor, critic=nets.critic)
