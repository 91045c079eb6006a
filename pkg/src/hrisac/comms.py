"""Downlink communication metrics: per-user SINR, rate and sum rate."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet
from .config import ExperimentConfig


@dataclass
class NoiseParams:
    """AWGN power and active-element dynamic-noise power, in watts."""

    awgn_w: float
    dynamic_w: float = 0.0

    def __post_init__(self) -> None:
        if self.awgn_w < 0 or self.dynamic_w < 0:
            raise ValueError("noise powers must be >= 0")

    @classmethod
    def from_config(cls, cfg: ExperimentConfig) -> "NoiseParams":
        return cls(awgn_w=cfg.noise_w, dynamic_w=cfg.active_noise_w)


@dataclass
class PrecoderPair:
    """The decision variables: BS beamformer and RIS precoding profile.

    ``beams`` is M x (K+1); columns 0..K-1 serve the users and column K is
    the sensing stream.  ``phases`` holds the diagonal of the RIS precoding
    matrix.  ``active_set`` lists the amplifying element indices.
    """

    beams: np.ndarray                 # complex (M, K+1)
    phases: np.ndarray                # complex (N,)
    active_set: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))

    def __post_init__(self) -> None:
        self.beams = np.asarray(self.beams, dtype=complex)
        self.phases = np.asarray(self.phases, dtype=complex)
        self.active_set = np.asarray(self.active_set, dtype=int)

    @property
    def num_users(self) -> int:
        return self.beams.shape[1] - 1

    @property
    def num_ris(self) -> int:
        return self.phases.shape[0]

    def active_mask(self) -> np.ndarray:
        mask = np.zeros(self.num_ris, dtype=bool)
        mask[self.active_set] = True
        return mask

    def validate(self, max_active_amplitude: float, tol: float = 1e-9) -> None:
        n = self.num_ris
        if len(np.unique(self.active_set)) != len(self.active_set):
            raise ValueError("active_set indices must be unique")
        if self.active_set.size and (self.active_set.min() < 0 or self.active_set.max() >= n):
            raise ValueError("active_set indices out of range")
        mask = self.active_mask()
        mags = np.abs(self.phases)
        if np.any(mags[~mask] > 1.0 + tol):
            raise ValueError("passive element amplitude exceeds 1")
        if np.any(mags[mask] > max_active_amplitude + tol):
            raise ValueError("active element amplitude exceeds the cap")

    def copy(self) -> "PrecoderPair":
        return PrecoderPair(self.beams.copy(), self.phases.copy(), self.active_set.copy())


def cascade_row(receiver_row: np.ndarray, pair: PrecoderPair,
                channels: ChannelSet) -> np.ndarray:
    """Effective BS->receiver row through the RIS: g^H Phi H, length M."""
    return (receiver_row * pair.phases) @ channels.bs_ris


def sinr_user(k: int, pair: PrecoderPair, channels: ChannelSet, noise: NoiseParams,
              sensing_interference_channel: str = "user") -> float:
    """SINR of communication user k (0-based, k < K).

    The denominator collects inter-user interference, the sensing-stream
    leak, the dynamic noise re-radiated by the active elements and the AWGN
    floor.  ``sensing_interference_channel`` selects whether the sensing
    stream reaches user k through its own channel or the target's.
    """
    num_users = pair.num_users
    if not 0 <= k < num_users:
        raise IndexError(f"user index {k} out of range [0, {num_users})")
    g_row = channels.user_row(k)
    eff = cascade_row(g_row, pair, channels)         # g_k^H Phi H
    received = eff @ pair.beams                      # one scalar per stream
    signal = abs(received[k]) ** 2

    interference = 0.0
    for j in range(num_users):
        if j != k:
            interference += abs(received[j]) ** 2

    if sensing_interference_channel == "user":
        sens_leak = abs(received[num_users]) ** 2
    elif sensing_interference_channel == "target":
        eff_t = cascade_row(channels.target_row, pair, channels)
        sens_leak = abs(eff_t @ pair.beams[:, num_users]) ** 2
    else:
        raise ValueError("sensing_interference_channel must be 'user' or 'target'")

    mask = pair.active_mask()
    dyn = noise.dynamic_w * float(np.sum(np.abs(g_row[mask] * pair.phases[mask]) ** 2))

    denom = interference + sens_leak + dyn + noise.awgn_w
    if denom == 0.0:
        raise ZeroDivisionError("SINR denominator is zero (no noise, no interference)")
    return signal / denom


def user_rate(k: int, pair: PrecoderPair, channels: ChannelSet, noise: NoiseParams,
              sensing_interference_channel: str = "user") -> float:
    """Achievable rate log2(1 + SINR_k) in bit/s/Hz."""
    return float(np.log2(1.0 + sinr_user(k, pair, channels, noise,
                                         sensing_interference_channel)))


def all_sinrs(pair: PrecoderPair, channels: ChannelSet, noise: NoiseParams,
              sensing_interference_channel: str = "user") -> np.ndarray:
    return np.array([sinr_user(k, pair, channels, noise, sensing_interference_channel)
                     for k in range(pair.num_users)])


def sum_rate(pair: PrecoderPair, channels: ChannelSet, noise: NoiseParams,
             sensing_interference_channel: str = "user") -> float:
    """Sum of the K user rates; the sensing stream contributes none."""
    sinrs = all_sinrs(pair, channels, noise, sensing_interference_channel)
    return float(np.sum(np.log2(1.0 + sinrs)))
