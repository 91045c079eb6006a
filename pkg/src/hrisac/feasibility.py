"""Constraint evaluation and projection of raw decision variables.

The projection enforces the BS power budget, the RIS power budget and the
per-element amplitude caps deterministically; the SINR floor and the CRB
ceiling are only reported and feed the reward penalty.

Violations smaller than 1e-9 of the corresponding budget count as zero so
that projection round-off cannot flip a feasibility flag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, Geometry
from .comms import NoiseParams, PrecoderPair, all_sinrs
from .config import ExperimentConfig
from .sensing import (TargetParams, UnidentifiableTargetError, crb_scalar,
                      fim, transmit_covariance)

REL_TOL = 1e-9


@dataclass
class Budgets:
    """Linear-unit limits of the constraint set."""

    bs_power_w: float
    ris_power_w: float
    target_noise_w: float     # cap on the dynamic noise reaching the target
    sinr_floor: float         # linear
    max_active_amplitude: float
    crb_limit: float          # rad^2

    def __post_init__(self) -> None:
        positive = (self.bs_power_w, self.ris_power_w, self.target_noise_w,
                    self.max_active_amplitude, self.crb_limit)
        if any(v <= 0 for v in positive):
            raise ValueError("budgets must be strictly positive")
        if self.sinr_floor < 0:
            raise ValueError("sinr_floor must be >= 0")

    @classmethod
    def from_config(cls, cfg: ExperimentConfig) -> "Budgets":
        return cls(bs_power_w=cfg.bs_power_w,
                   ris_power_w=cfg.ris_power_w,
                   target_noise_w=cfg.target_noise_limit_w,
                   sinr_floor=cfg.sinr_floor_linear,
                   max_active_amplitude=cfg.max_active_amplitude,
                   crb_limit=cfg.crb_limit)


@dataclass
class PenaltyWeights:
    sinr: float = 1.0
    crb: float = 1e3
    power: float = 1.0

    @classmethod
    def from_config(cls, cfg: ExperimentConfig) -> "PenaltyWeights":
        return cls(sinr=cfg.sinr_penalty_weight, crb=cfg.crb_penalty_weight,
                   power=cfg.power_penalty_weight)


@dataclass
class ConstraintReport:
    """Pass flags and clipped violation magnitudes for the whole constraint
    set, plus the aggregate penalty (zero exactly when everything passes)."""

    sinr_ok: bool
    sinr_violation: float
    bs_power_ok: bool
    bs_power_violation: float
    ris_power_ok: bool
    ris_power_violation: float
    target_noise_ok: bool
    target_noise_violation: float
    amplitude_ok: bool
    amplitude_violation: float
    crb_ok: bool
    crb_violation: float
    penalty: float

    @property
    def all_ok(self) -> bool:
        return (self.sinr_ok and self.bs_power_ok and self.ris_power_ok
                and self.target_noise_ok and self.amplitude_ok and self.crb_ok)

    def as_row(self) -> dict:
        return {
            "penalty": self.penalty,
            "feasible": int(self.all_ok),
            "sinr_ok": int(self.sinr_ok),
            "bs_power_ok": int(self.bs_power_ok),
            "ris_power_ok": int(self.ris_power_ok),
            "target_noise_ok": int(self.target_noise_ok),
            "amplitude_ok": int(self.amplitude_ok),
            "crb_ok": int(self.crb_ok),
        }


def _excess(value: float, limit: float) -> float:
    over = value - limit
    if over <= REL_TOL * max(limit, 1.0):
        return 0.0
    return over


def check_bs_power(pair: PrecoderPair, budgets: Budgets) -> tuple[bool, float]:
    used = float(np.real(np.trace(transmit_covariance(pair.beams))))
    violation = _excess(used, budgets.bs_power_w)
    return violation == 0.0, violation


def ris_power_consumed(pair: PrecoderPair, channels: ChannelSet,
                       noise: NoiseParams) -> float:
    """Closed-form E ||A Phi (H x + n)||^2 for diagonal Phi and 0/1 mask A."""
    mask = pair.active_mask()
    if not mask.any():
        return 0.0
    rx = transmit_covariance(pair.beams)
    h = channels.bs_ris
    m_diag = np.real(np.einsum("ij,jk,ik->i", h[mask], rx, h[mask].conj()))
    m_diag = m_diag + noise.dynamic_w
    return float(np.sum(np.abs(pair.phases[mask]) ** 2 * m_diag))


def check_ris_power(pair: PrecoderPair, channels: ChannelSet, noise: NoiseParams,
                    budgets: Budgets) -> tuple[bool, float]:
    violation = _excess(ris_power_consumed(pair, channels, noise), budgets.ris_power_w)
    return violation == 0.0, violation


def target_noise_leak(pair: PrecoderPair, channels: ChannelSet,
                      noise: NoiseParams) -> float:
    """Dynamic-noise power forwarded to the target: ||g_l^H A Phi||^2 sigma_a^2."""
    mask = pair.active_mask()
    row = channels.target_row
    return noise.dynamic_w * float(np.sum(np.abs(row[mask] * pair.phases[mask]) ** 2))


def check_target_noise(pair: PrecoderPair, channels: ChannelSet, noise: NoiseParams,
                       budgets: Budgets) -> tuple[bool, float]:
    violation = _excess(target_noise_leak(pair, channels, noise), budgets.target_noise_w)
    return violation == 0.0, violation


def check_amplitudes(pair: PrecoderPair, budgets: Budgets) -> tuple[bool, float]:
    mags = np.abs(pair.phases)
    mask = pair.active_mask()
    worst = 0.0
    if np.any(~mask):
        worst = max(worst, _excess(float(mags[~mask].max()), 1.0))
    if mask.any():
        worst = max(worst, _excess(float(mags[mask].max()), budgets.max_active_amplitude))
    return worst == 0.0, worst


def check_sinr(pair: PrecoderPair, channels: ChannelSet, noise: NoiseParams,
               budgets: Budgets, sensing_interference_channel: str = "user"
               ) -> tuple[bool, float]:
    worst = float(np.min(all_sinrs(pair, channels, noise, sensing_interference_channel)))
    shortfall = budgets.sinr_floor - worst
    if shortfall <= REL_TOL * max(budgets.sinr_floor, 1.0):
        return True, 0.0
    return False, shortfall


def check_crb(pair: PrecoderPair, channels: ChannelSet, target: TargetParams,
              noise: NoiseParams, geom: Geometry, budgets: Budgets,
              reduction: str = "trace") -> tuple[bool, float, float]:
    """Returns (flag, violation, crb_value); an unidentifiable target counts
    as a failure with violation equal to the full budget."""
    try:
        fisher = fim(pair, channels, target, noise, geom)
        value = crb_scalar(fisher, reduction=reduction)
    except UnidentifiableTargetError:
        return False, budgets.crb_limit, float("inf")
    violation = _excess(value, budgets.crb_limit)
    return violation == 0.0, violation, value


def evaluate_constraints(pair: PrecoderPair, channels: ChannelSet, geom: Geometry,
                         target: TargetParams, noise: NoiseParams, budgets: Budgets,
                         weights: PenaltyWeights,
                         sensing_interference_channel: str = "user",
                         crb_reduction: str = "trace",
                         ) -> tuple[ConstraintReport, float]:
    """Full constraint report plus the realized CRB scalar."""
    sinr_ok, sinr_v = check_sinr(pair, channels, noise, budgets,
                                 sensing_interference_channel)
    bs_ok, bs_v = check_bs_power(pair, budgets)
    ris_ok, ris_v = check_ris_power(pair, channels, noise, budgets)
    tn_ok, tn_v = check_target_noise(pair, channels, noise, budgets)
    amp_ok, amp_v = check_amplitudes(pair, budgets)
    crb_ok, crb_v, crb_value = check_crb(pair, channels, target, noise, geom,
                                         budgets, reduction=crb_reduction)
    penalty = (weights.sinr * sinr_v
               + weights.crb * crb_v
               + weights.power * (bs_v + ris_v + tn_v + amp_v))
    report = ConstraintReport(
        sinr_ok=sinr_ok, sinr_violation=sinr_v,
        bs_power_ok=bs_ok, bs_power_violation=bs_v,
        ris_power_ok=ris_ok, ris_power_violation=ris_v,
        target_noise_ok=tn_ok, target_noise_violation=tn_v,
        amplitude_ok=amp_ok, amplitude_violation=amp_v,
        crb_ok=crb_ok, crb_violation=crb_v,
        penalty=penalty,
    )
    return report, crb_value


def project_action(raw_beams: np.ndarray, raw_phases: np.ndarray, budgets: Budgets,
                   active_set: np.ndarray, channels: ChannelSet,
                   noise: NoiseParams) -> PrecoderPair:
    """Project raw decision variables onto the power/amplitude-feasible set.

    BS power: uniform down-scaling onto the budget sphere when exceeded.
    Phases: passive elements keep only their phase (zero maps to 1), active
    elements clamp their amplitude to the cap.  RIS power: one exact uniform
    rescale of the active amplitudes (the consumed power is quadratic in
    them), with a safety recheck.
    """
    beams = np.asarray(raw_beams, dtype=complex).copy()
    phases = np.asarray(raw_phases, dtype=complex).copy()
    active_set = np.asarray(active_set, dtype=int)

    used = float(np.real(np.trace(beams @ beams.conj().T)))
    if used > budgets.bs_power_w and used > 0.0:
        beams *= np.sqrt(budgets.bs_power_w / used)

    mask = np.zeros(phases.shape[0], dtype=bool)
    mask[active_set] = True
    mags = np.abs(phases)
    passive = ~mask
    safe = mags[passive] > 0.0
    unit = np.ones(int(passive.sum()), dtype=complex)
    unit[safe] = phases[passive][safe] / mags[passive][safe]
    phases[passive] = unit
    if mask.any():
        over = mags[mask] > budgets.max_active_amplitude
        if over.any():
            scale = np.ones(int(mask.sum()))
            scale[over] = budgets.max_active_amplitude / mags[mask][over]
            phases[mask] = phases[mask] * scale

    pair = PrecoderPair(beams=beams, phases=phases, active_set=active_set)
    for _ in range(2):
        consumed = ris_power_consumed(pair, channels, noise)
        if consumed <= budgets.ris_power_w or not mask.any():
            break
        pair.phases[mask] *= np.sqrt(budgets.ris_power_w / consumed)
    return pair
