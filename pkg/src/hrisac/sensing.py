"""Radar side: transmit covariance, echo-response derivatives, the Fisher
information matrix over (azimuth, elevation, Re rho, Im rho) and the
angle-estimation CRB.

The echo response of the sensing panel is the rank-1 matrix
``Omega = alpha(az, el) beta(az, el)^T`` (sensing arrival times reflecting
departure, unnormalized transpose).  Writing the element phases as linear
functions of the per-axis element indices gives closed-form angle
derivatives; the FIM is then the real part of a 4x4 Gram matrix of the four
derivative directions under the inner product
``<A, B> = Tr(A Phi M Phi^H B^H)`` with
``M = T * H Rx H^H + sigma_a^2 I``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channel import (ChannelSet, Geometry, PropagationParams, path_loss,
                      ris_departure_vector, sensing_arrival_vector)
from .comms import NoiseParams, PrecoderPair
from .config import ExperimentConfig


class UnidentifiableTargetError(RuntimeError):
    """The Fisher information available is insufficient to bound the angles."""


@dataclass
class TargetParams:
    """Complex echo gain (round-trip loss folded with the RCS), target
    angles and the echo dwell length in symbols."""

    echo_gain: complex
    azimuth: float
    elevation: float
    dwell_symbols: int

    def __post_init__(self) -> None:
        if self.dwell_symbols < 1:
            raise ValueError("dwell_symbols must be >= 1")
        if not np.isfinite(self.echo_gain) or self.echo_gain == 0:
            raise ValueError("echo_gain must be finite and nonzero")

    @classmethod
    def from_config(cls, cfg: ExperimentConfig, geom: Geometry,
                    prop: PropagationParams) -> "TargetParams":
        if cfg.echo_gain_mode == "fixed":
            gain = cfg.echo_gain * np.exp(1j * cfg.echo_phase)
        else:
            # Round-trip amplitude over the RIS->target->RIS legs.
            pl = path_loss(prop.frequency_hz, geom.target_distance_m,
                           prop.absorption_per_m, prop.speed_of_light)
            gain = np.sqrt(cfg.radar_cross_section) / pl * np.exp(1j * cfg.echo_phase)
        return cls(echo_gain=complex(gain), azimuth=geom.target_azimuth,
                   elevation=geom.target_elevation, dwell_symbols=cfg.dwell_symbols)


@dataclass
class FisherMatrix:
    """Real symmetric 4x4 information matrix over (az, el, Re rho, Im rho)."""

    matrix: np.ndarray

    @property
    def angle_block(self) -> np.ndarray:
        return self.matrix[:2, :2]

    @property
    def cross_block(self) -> np.ndarray:
        return self.matrix[:2, 2:]

    @property
    def gain_block(self) -> np.ndarray:
        return self.matrix[2:, 2:]

    def validate(self) -> None:
        j = self.matrix
        if j.shape != (4, 4):
            raise ValueError("Fisher matrix must be 4x4")
        scale = np.max(np.abs(j))
        if scale > 0 and np.max(np.abs(j - j.T)) > 1e-10 * scale:
            raise ValueError("Fisher matrix is not symmetric")
        eigs = np.linalg.eigvalsh((j + j.T) / 2.0)
        if np.trace(j) > 0 and eigs.min() < -1e-8 * np.trace(j):
            raise ValueError("Fisher matrix is not positive semidefinite")


def transmit_covariance(beams: np.ndarray) -> np.ndarray:
    """Covariance of the transmitted signal under unit-power symbols: W W^H."""
    w = np.asarray(beams, dtype=complex)
    return w @ w.conj().T


def axis_indices(rows: int, cols: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-element (y, z) axis indices in Kronecker order (y outer, z inner)."""
    y = np.repeat(np.arange(rows), cols).astype(float)
    z = np.tile(np.arange(cols), rows).astype(float)
    return y, z


def omega_matrix(geom: Geometry) -> np.ndarray:
    """Echo response alpha beta^T toward the target, (N_s, N), unit Frobenius."""
    alpha = sensing_arrival_vector(geom, geom.target_azimuth, geom.target_elevation)
    beta = ris_departure_vector(geom, geom.target_azimuth, geom.target_elevation)
    return np.outer(alpha, beta)


def omega_derivatives(geom: Geometry) -> tuple[np.ndarray, np.ndarray]:
    """Analytic partials of the echo response w.r.t. azimuth and elevation.

    With element phases delta = (2 pi / lambda)(kappa_y sin(az) sin(el) d_y
    + kappa_z cos(el) d_z) on both panels, the product rule gives two index-
    weighted copies of the response per angle.  The elevation derivative has
    a -sin(el) d_z term from the z-axis phase; the azimuth derivative
    vanishes at sin(el) ~ 0, which triggers a diagnostic warning.
    """
    az, el = geom.target_azimuth, geom.target_elevation
    if abs(np.sin(el)) < 1e-6:
        warnings.warn("azimuth derivative is numerically degenerate near sin(el)=0",
                      RuntimeWarning, stacklevel=2)
    k0 = 2.0 * np.pi / geom.wavelength_m
    omega = omega_matrix(geom)

    sy, sz = axis_indices(geom.sensing_rows, geom.sensing_cols)
    ry, rz = axis_indices(geom.ris_rows, geom.ris_cols)

    # Index-weighted responses: rows by sensing-axis index, cols by RIS-axis index.
    weighted_y = sy[:, None] * omega + omega * ry[None, :]
    weighted_z = sz[:, None] * omega + omega * rz[None, :]

    d_az = -1j * k0 * np.cos(az) * np.sin(el) * geom.spacing_y_m * weighted_y
    d_el = (-1j * k0 * np.sin(az) * np.cos(el) * geom.spacing_y_m * weighted_y
            + 1j * k0 * np.sin(el) * geom.spacing_z_m * weighted_z)
    return d_az, d_el


def fim(pair: PrecoderPair, channels: ChannelSet, target: TargetParams,
        noise: NoiseParams, geom: Geometry) -> FisherMatrix:
    """Assemble the 4x4 FIM from the closed-form trace expressions.

    The four derivative directions of the noise-free echo mean are
    ``rho * dOmega/daz``, ``rho * dOmega/del``, ``Omega`` and ``j Omega``;
    the dwell length multiplies the transmit term while the dynamic-noise
    term enters unscaled.
    """
    n = geom.num_ris
    if channels.bs_ris.shape[0] != n or pair.phases.shape[0] != n:
        raise ValueError("channel/precoder dimensions are inconsistent")
    if channels.bs_ris.shape[1] != pair.beams.shape[0]:
        raise ValueError("BS antenna count mismatch between channel and beams")

    rx = transmit_covariance(pair.beams)
    h = channels.bs_ris
    m_eff = target.dwell_symbols * (h @ rx @ h.conj().T)
    if noise.dynamic_w > 0.0:
        m_eff = m_eff + noise.dynamic_w * np.eye(n)

    phi = pair.phases
    # Phi M Phi^H for diagonal Phi.
    p_mat = (phi[:, None] * m_eff) * phi.conj()[None, :]

    omega = omega_matrix(geom)
    d_az, d_el = omega_derivatives(geom)
    rho = target.echo_gain
    directions = [rho * d_az, rho * d_el, omega, 1j * omega]

    right = [d @ p_mat for d in directions]
    gram = np.empty((4, 4), dtype=complex)
    for i in range(4):
        for j in range(4):
            gram[i, j] = np.vdot(directions[j], right[i])

    j_mat = (2.0 / noise.awgn_w) * gram.real
    j_mat = (j_mat + j_mat.T) / 2.0
    return FisherMatrix(matrix=j_mat)


def crb_angles(fisher: FisherMatrix, cond_limit: float = 1e12) -> np.ndarray:
    """Angle-estimation CRB: inverse Schur complement of the gain block.

    Raises :class:`UnidentifiableTargetError` instead of silently
    pseudo-inverting when the information matrix cannot bound the angles.
    """
    j_aa = fisher.angle_block
    j_ar = fisher.cross_block
    j_rr = fisher.gain_block
    if not np.all(np.isfinite(fisher.matrix)):
        raise UnidentifiableTargetError("Fisher matrix has non-finite entries")
    if np.linalg.cond(j_rr) > cond_limit:
        raise UnidentifiableTargetError("echo-gain information block is singular")
    schur = j_aa - j_ar @ np.linalg.solve(j_rr, j_ar.T)
    schur = (schur + schur.T) / 2.0
    if np.linalg.cond(schur) > cond_limit:
        raise UnidentifiableTargetError("angle information is singular")
    crb = np.linalg.inv(schur)
    return (crb + crb.T) / 2.0


def crb_scalar(fisher: FisherMatrix, reduction: str = "trace") -> float:
    """Reduce the 2x2 angle CRB to one number for the sensing constraint."""
    crb = crb_angles(fisher)
    if reduction == "trace":
        return float(np.trace(crb))
    if reduction == "max":
        return float(np.max(np.diag(crb)))
    raise ValueError("reduction must be 'trace' or 'max'")
