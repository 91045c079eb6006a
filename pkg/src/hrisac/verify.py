"""Independent oracles and the self-check report.

Each oracle recomputes a quantity by a route that shares nothing with the
production implementation it checks (scalar loops, finite differences,
Monte Carlo draws, full matrix inversion) and reports the measured
discrepancy against a fixed threshold.  The pytest suite reuses these
helpers; the CLI ``verify`` subcommand prints one line per oracle.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .channel import Geometry
from .comms import NoiseParams, PrecoderPair, sinr_user
from .config import ExperimentConfig
from .env import Scenario, build_scenario
from .feasibility import (check_amplitudes, check_bs_power, check_ris_power,
                          project_action, ris_power_consumed)
from .nn import Mlp
from .sensing import (FisherMatrix, TargetParams, crb_angles, omega_derivatives,
                      omega_matrix)


# --- scalar-expansion SINR oracle -------------------------------------------

def sinr_scalar_oracle(k: int, pair: PrecoderPair, channels, noise: NoiseParams,
                       sensing_interference_channel: str = "user") -> float:
    """Element-by-element evaluation of the SINR with explicit Python loops."""
    g = channels.ris_links[k]
    h = channels.bs_ris
    w = pair.beams
    n_ris, m = h.shape
    num_users = w.shape[1] - 1
    active = set(int(i) for i in pair.active_set)

    def received(row, col):
        total = 0.0 + 0.0j
        for n in range(n_ris):
            inner = 0.0 + 0.0j
            for mm in range(m):
                inner += h[n, mm] * w[mm, col]
            total += row[n] * pair.phases[n] * inner
        return total

    signal = abs(received(g, k)) ** 2
    interference = 0.0
    for j in range(num_users):
        if j != k:
            interference += abs(received(g, j)) ** 2
    if sensing_interference_channel == "user":
        sens = abs(received(g, num_users)) ** 2
    else:
        sens = abs(received(channels.ris_links[num_users], num_users)) ** 2
    dyn = 0.0
    for n in active:
        dyn += abs(g[n] * pair.phases[n]) ** 2
    dyn *= noise.dynamic_w
    return signal / (interference + sens + dyn + noise.awgn_w)


# --- finite-difference derivatives of the echo response ----------------------

def fd_omega_derivatives(geom: Geometry, step: float = 1e-6
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Central differences of the echo response over the target angles."""
    def at(az, el):
        shifted = dataclasses.replace(geom, target_azimuth=az,
                                      target_elevation=el)
        return omega_matrix(shifted)

    az, el = geom.target_azimuth, geom.target_elevation
    d_az = (at(az + step, el) - at(az - step, el)) / (2.0 * step)
    d_el = (at(az, el + step) - at(az, el - step)) / (2.0 * step)
    return d_az, d_el


# --- Monte-Carlo FIM ----------------------------------------------------------

def monte_carlo_fim(pair: PrecoderPair, channels, target: TargetParams,
                    noise: NoiseParams, geom: Geometry, draws: int,
                    seed: int) -> np.ndarray:
    """Sample the information matrix from the stacked echo derivatives.

    Draws the transmit block (covariance W W^H per symbol) and the dynamic
    noise, stacks the four derivative vectors of the vectorized noise-free
    echo, and averages (2/sigma_o^2) Re{D^H D} over the draws.
    """
    rng = np.random.default_rng(seed)
    t = target.dwell_symbols
    w = pair.beams
    phi = pair.phases
    h = channels.bs_ris
    omega = omega_matrix(geom)
    d_az, d_el = omega_derivatives(geom)
    rho = target.echo_gain
    sigma_a = np.sqrt(noise.dynamic_w)

    total = np.zeros((4, 4))
    for _ in range(draws):
        symbols = (rng.standard_normal((w.shape[1], t))
                   + 1j * rng.standard_normal((w.shape[1], t))) / np.sqrt(2.0)
        x = w @ symbols
        n_a = sigma_a * (rng.standard_normal((h.shape[0], t))
                         + 1j * rng.standard_normal((h.shape[0], t))) / np.sqrt(2.0)
        base = phi[:, None] * (h @ x + n_a)
        u_az = (rho * (d_az @ base)).ravel()
        u_el = (rho * (d_el @ base)).ravel()
        u_re = (omega @ base).ravel()
        stack = np.stack([u_az, u_el, u_re, 1j * u_re], axis=1)
        total += (2.0 / noise.awgn_w) * np.real(stack.conj().T @ stack)
    return total / draws


# --- CRB corner oracle ----------------------------------------------------------

def crb_corner_oracle(fisher: FisherMatrix) -> np.ndarray:
    """Angle CRB as the corner block of the full 4x4 inverse."""
    return np.linalg.inv(fisher.matrix)[:2, :2]


def random_psd_fisher(rng: np.random.Generator, dim: int = 4,
                      jitter: float = 1e-3) -> FisherMatrix:
    a = rng.standard_normal((dim, dim + 2))
    mat = a @ a.T + jitter * np.eye(dim)
    return FisherMatrix(matrix=mat)


# --- Monte-Carlo RIS power -------------------------------------------------------

def mc_ris_power(pair: PrecoderPair, channels, noise: NoiseParams, draws: int,
                 seed: int) -> float:
    """Average consumed RIS power over random symbols and dynamic noise."""
    rng = np.random.default_rng(seed)
    w = pair.beams
    h = channels.bs_ris
    mask = pair.active_mask()
    gains = (pair.phases * mask)[:, None]
    sigma_a = np.sqrt(noise.dynamic_w)
    symbols = (rng.standard_normal((w.shape[1], draws))
               + 1j * rng.standard_normal((w.shape[1], draws))) / np.sqrt(2.0)
    n_a = sigma_a * (rng.standard_normal((h.shape[0], draws))
                     + 1j * rng.standard_normal((h.shape[0], draws))) / np.sqrt(2.0)
    v = gains * (h @ (w @ symbols) + n_a)
    return float(np.mean(np.sum(np.abs(v) ** 2, axis=0)))


# --- finite-difference network gradients ------------------------------------------

def numeric_mlp_gradients(net: Mlp, x: np.ndarray, upstream: np.ndarray,
                          step: float = 1e-5) -> list:
    """Central differences of sum(output * upstream) over every parameter."""
    x2d = np.atleast_2d(np.asarray(x, dtype=float))

    def objective() -> float:
        y, _ = net.forward_cached(x2d)
        return float(np.sum(y * upstream))

    grads = []
    for param in net.parameters:
        grad = np.zeros_like(param)
        flat_p = param.reshape(-1)
        flat_g = grad.reshape(-1)
        for i in range(flat_p.size):
            keep = flat_p[i]
            flat_p[i] = keep + step
            hi = objective()
            flat_p[i] = keep - step
            lo = objective()
            flat_p[i] = keep
            flat_g[i] = (hi - lo) / (2.0 * step)
        grads.append(grad)
    return grads


# --- the report ------------------------------------------------------------------

@dataclass
class OracleCheck:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""


def _random_pair(scenario: Scenario, rng: np.random.Generator) -> PrecoderPair:
    from .baselines import sample_raw_action
    raw_beams, raw_phases = sample_raw_action(scenario, rng)
    return project_action(raw_beams, raw_phases, scenario.budgets,
                          scenario.active_set, scenario.channels, scenario.noise)


def _rel_err(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def run_oracles(quick: bool = True) -> list:
    """Run the full oracle suite on desk-profile instances."""
    checks: list = []
    cfg = ExperimentConfig.desk()

    # SINR scalar expansion
    worst = 0.0
    for seed in range(10):
        scenario = build_scenario(cfg, seed)
        rng = np.random.default_rng(100 + seed)
        pair = _random_pair(scenario, rng)
        for k in range(cfg.num_users):
            got = sinr_user(k, pair, scenario.channels, scenario.noise)
            want = sinr_scalar_oracle(k, pair, scenario.channels, scenario.noise)
            worst = max(worst, abs(got - want) / abs(want))
    checks.append(OracleCheck("sinr-scalar-expansion", worst <= 1e-10, worst,
                              1e-10, "max relative error over 10 instances"))

    # analytic echo-response derivatives vs central differences
    scenario = build_scenario(cfg, 0)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(5):
        az = rng.uniform(0.05, 2 * np.pi - 0.05)
        el = rng.uniform(0.15, np.pi - 0.15)
        geom = dataclasses.replace(scenario.geometry, target_azimuth=az,
                                   target_elevation=el)
        got_az, got_el = omega_derivatives(geom)
        want_az, want_el = fd_omega_derivatives(geom)
        worst = max(worst, _rel_err(got_az, want_az), _rel_err(got_el, want_el))
    checks.append(OracleCheck("omega-derivatives-fd", worst <= 1e-6, worst,
                              1e-6, "max relative Frobenius error, 5 angle pairs"))

    # closed-form FIM vs Monte-Carlo derivative stacks
    from .sensing import fim
    n_instances = 2 if quick else 5
    worst = 0.0
    for seed in range(n_instances):
        scenario = build_scenario(cfg, seed)
        rng = np.random.default_rng(200 + seed)
        pair = _random_pair(scenario, rng)
        target = dataclasses.replace(
            scenario.target,
            echo_gain=complex(rng.normal(), rng.normal()))
        got = fim(pair, scenario.channels, target, scenario.noise,
                  scenario.geometry).matrix
        want = monte_carlo_fim(pair, scenario.channels, target, scenario.noise,
                               scenario.geometry, draws=200, seed=300 + seed)
        worst = max(worst, _rel_err(got, want))
    checks.append(OracleCheck("fim-monte-carlo", worst <= 0.05, worst, 0.05,
                              f"relative Frobenius error, {n_instances} instances x 200 draws"))

    # Schur-complement CRB vs full-inverse corner
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        fisher = random_psd_fisher(rng)
        worst = max(worst, _rel_err(crb_angles(fisher), crb_corner_oracle(fisher)))
    checks.append(OracleCheck("crb-schur-vs-inverse", worst <= 1e-8, worst,
                              1e-8, "20 random PSD information matrices"))

    # projection idempotence + feasibility of the projected output
    scenario = build_scenario(cfg, 1)
    rng = np.random.default_rng(13)
    n_raw = 1000 if quick else 10_000
    worst = 0.0
    all_ok = True
    for _ in range(n_raw):
        from .baselines import sample_raw_action
        raw_beams, raw_phases = sample_raw_action(scenario, rng)
        raw_beams = raw_beams * rng.uniform(0.0, 3.0)
        raw_phases = raw_phases * rng.uniform(0.0, 3.0)
        once = project_action(raw_beams, raw_phases, scenario.budgets,
                              scenario.active_set, scenario.channels,
                              scenario.noise)
        twice = project_action(once.beams, once.phases, scenario.budgets,
                               scenario.active_set, scenario.channels,
                               scenario.noise)
        worst = max(worst,
                    float(np.max(np.abs(once.beams - twice.beams))),
                    float(np.max(np.abs(once.phases - twice.phases))))
        ok_bs, _ = check_bs_power(once, scenario.budgets)
        ok_ris, _ = check_ris_power(once, scenario.channels, scenario.noise,
                                    scenario.budgets)
        ok_amp, _ = check_amplitudes(once, scenario.budgets)
        all_ok = all_ok and ok_bs and ok_ris and ok_amp
    checks.append(OracleCheck("projection-idempotence",
                              worst <= 1e-12 and all_ok, worst, 1e-12,
                              f"{n_raw} raw actions; power/amplitude checks "
                              f"{'pass' if all_ok else 'FAIL'}"))

    # closed-form RIS power vs Monte-Carlo average
    scenario = build_scenario(cfg, 2)
    rng = np.random.default_rng(17)
    pair = _random_pair(scenario, rng)
    closed = ris_power_consumed(pair, scenario.channels, scenario.noise)
    sampled = mc_ris_power(pair, scenario.channels, scenario.noise,
                           draws=10_000, seed=19)
    err = abs(closed - sampled) / max(abs(sampled), 1e-300)
    checks.append(OracleCheck("ris-power-monte-carlo", err <= 0.02, err, 0.02,
                              "10^4-draw Monte-Carlo expectation"))

    # network gradients vs finite differences
    rng = np.random.default_rng(23)
    worst = 0.0
    for sizes, act in (([3, 4, 2], "tanh"), ([5, 8, 8, 3], "linear")):
        net = Mlp(sizes, out_act=act, rng=rng)
        x = rng.normal(size=(4, sizes[0]))
        upstream = rng.normal(size=(4, sizes[-1]))
        _, cache = net.forward_cached(x)
        analytic, _ = net.backward(cache, upstream)
        numeric = numeric_mlp_gradients(net, x, upstream)
        for a, b in zip(analytic, numeric):
            worst = max(worst, _rel_err(a, b))
    checks.append(OracleCheck("nn-gradient-fd", worst <= 1e-5, worst, 1e-5,
                              "central differences over every parameter"))

    return checks


def format_report(checks: list) -> str:
    lines = []
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        lines.append(f"[{status}] {c.name}: measured {c.measured:.3e} "
                     f"(threshold {c.threshold:.0e}) - {c.detail}")
    n_fail = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - n_fail}/{len(checks)} oracles passed")
    return "\n".join(lines)
