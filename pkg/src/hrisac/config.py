"""Experiment configuration: profiles, config-file loading, unit conversions.

All power-like quantities are stored in the units they are usually quoted in
(dBm / dB) and converted to linear watts on demand, so that a run header can
echo both representations.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field

SPEED_OF_LIGHT = 299792458.0  # m/s


def dbm_to_watt(value_dbm: float) -> float:
    return 10.0 ** (value_dbm / 10.0) * 1e-3


def watt_to_dbm(value_w: float) -> float:
    if value_w <= 0.0:
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * math.log10(value_w * 1e3)


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


@dataclass
class ExperimentConfig:
    """Every tunable of the workbench, with full-scale defaults.

    ``paper()`` returns these defaults (M = 64, N = 80, ...); ``desk()``
    returns the small profile used by the test and acceptance suites.
    """

    profile: str = "paper"

    # --- arrays ---------------------------------------------------------
    bs_rows: int = 8                 # M_x
    bs_cols: int = 8                 # M_z, M = bs_rows * bs_cols
    ris_rows: int = 10               # N_y
    ris_cols: int = 8                # N_z, N = ris_rows * ris_cols
    sensing_rows: int = 5
    sensing_cols: int = 4            # N_s = sensing_rows * sensing_cols
    num_users: int = 3               # K
    num_active: int = 30             # q active RIS elements

    # --- propagation ----------------------------------------------------
    frequency_hz: float = 0.2e12
    absorption_per_m: float = 0.01
    speed_of_light: float = SPEED_OF_LIGHT
    element_spacing_wavelengths: float = 0.5  # applied to all four spacings

    # --- scenario geometry ----------------------------------------------
    bs_ris_distance_m: float = 20.0
    bs_ris_aoa_azimuth: float = math.pi / 3     # at the RIS
    bs_ris_aoa_elevation: float = math.pi / 3
    bs_ris_aod_azimuth: float = 2 * math.pi / 3  # at the BS
    bs_ris_aod_elevation: float = math.pi / 4
    user_distance_min_m: float = 5.0
    user_distance_max_m: float = 15.0
    user_azimuth_min: float = math.pi / 6
    user_azimuth_max: float = 5 * math.pi / 6
    user_elevation: float = math.pi / 3
    target_azimuth: float = math.pi / 4
    target_elevation: float = math.pi / 3
    target_distance_m: float = 10.0

    # --- budgets, noise, limits ------------------------------------------
    bs_power_dbm: float = 30.0
    ris_power_dbm: float = 10.0
    noise_dbm: float = -90.0             # AWGN power sigma_o^2
    active_noise_dbm: float | None = None  # sigma_a^2; defaults to noise_dbm
    max_active_amplitude: float = 5.0
    crb_limit: float = 1e-3              # rad^2
    sinr_floor_db: float = 0.0
    target_noise_limit_dbm: float = -60.0

    # --- sensing ----------------------------------------------------------
    dwell_symbols: int = 2000            # echo collection length T
    echo_gain_mode: str = "pathloss"     # "pathloss" | "fixed"
    echo_gain: float = 1.0               # |rho| when echo_gain_mode == "fixed"
    echo_phase: float = 0.0
    radar_cross_section: float = 1.0     # scales the pathloss-derived |rho|

    # --- reward shaping ---------------------------------------------------
    sensing_interference_channel: str = "user"  # "user" | "target"
    crb_reduction: str = "trace"                # "trace" | "max"
    sinr_penalty_weight: float = 1.0
    crb_penalty_weight: float = 1e3
    power_penalty_weight: float = 1.0
    stop_on_feasible: bool = False

    # --- agent ------------------------------------------------------------
    episodes: int = 10
    steps_per_episode: int = 100
    batch_size: int = 100
    discount: float = 0.99
    soft_update_tau: float = 0.005
    learning_rate: float = 1e-4
    hidden_sizes: tuple = (64, 64)
    buffer_capacity: int = 100_000
    exploration_noise: float = 0.1
    exploration_decay: float = 0.999

    # --- baselines ----------------------------------------------------------
    random_samples: int = 2000
    greedy_phase_levels: int = 16
    greedy_max_sweeps: int = 10
    greedy_tolerance: float = 1e-4

    # --- experiment orchestration ---------------------------------------
    power_sweep_dbm: list = field(default_factory=lambda: [20.0, 25.0, 30.0])
    elements_sweep: list = field(default_factory=lambda: [8, 16, 24])
    amax_sweep: list = field(default_factory=lambda: [2.0, 5.0])
    schemes: list = field(default_factory=lambda: ["ddpg", "random"])
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    output_dir: str = "runs"

    # --- derived quantities -----------------------------------------------
    @property
    def num_bs(self) -> int:
        return self.bs_rows * self.bs_cols

    @property
    def num_ris(self) -> int:
        return self.ris_rows * self.ris_cols

    @property
    def num_sensing(self) -> int:
        return self.sensing_rows * self.sensing_cols

    @property
    def wavelength_m(self) -> float:
        return self.speed_of_light / self.frequency_hz

    @property
    def element_spacing_m(self) -> float:
        return self.element_spacing_wavelengths * self.wavelength_m

    @property
    def bs_power_w(self) -> float:
        return dbm_to_watt(self.bs_power_dbm)

    @property
    def ris_power_w(self) -> float:
        return dbm_to_watt(self.ris_power_dbm)

    @property
    def noise_w(self) -> float:
        return dbm_to_watt(self.noise_dbm)

    @property
    def active_noise_w(self) -> float:
        dbm = self.noise_dbm if self.active_noise_dbm is None else self.active_noise_dbm
        return dbm_to_watt(dbm)

    @property
    def sinr_floor_linear(self) -> float:
        return db_to_linear(self.sinr_floor_db)

    @property
    def target_noise_limit_w(self) -> float:
        return dbm_to_watt(self.target_noise_limit_dbm)

    @property
    def state_dim(self) -> int:
        m, n, k = self.num_bs, self.num_ris, self.num_users
        return 2 * m * (k + 1) + 2 * n + 2 * n * m + 2 * n * (k + 1)

    @property
    def action_dim(self) -> int:
        return 2 * self.num_bs * (self.num_users + 1) + 2 * self.num_ris

    # --- profiles ----------------------------------------------------------
    @classmethod
    def paper(cls, **overrides) -> "ExperimentConfig":
        return cls(profile="paper", **overrides)

    @classmethod
    def desk(cls, **overrides) -> "ExperimentConfig":
        """Small profile: M = 8, N = 16, N_s = 4, K = 2, q = 4.

        Noise, echo gain and learning rate are rescaled so that SINRs,
        rates and the CRB land in numerically useful ranges at this size.
        """
        values = dict(
            profile="desk",
            bs_rows=4, bs_cols=2,
            ris_rows=4, ris_cols=4,
            sensing_rows=2, sensing_cols=2,
            num_users=2,
            num_active=4,
            noise_dbm=-150.0,
            sinr_floor_db=-10.0,
            echo_gain_mode="fixed",
            echo_gain=1.0,
            learning_rate=1e-3,
            exploration_noise=0.4,
            exploration_decay=0.995,
        )
        values.update(overrides)
        return cls(**values)

    # --- validation / serialization -----------------------------------------
    def validate(self) -> None:
        counts = (self.bs_rows, self.bs_cols, self.ris_rows, self.ris_cols,
                  self.sensing_rows, self.sensing_cols)
        if any(c < 1 for c in counts):
            raise ValueError("array axis counts must all be >= 1")
        if self.num_users < 1:
            raise ValueError("num_users must be >= 1")
        if not 0 <= self.num_active <= self.num_ris:
            raise ValueError("num_active must lie in [0, N]")
        if self.frequency_hz <= 0 or self.bs_ris_distance_m <= 0:
            raise ValueError("frequency and BS-RIS distance must be positive")
        if self.absorption_per_m < 0:
            raise ValueError("absorption coefficient must be >= 0")
        if self.element_spacing_wavelengths <= 0:
            raise ValueError("element spacing must be positive")
        if not 0 < self.user_distance_min_m <= self.user_distance_max_m:
            raise ValueError("user distance range must be positive and ordered")
        for name in ("user_elevation", "target_elevation", "bs_ris_aoa_elevation",
                     "bs_ris_aod_elevation"):
            val = getattr(self, name)
            if not 0.0 < val < math.pi:
                raise ValueError(f"{name} must lie in (0, pi)")
        if self.max_active_amplitude <= 0 or self.crb_limit <= 0:
            raise ValueError("max_active_amplitude and crb_limit must be positive")
        if self.echo_gain_mode not in ("pathloss", "fixed"):
            raise ValueError("echo_gain_mode must be 'pathloss' or 'fixed'")
        if self.sensing_interference_channel not in ("user", "target"):
            raise ValueError("sensing_interference_channel must be 'user' or 'target'")
        if self.crb_reduction not in ("trace", "max"):
            raise ValueError("crb_reduction must be 'trace' or 'max'")
        if not 0.0 < self.discount <= 1.0:
            raise ValueError("discount must lie in (0, 1]")
        if not 0.0 < self.soft_update_tau <= 1.0:
            raise ValueError("soft_update_tau must lie in (0, 1]")
        if self.dwell_symbols < 1:
            raise ValueError("dwell_symbols must be >= 1")
        if min(self.episodes, self.steps_per_episode, self.batch_size) < 1:
            raise ValueError("episodes, steps_per_episode and batch_size must be >= 1")

    def canonical_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["hidden_sizes"] = list(self.hidden_sizes)
        return out

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


_PROFILES = {"paper": ExperimentConfig.paper, "desk": ExperimentConfig.desk}

_FIELD_TYPES = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _coerce(name: str, value):
    if name not in _FIELD_TYPES:
        raise ValueError(f"unknown config field '{name}'")
    if name == "hidden_sizes":
        return tuple(int(v) for v in value)
    if isinstance(value, list):
        return list(value)
    return value


def config_from_mapping(mapping: dict, base: str | None = None) -> ExperimentConfig:
    """Build a config from a (possibly sectioned) key/value mapping.

    Sections are cosmetic: keys are globally unique, so nested tables are
    flattened before being applied on top of the base profile.
    """
    flat: dict = {}

    def _flatten(node: dict, where: str) -> None:
        for key, value in node.items():
            if isinstance(value, dict):
                _flatten(value, f"{where}{key}.")
            else:
                if key in flat:
                    raise ValueError(f"duplicate config field '{where}{key}'")
                flat[key] = value

    _flatten(mapping, "")

    profile = flat.pop("profile", base or "paper")
    if profile not in _PROFILES:
        raise ValueError(f"unknown profile '{profile}' (expected 'paper' or 'desk')")
    cfg = _PROFILES[profile]()
    changes = {}
    for key, value in flat.items():
        changes[key] = _coerce(key, value)
    cfg = cfg.replace(**changes)
    cfg.validate()
    return cfg


def load_config(path: str | None = None, profile: str | None = None,
                overrides: dict | None = None) -> ExperimentConfig:
    """Load a TOML config file on top of a named profile, then apply overrides."""
    mapping: dict = {}
    if path is not None:
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            mapping = tomllib.load(fh)
    cfg = config_from_mapping(mapping, base=profile)
    if overrides:
        typed = {k: _coerce(k, v) for k, v in overrides.items()}
        cfg = cfg.replace(**typed)
        cfg.validate()
    return cfg


def parse_override(text: str) -> tuple[str, object]:
    """Parse a ``key=value`` CLI override; values use TOML literal syntax."""
    if "=" not in text:
        raise ValueError(f"override '{text}' is not of the form key=value")
    key, raw = text.split("=", 1)
    key = key.strip().split(".")[-1]
    raw = raw.strip()
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except Exception:
        value = raw  # bare strings are allowed
    return key, value
