"""Workbench for a semi-self-sensing hybrid-RIS ISAC downlink in the THz band.

Submodules
----------
channel      deterministic THz channel synthesis
comms        SINR / rate / sum-rate metrics
sensing      Fisher information and angle-CRB computation
feasibility  constraint checks and action projection
env          the reinforcement-learning environment
nn           dense network substrate (compiled core + numpy fallback)
ddpg         the actor-critic learner
baselines    random search, greedy coordinate heuristic, passive ablation
experiments  run orchestration, sweeps, CSV telemetry
cli          command-line entry points
"""

from .config import ExperimentConfig, load_config

__version__ = "0.1.0"

__all__ = ["ExperimentConfig", "load_config", "__version__"]
