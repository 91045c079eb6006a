import numpy as np
import pytest

from hrisac.config import ExperimentConfig
from hrisac.env import build_scenario
from hrisac.feasibility import project_action


@pytest.fixture
def desk_cfg():
    return ExperimentConfig.desk()


@pytest.fixture
def scenario(desk_cfg):
    return build_scenario(desk_cfg, 0)


def random_projected_pair(scenario, seed):
    """A feasible random pair via the projection, for tests that need one."""
    from hrisac.baselines import sample_raw_action
    rng = np.random.default_rng(seed)
    raw_beams, raw_phases = sample_raw_action(scenario, rng)
    return project_action(raw_beams, raw_phases, scenario.budgets,
                          scenario.active_set, scenario.channels,
                          scenario.noise)
