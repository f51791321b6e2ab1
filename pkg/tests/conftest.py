from pathlib import Path

import numpy as np
import pytest

from cgorecon.descriptors import GaussianDescriptor
from cgorecon.fields import make_grid
from cgorecon.potential import Potential

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def small_grid():
    return make_grid(4.0, 16)


@pytest.fixture
def gaussian():
    return GaussianDescriptor(amplitude=0.1, sigma=1.0)


@pytest.fixture
def small_potential(small_grid, gaussian):
    return Potential.from_descriptor(gaussian, small_grid, gamma0=3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def reference_scenario_path():
    return SCENARIO_DIR / "reference.toml"


SMALL_SCENARIO = """
name = "small"
energy = 1.0
gamma0 = 3.0
k_max = 1
t_schedule = [4.0, 8.0]
zeta_samples = [[3.0, 0.0, 0.0]]
seed = 7

[grid]
half_width = 4.0
points_per_axis = 16

[potential]
kind = "gaussian"
amplitude = 0.1
sigma = 1.0

[shell]
n_dirs = 2

[solver]
workers = 1

[scan]
z_samples = [[0.0, 1.0], [0.5, 2.0]]
rho_perp = [[0.5, 0.0]]
probes = 1

[verify]
multiplier_fields = 3
refine_points = 24
"""


@pytest.fixture
def small_scenario_path(tmp_path):
    path = tmp_path / "small.toml"
    path.write_text(SMALL_SCENARIO)
    return path
