import numpy as np
import pytest

from ecgforge import (
    BeatParams, LeadSystem, generate_dipole_trajectory, synthesize_record,
)


@pytest.fixture(scope="session")
def default_params():
    return BeatParams.default()


@pytest.fixture(scope="session")
def clean_20s(default_params):
    """20 s default record at 500 Hz with its trajectory and true R peaks."""
    traj = generate_dipole_trajectory(default_params, 20.0, 500.0, seed=101)
    rec, truth = synthesize_record(traj, LeadSystem())
    return traj, rec, truth


@pytest.fixture(scope="session")
def clean_60s(default_params):
    traj = generate_dipole_trajectory(default_params, 60.0, 500.0, seed=202)
    rec, truth = synthesize_record(traj, LeadSystem())
    return traj, rec, truth


def signal_rms(rec):
    return float(np.sqrt(np.mean(rec.data**2)))
