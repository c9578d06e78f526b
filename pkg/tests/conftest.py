"""Shared fixtures for the heavy acceptance runs.

The noise sweep and fidelity calibration are computed once per session and
shared by several acceptance criteria; everything is seeded, so the numbers
are identical across runs.
"""
import numpy as np
import pytest

from entforge.experiments import (
    ExperimentConfig,
    calibrate_gamma,
    run_generation,
    run_noise_sweep,
    run_spectrum,
)

ACCEPTANCE_SEED = 0


@pytest.fixture(scope="session")
def generation_result():
    cfg = ExperimentConfig(qubit_range=(4, 6, 8, 10), steps=30, master_seed=ACCEPTANCE_SEED)
    return run_generation(cfg)


@pytest.fixture(scope="session")
def spectrum_result():
    cfg = ExperimentConfig(
        qubit_range=(4, 6, 8, 10),
        steps=30,
        haar_samples=64,
        master_seed=ACCEPTANCE_SEED,
    )
    return run_spectrum(cfg)


@pytest.fixture(scope="session")
def sweep_config():
    return ExperimentConfig(
        qubit_range=(4, 6, 8),
        steps=30,
        epsilon_grid=tuple(np.geomspace(1e-3, 1e-1, 11)),
        n_realizations="auto",
        master_seed=ACCEPTANCE_SEED,
    )


@pytest.fixture(scope="session")
def acceptance_sweep(sweep_config):
    return run_noise_sweep(sweep_config, snapshot_times=[15, 30])


@pytest.fixture(scope="session")
def gamma_calibration():
    cfg = ExperimentConfig(
        qubit_range=(4, 6),
        steps=30,
        epsilon_grid=tuple(np.geomspace(1e-4, 1e-2, 7)),
        n_realizations=64,
        master_seed=ACCEPTANCE_SEED,
    )
    return calibrate_gamma(cfg, snapshot_times=[15, 30])
