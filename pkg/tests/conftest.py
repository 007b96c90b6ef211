import numpy as np
import pytest

from ddcmimo.channel import Path, Scene, SceneSamplingParams, sample_scene


def desk_scene(seed, n_paths=3, **kwargs):
    return sample_scene(SceneSamplingParams(n_paths=n_paths, seed=seed), **kwargs)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def hand_path(k_tx, k_rx, gamma, gain=1e-3, delay_s=0.0, doppler_hz=0.0):
    return Path.from_geometry(
        delay_s=delay_s, doppler_hz=doppler_hz, gain=gain, k_tx=unit(k_tx), k_rx=unit(k_rx),
        gamma=np.asarray(gamma, dtype=complex), d_tx_m=50.0, d_rx_m=60.0,
    )


@pytest.fixture
def scene3():
    return desk_scene(7)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
