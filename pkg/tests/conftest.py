import numpy as np
import pytest

from tiltbeam.channel import ChannelSet
from tiltbeam.objective import PowerModel, Weights
from tiltbeam.pattern import LinkGainModel, PatternParams


def make_random_instance(rng, num_cells=2, users_per_cell=2, antennas=3,
                         pattern=None):
    """Dense random instance (channels + gains) detached from geometry."""
    L, K, M = num_cells, users_per_cell, antennas
    g = rng.standard_normal((L, L, K, M)) + 1j * rng.standard_normal((L, L, K, M))
    beta = rng.uniform(0.2, 2.0, size=(L, L, K))
    g = g * np.sqrt(beta / 2.0)[..., None]
    channels = ChannelSet(g=g, beta=beta)
    elev = rng.uniform(2.0, 25.0, size=(L, L, K))
    azim = rng.uniform(-180.0, 180.0, size=(L, L, K))
    bores = rng.uniform(-180.0, 180.0, size=L)
    gains = LinkGainModel(pattern or PatternParams(), elev, azim, bores, mode="3d")
    return channels, gains


def make_unit_gain_instance(rng, num_cells=1, users_per_cell=1, antennas=1,
                            g=None):
    """Instance whose antenna gain is exactly 1 on every link."""
    L, K, M = num_cells, users_per_cell, antennas
    if g is None:
        g = rng.standard_normal((L, L, K, M)) + 1j * rng.standard_normal((L, L, K, M))
    channels = ChannelSet(g=np.asarray(g, dtype=complex).reshape(L, L, K, M),
                          beta=np.ones((L, L, K)))
    elev = np.full((L, L, K), 5.0)
    azim = np.zeros((L, L, K))
    gains = LinkGainModel(PatternParams.normalized(), elev, azim,
                          np.zeros(L), mode="3d")
    return channels, gains, np.full(L, 5.0)  # tilts putting every link at peak


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


@pytest.fixture
def small_power_model():
    return PowerModel(p_max=2.0, p_c=1.0, p_0=10.0, xi=1.0)


def uniform_weights(channels):
    return Weights.uniform(channels.num_cells, channels.users_per_cell)
