"""Large-scale fading and i.i.d. Rayleigh channel generation.

Large-scale gain of a link at distance d:

    beta = 10**((x - reference_loss_db) / 10) * (reference_distance_m / d)**v

with x ~ Normal(0, shadow_sigma_db**2) log-normal shadowing.  Small-scale
vectors are circularly-symmetric complex Gaussian with per-entry variance
beta.  Noise power is normalized to 1 everywhere downstream, so transmit
powers and beta together set the operating SNR: the default
``reference_loss_db`` is calibrated so a cell-edge (500 m) user sees a
median serving SNR of 30 dB at 46 dBm transmit power with the peak
antenna gain applied.  That working point keeps the bottom of the 22-50
dBm sweep noise-limited while the top runs into interference, which is
the regime where tilt adaptation pays.  The raw d**-v law with no
reference correction remains available by passing ``reference_loss_db=0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .scenario import Drop, NetworkConfig

__all__ = [
    "FadingParams",
    "ChannelSet",
    "calibrated_reference_loss_db",
    "large_scale_gain",
    "draw_channel_vector",
    "build_channel_set",
]


def calibrated_reference_loss_db(cell_radius_m: float = 500.0, g_max_db: float = 18.0,
                                 pathloss_exponent: float = 3.8,
                                 reference_distance_m: float = 1.0,
                                 p_ref_dbm: float = 46.0,
                                 target_snr_db: float = 30.0) -> float:
    """Reference loss making a cell-edge user hit ``target_snr_db`` at ``p_ref_dbm``.

    SNR here is per receive-noise-unit with transmit power expressed in
    watts, the peak antenna gain applied, and median (zero) shadowing.
    """
    p_ref_dbw = p_ref_dbm - 30.0
    edge_pathloss_db = 10.0 * pathloss_exponent * math.log10(cell_radius_m / reference_distance_m)
    # target = p_ref_dbw + g_max - ref_loss - edge_pathloss, solved for ref_loss
    return p_ref_dbw + g_max_db - edge_pathloss_db - target_snr_db


DEFAULT_REFERENCE_LOSS_DB = calibrated_reference_loss_db()


@dataclass(frozen=True)
class FadingParams:
    """Pathloss exponent, shadowing spread and the noise-unit calibration."""

    pathloss_exponent: float = 3.8
    shadow_sigma_db: float = 8.0
    reference_distance_m: float = 1.0
    reference_loss_db: float = DEFAULT_REFERENCE_LOSS_DB
    noise_power: float = 1.0

    def __post_init__(self):
        if not self.pathloss_exponent > 2:
            raise ValueError("pathloss_exponent must exceed 2")
        if self.shadow_sigma_db < 0:
            raise ValueError("shadow_sigma_db must be nonnegative")
        if not self.reference_distance_m > 0:
            raise ValueError("reference_distance_m must be positive")
        if self.noise_power != 1.0:
            raise ValueError("the model is noise-normalized; noise_power is fixed at 1")


@dataclass(frozen=True)
class ChannelSet:
    """Complex channel vectors and large-scale gains for all L*L*K links.

    ``g[i, j, m]`` is the length-M vector from BS ``i`` to user ``m`` of
    cell ``j``; ``beta`` holds the matching large-scale gains.
    """

    g: np.ndarray  # (L, L, K, M) complex128
    beta: np.ndarray  # (L, L, K)

    @property
    def num_cells(self) -> int:
        return self.g.shape[0]

    @property
    def users_per_cell(self) -> int:
        return self.g.shape[2]

    @property
    def antennas(self) -> int:
        return self.g.shape[3]

    def save(self, path) -> None:
        """Binary dump (npz with arrays ``g`` and ``beta``) for regression fixtures."""
        np.savez(Path(path), g=self.g, beta=self.beta)

    @classmethod
    def load(cls, path) -> "ChannelSet":
        data = np.load(Path(path))
        return cls(g=data["g"], beta=data["beta"])


def large_scale_gain(params: FadingParams, distance_m: float, rng: np.random.Generator) -> float:
    """One draw of the shadowed large-scale gain at the given distance."""
    if distance_m <= 0:
        raise ValueError("distance_m must be positive")
    x = rng.normal(0.0, params.shadow_sigma_db)
    return float(10.0 ** ((x - params.reference_loss_db) / 10.0)
                 * (params.reference_distance_m / distance_m) ** params.pathloss_exponent)


def draw_channel_vector(beta: float, num_antennas: int, rng: np.random.Generator) -> np.ndarray:
    """CN(0, beta I) vector: real then imaginary block, each variance beta/2."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    if num_antennas < 1:
        raise ValueError("need at least one antenna")
    scale = math.sqrt(beta / 2.0)
    re = rng.standard_normal(num_antennas)
    im = rng.standard_normal(num_antennas)
    return scale * (re + 1j * im)


def build_channel_set(drop: Drop, cfg: NetworkConfig, params: FadingParams,
                      rng_seed: int) -> ChannelSet:
    """Generate every link's fading deterministically from the seed.

    Each link (i, j, m) uses its own substream seeded from
    ``(rng_seed, i, j, m)`` and draws the shadowing sample first, then the
    small-scale vector, so the set is reproducible link by link.
    """
    L, K, M = cfg.num_cells, cfg.users_per_cell, cfg.antennas
    if drop.distance_m.shape != (L, L, K):
        raise ValueError("drop is inconsistent with the network config")
    g = np.empty((L, L, K, M), dtype=np.complex128)
    beta = np.empty((L, L, K))
    for i in range(L):
        for j in range(L):
            for m in range(K):
                rng = np.random.default_rng(
                    np.random.SeedSequence(entropy=(int(rng_seed), i, j, m)))
                beta[i, j, m] = large_scale_gain(params, drop.distance_m[i, j, m], rng)
                g[i, j, m] = draw_channel_vector(beta[i, j, m], M, rng)
    return ChannelSet(g=g, beta=beta)
