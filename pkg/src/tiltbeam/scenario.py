"""Multi-cell geometry and random user placement.

BS sites sit at the centers of hexagonal cells (circumradius = cell
radius), so adjacent sites are sqrt(3) * R apart.  Users are drawn
uniformly over their serving cell's hexagon, excluding a small disc
around the BS that guards the d**-v pathloss against divergence.
Every draw is reproducible from a 64-bit seed, and each cell consumes
an independent substream so user k of cell j is the same point for any
requested K >= k+1 (useful for paired user-count experiments).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "NetworkConfig",
    "Layout",
    "Drop",
    "build_layout",
    "drop_users",
    "elevation_aoa",
]

_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class NetworkConfig:
    """Cell count, user count, array size and geometry constants."""

    num_cells: int = 3
    users_per_cell: int = 2
    antennas: int = 4
    cell_radius_m: float = 500.0
    bs_height_m: float = 32.0
    ue_height_m: float = 1.5
    min_user_distance_m: float = 35.0
    boresights_deg: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.num_cells < 1 or self.users_per_cell < 1 or self.antennas < 1:
            raise ValueError("num_cells, users_per_cell and antennas must all be >= 1")
        if not self.bs_height_m > self.ue_height_m >= 0:
            raise ValueError("need bs_height_m > ue_height_m >= 0")
        if not 0 < self.min_user_distance_m < self.cell_radius_m:
            raise ValueError("need 0 < min_user_distance_m < cell_radius_m")
        if self.boresights_deg is not None and len(self.boresights_deg) != self.num_cells:
            raise ValueError("boresights_deg must list one angle per BS")


@dataclass(frozen=True)
class Layout:
    """BS site coordinates (meters) and azimuth boresights (degrees)."""

    positions_m: np.ndarray  # (L, 2)
    boresights_deg: np.ndarray  # (L,)


@dataclass(frozen=True)
class Drop:
    """One random user placement and the derived per-link angles.

    Array index convention: ``[i, j, m]`` is the link from BS ``i`` to user
    ``m`` of cell ``j``.  Serialized field order (``to_dict``): user_xy,
    elevation_aoa_deg, azimuth_aoa_deg, distance_m.
    """

    user_xy: np.ndarray  # (L, K, 2)
    elevation_aoa_deg: np.ndarray  # (L, L, K)
    azimuth_aoa_deg: np.ndarray  # (L, L, K)
    distance_m: np.ndarray  # (L, L, K)

    def to_dict(self) -> dict:
        return {
            "user_xy": self.user_xy.tolist(),
            "elevation_aoa_deg": self.elevation_aoa_deg.tolist(),
            "azimuth_aoa_deg": self.azimuth_aoa_deg.tolist(),
            "distance_m": self.distance_m.tolist(),
        }


def build_layout(cfg: NetworkConfig) -> Layout:
    """Place BS sites and assign default boresights.

    L = 1 puts the single site at the origin.  L = 3 arranges an
    equilateral triangle of side sqrt(3) * R centered on the origin so
    all three cells are mutually adjacent and symmetric.  2 <= L <= 7
    uses a center site plus ring neighbours at distance sqrt(3) * R.
    Default boresights point from each site toward the layout centroid
    (0 degrees for a site sitting on the centroid itself).
    """
    L = cfg.num_cells
    R = cfg.cell_radius_m
    d = _SQRT3 * R  # adjacent hexagon centers
    if L == 1:
        pos = np.zeros((1, 2))
    elif L == 3:
        ang = np.deg2rad([90.0, 210.0, 330.0])
        pos = R * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    elif 2 <= L <= 7:
        ring = np.deg2rad(30.0 + 60.0 * np.arange(L - 1))
        pos = np.vstack([np.zeros(2), d * np.stack([np.cos(ring), np.sin(ring)], axis=1)])
    else:
        raise ValueError(f"only 1 <= num_cells <= 7 ring layouts are supported, got {L}")

    if cfg.boresights_deg is not None:
        bore = np.asarray(cfg.boresights_deg, dtype=float)
    else:
        centroid = pos.mean(axis=0)
        delta = centroid - pos
        bore = np.degrees(np.arctan2(delta[:, 1], delta[:, 0]))
        bore[np.hypot(delta[:, 0], delta[:, 1]) < 1e-9] = 0.0
    return Layout(positions_m=pos, boresights_deg=bore)


def _in_hexagon(xy: np.ndarray, circumradius: float) -> np.ndarray:
    """Membership test for a pointy-top hexagon centered at the origin."""
    a = _SQRT3 / 2.0 * circumradius  # apothem
    x, y = xy[..., 0], xy[..., 1]
    return (np.abs(x) <= a) & (np.abs(x + _SQRT3 * y) <= 2 * a) & (np.abs(x - _SQRT3 * y) <= 2 * a)


def elevation_aoa(bs_height_m: float, ue_height_m: float, ground_distance_m) -> float:
    """Downward angle from the horizon at the BS to a user, in (0, 90) degrees."""
    dist = np.asarray(ground_distance_m, dtype=float)
    if np.any(dist <= 0):
        raise ValueError("ground distance must be positive")
    if not bs_height_m > ue_height_m:
        raise ValueError("need bs_height_m > ue_height_m")
    out = np.degrees(np.arctan((bs_height_m - ue_height_m) / dist))
    return float(out) if np.ndim(ground_distance_m) == 0 else out


def _sample_cell_users(rng: np.random.Generator, radius: float, min_dist: float,
                       count: int) -> np.ndarray:
    """First ``count`` accepted points of the cell's rejection stream.

    Candidates are drawn in fixed chunks from the bounding square; because
    acceptance is a deterministic filter on a fixed stream, the accepted
    sequence does not depend on the requested count (prefix stability).
    """
    accepted = []
    chunk = max(64, 4 * count)
    while len(accepted) < count:
        cand = rng.uniform(-radius, radius, size=(chunk, 2))
        ok = _in_hexagon(cand, radius) & (np.hypot(cand[:, 0], cand[:, 1]) >= min_dist)
        accepted.extend(cand[ok])
    return np.asarray(accepted[:count])


def drop_users(cfg: NetworkConfig, layout: Layout, rng_seed: int) -> Drop:
    """Draw one uniform user placement and compute all per-link angles."""
    L, K = cfg.num_cells, cfg.users_per_cell
    user_xy = np.empty((L, K, 2))
    for j in range(L):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(int(rng_seed), j)))
        user_xy[j] = layout.positions_m[j] + _sample_cell_users(
            rng, cfg.cell_radius_m, cfg.min_user_distance_m, K)

    # (L, L, K): BS i -> user (j, m)
    delta = user_xy[None, :, :, :] - layout.positions_m[:, None, None, :]
    dist = np.hypot(delta[..., 0], delta[..., 1])
    elev = elevation_aoa(cfg.bs_height_m, cfg.ue_height_m, dist)
    azim = np.degrees(np.arctan2(delta[..., 1], delta[..., 0]))
    return Drop(user_xy=user_xy, elevation_aoa_deg=elev,
                azimuth_aoa_deg=azim, distance_m=dist)
