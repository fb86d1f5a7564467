"""Parametric 3D base-station antenna pattern.

Gain in dB of a BS antenna with downtilt ``tilt`` toward a user seen at
elevation angle ``theta_user`` (both measured downward from the horizon)
and at azimuth ``phi_user`` when the array boresight points at
``boresight``:

    gain_db = g_max - min(12 * (dphi / phi_3db)**2, sll_az)
                    - min(12 * ((tilt - theta_user) / theta_3db)**2, sll_el)

where ``dphi = boresight - phi_user`` wrapped to (-180, 180].  The
linearised vertical main lobe 10**(-1.2 * (tilt - theta_user)**2 / theta_3db**2)
is concave for |tilt - theta_user| <= theta_3db / sqrt(2.4 ln 10); that
half-width bounds how far a tilt optimum can sit from a user angle and
drives both the user clustering threshold and the scan-interval padding.

A "2D" variant drops the elevation term entirely (isotropic vertical
gain) and is used by the conventional-beamforming baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PatternParams",
    "gain_db",
    "gain_lin",
    "gain_db_2d",
    "concavity_halfwidth_deg",
    "LinkGainModel",
]


@dataclass(frozen=True)
class PatternParams:
    """Antenna-pattern constants: peak gain, beamwidths, side-lobe floors."""

    g_max_db: float = 18.0
    theta_3db_deg: float = 6.0
    phi_3db_deg: float = 65.0
    sll_el_db: float = 20.0
    sll_az_db: float = 25.0

    def __post_init__(self):
        if not (self.theta_3db_deg > 0 and self.phi_3db_deg > 0):
            raise ValueError("half-power beamwidths must be positive")
        if not (self.sll_el_db > 0 and self.sll_az_db > 0):
            raise ValueError("side-lobe floors are subtractive losses and must be positive")

    @classmethod
    def normalized(cls) -> "PatternParams":
        """Unit-peak-gain preset (g_max = 0 dB), handy for illustrations."""
        return cls(g_max_db=0.0)


def _wrap_deg(angle):
    """Wrap an angle difference (degrees) into (-180, 180]."""
    wrapped = np.mod(np.asarray(angle, dtype=float) + 180.0, 360.0) - 180.0
    wrapped = np.where(wrapped == -180.0, 180.0, wrapped)
    if np.ndim(angle) == 0:
        return float(wrapped)
    return wrapped


def _vertical_loss_db(p: PatternParams, tilt_deg, theta_user_deg):
    off = np.asarray(tilt_deg, dtype=float) - np.asarray(theta_user_deg, dtype=float)
    return np.minimum(12.0 * (off / p.theta_3db_deg) ** 2, p.sll_el_db)


def _azimuth_loss_db(p: PatternParams, boresight_deg, phi_user_deg):
    dphi = _wrap_deg(np.asarray(boresight_deg, dtype=float) - np.asarray(phi_user_deg, dtype=float))
    return np.minimum(12.0 * (dphi / p.phi_3db_deg) ** 2, p.sll_az_db)


def gain_db(p: PatternParams, tilt_deg: float, theta_user_deg: float,
            boresight_deg: float, phi_user_deg: float) -> float:
    """Antenna gain in dB toward one user. Tilt must lie in [0, 90]."""
    angles = (tilt_deg, theta_user_deg, boresight_deg, phi_user_deg)
    if not all(math.isfinite(a) for a in angles):
        raise ValueError("all angles must be finite")
    if not 0.0 <= tilt_deg <= 90.0:
        raise ValueError(f"tilt_deg must be in [0, 90], got {tilt_deg}")
    return float(p.g_max_db
                 - _azimuth_loss_db(p, boresight_deg, phi_user_deg)
                 - _vertical_loss_db(p, tilt_deg, theta_user_deg))


def gain_lin(p: PatternParams, tilt_deg: float, theta_user_deg: float,
             boresight_deg: float, phi_user_deg: float) -> float:
    """Antenna gain as a linear power ratio, 10**(gain_db / 10)."""
    return 10.0 ** (gain_db(p, tilt_deg, theta_user_deg, boresight_deg, phi_user_deg) / 10.0)


def gain_db_2d(p: PatternParams, boresight_deg: float, phi_user_deg: float) -> float:
    """Gain with the vertical plane ignored: peak gain minus azimuth loss only."""
    if not (math.isfinite(boresight_deg) and math.isfinite(phi_user_deg)):
        raise ValueError("all angles must be finite")
    return float(p.g_max_db - _azimuth_loss_db(p, boresight_deg, phi_user_deg))


def concavity_halfwidth_deg(p: PatternParams) -> float:
    """Half-width of the interval where the linear vertical main lobe is concave.

    Equals theta_3db / sqrt(2.4 ln 10); the clustering threshold is twice this.
    """
    return p.theta_3db_deg / math.sqrt(2.4 * math.log(10.0))


class LinkGainModel:
    """Per-link antenna gains for a fixed user placement.

    Caches the tilt-independent azimuth losses for all (BS i, cell j, user m)
    links so that tilt sweeps only re-evaluate the vertical term.  Index
    convention for all (L, L, K) arrays: axis 0 is the transmitting BS,
    axes 1-2 the receiving user's cell and in-cell index.

    ``mode="2d"`` drops the elevation term; gains are then tilt-independent
    and ``gains_lin(None)`` is the natural call.
    """

    def __init__(self, params: PatternParams, elevation_aoa_deg, azimuth_aoa_deg,
                 boresights_deg, mode: str = "3d"):
        if mode not in ("3d", "2d"):
            raise ValueError(f"mode must be '3d' or '2d', got {mode!r}")
        self.params = params
        self.mode = mode
        self.elevation_aoa_deg = np.asarray(elevation_aoa_deg, dtype=float)
        if self.elevation_aoa_deg.ndim != 3:
            raise ValueError("elevation_aoa_deg must have shape (L, L, K)")
        az = np.asarray(azimuth_aoa_deg, dtype=float)
        bore = np.asarray(boresights_deg, dtype=float)
        self.num_cells, _, self.users_per_cell = self.elevation_aoa_deg.shape
        self._az_loss_db = _azimuth_loss_db(params, bore[:, None, None], az)
        self._base_db = params.g_max_db - self._az_loss_db

    @property
    def peak_gain_lin(self) -> float:
        return 10.0 ** (self.params.g_max_db / 10.0)

    def serving_aoas_deg(self) -> np.ndarray:
        """Elevation angles of each user seen from its own BS, shape (L, K)."""
        idx = np.arange(self.num_cells)
        return self.elevation_aoa_deg[idx, idx, :]

    def gains_lin(self, tilts_deg) -> np.ndarray:
        """Linear gains on every link for the given per-BS tilts, shape (L, L, K)."""
        if self.mode == "2d":
            return 10.0 ** (self._base_db / 10.0)
        tilts = np.asarray(tilts_deg, dtype=float)
        if tilts.shape != (self.num_cells,):
            raise ValueError(f"expected {self.num_cells} tilt angles, got shape {tilts.shape}")
        el = _vertical_loss_db(self.params, tilts[:, None, None], self.elevation_aoa_deg)
        return 10.0 ** ((self._base_db - el) / 10.0)

    def gains_lin_for_bs(self, i: int, tilt_candidates_deg) -> np.ndarray:
        """Gains of BS ``i`` toward all users for each candidate tilt, shape (T, L, K)."""
        if self.mode == "2d":
            t = np.atleast_1d(np.asarray(tilt_candidates_deg, dtype=float))
            return np.broadcast_to(10.0 ** (self._base_db[i] / 10.0),
                                   (t.size,) + self._base_db[i].shape).copy()
        t = np.atleast_1d(np.asarray(tilt_candidates_deg, dtype=float))
        el = _vertical_loss_db(self.params, t[:, None, None], self.elevation_aoa_deg[i])
        return 10.0 ** ((self._base_db[i] - el) / 10.0)
