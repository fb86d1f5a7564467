"""Network objective evaluation: SINR, rates, energy efficiency and the
surrogate objectives used by the solver.

Conventions shared by every function here:

* ``w`` is the (L, K, M) complex beamformer collection, ``w[j, m]`` serving
  user m of cell j.
* Antenna gains enter every *power* term linearly and every *amplitude*
  (cross) term as a square root, which keeps the mean-square-error /
  rate identity exact.
* Rates are natural-log units (nats) internally; bits only on request.
* Receiver noise power is identically 1.

The energy efficiency of a solution is

    ee = sum_jm b_jm * ln(1 + sinr_jm)
         / (xi * sum_jm ||w_jm||**2 + M * L * p_c + L * p_0)

and the solver's parametric surrogate at level ``eta`` is

    g = sum_jm b_jm * rate_jm - eta * xi * sum_jm ||w_jm||**2.

``h_value`` is the widened objective over beamformers, receive filters u
and positive slacks s whose block maxima have closed forms; at the
optimal (u, s) it collapses exactly onto ``g_value``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import ChannelSet
from .pattern import LinkGainModel

__all__ = [
    "PowerModel",
    "Weights",
    "Solution",
    "link_powers",
    "sinr_all",
    "rates_nats_all",
    "mse_all",
    "sinr",
    "user_rate_nats",
    "mse",
    "total_ee",
    "r_max",
    "g_value",
    "h_value",
    "total_transmit_power",
    "per_bs_power",
]


@dataclass(frozen=True)
class PowerModel:
    """Power budget and consumption constants, all in the same linear units
    (watts under the default channel calibration)."""

    p_max: float
    p_c: float = 1.0
    p_0: float = 10.0
    xi: float = 1.0

    def __post_init__(self):
        if not self.p_max > 0:
            raise ValueError("p_max must be positive")
        if self.p_c < 0 or self.p_0 < 0 or self.xi < 0:
            raise ValueError("p_c, p_0 and xi must be nonnegative")

    def floor(self, num_antennas: int, num_cells: int) -> float:
        """Tilt- and beamformer-independent part of the consumed power."""
        val = num_antennas * num_cells * self.p_c + num_cells * self.p_0
        if not val > 0:
            raise ValueError("static power floor must be positive")
        return val

    def consumed(self, w: np.ndarray, num_antennas: int, num_cells: int) -> float:
        return self.xi * total_transmit_power(w) + self.floor(num_antennas, num_cells)


@dataclass(frozen=True)
class Weights:
    """Per-user priority weights, all positive, shape (L, K)."""

    b: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.b) <= 0):
            raise ValueError("all weights must be positive")

    @classmethod
    def uniform(cls, num_cells: int, users_per_cell: int, value: float = 1.0) -> "Weights":
        return cls(b=np.full((num_cells, users_per_cell), float(value)))


@dataclass
class Solution:
    """A solver output: beamformers, tilts, auxiliary variables and the
    achieved efficiency.  ``tilt_deg`` is None for the no-tilt baseline."""

    w: np.ndarray  # (L, K, M) complex
    tilt_deg: Optional[np.ndarray]  # (L,) or None
    u: np.ndarray  # (L, K) complex receive filters
    s: np.ndarray  # (L, K) positive slacks
    eta: float
    ee: float

    def __post_init__(self):
        if self.tilt_deg is not None:
            t = np.asarray(self.tilt_deg, dtype=float)
            if np.any(t <= 0.0) or np.any(t >= 90.0):
                raise ValueError("tilt angles must lie strictly inside (0, 90) degrees")


def total_transmit_power(w: np.ndarray) -> float:
    return float(np.sum(np.abs(w) ** 2))


def per_bs_power(w: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(w) ** 2, axis=(1, 2))


def link_powers(w: np.ndarray, channels: ChannelSet):
    """Cached bilinear statistics of (w, g).

    Returns ``(pw, z)`` where ``pw[i, j, m] = sum_n |g_ijm^H w_in|**2`` is
    the total (pre-gain) power BS i lands on user (j, m), and
    ``z[j, m] = g_jjm^H w_jm`` is the desired-signal amplitude.
    """
    if w.shape != channels.g.shape[1:]:
        raise ValueError(f"beamformer shape {w.shape} does not match channels "
                         f"{channels.g.shape[1:]}")
    # inner[i, j, m, n] = g[i, j, m]^H w[i, n]
    inner = np.einsum("ijmk,ink->ijmn", channels.g.conj(), w)
    pw = np.sum(np.abs(inner) ** 2, axis=3)
    idx = np.arange(channels.num_cells)
    z = np.einsum("jmk,jmk->jm", channels.g[idx, idx].conj(), w)
    return pw, z


def _gains_and_stats(w, tilt_deg, channels, gains: LinkGainModel):
    alpha = gains.gains_lin(tilt_deg)
    pw, z = link_powers(w, channels)
    idx = np.arange(channels.num_cells)
    alpha_serv = alpha[idx, idx, :]
    total = np.einsum("ijm,ijm->jm", alpha, pw) + 1.0
    desired = alpha_serv * np.abs(z) ** 2
    return alpha, alpha_serv, pw, z, total, desired


def sinr_all(w, tilt_deg, channels: ChannelSet, gains: LinkGainModel) -> np.ndarray:
    """Per-user SINR, shape (L, K)."""
    _, _, _, _, total, desired = _gains_and_stats(w, tilt_deg, channels, gains)
    return desired / (total - desired)


def rates_nats_all(w, tilt_deg, channels, gains) -> np.ndarray:
    return np.log1p(sinr_all(w, tilt_deg, channels, gains))


def mse_all(w, u, tilt_deg, channels: ChannelSet, gains: LinkGainModel) -> np.ndarray:
    """Symbol estimation error for arbitrary receive filters ``u``, shape (L, K)."""
    _, alpha_serv, _, z, total, _ = _gains_and_stats(w, tilt_deg, channels, gains)
    u = np.asarray(u)
    return (np.abs(u) ** 2 * total
            - 2.0 * np.real(np.conj(u) * z * np.sqrt(alpha_serv)) + 1.0)


def sinr(j: int, m: int, w, tilt_deg, channels, gains) -> float:
    """SINR of user (j, m): gain-weighted desired power over all other
    gain-weighted received powers plus unit noise."""
    return float(sinr_all(w, tilt_deg, channels, gains)[j, m])


def user_rate_nats(j: int, m: int, w, tilt_deg, channels, gains) -> float:
    return float(math.log1p(sinr(j, m, w, tilt_deg, channels, gains)))


def mse(j: int, m: int, w, u, tilt_deg, channels, gains) -> float:
    return float(mse_all(w, u, tilt_deg, channels, gains)[j, m])


def total_ee(w, tilt_deg, channels, gains, power_model: PowerModel,
             weights: Weights, bits: bool = False) -> float:
    """Weighted sum rate divided by total consumed power."""
    rates = rates_nats_all(w, tilt_deg, channels, gains)
    num = float(np.sum(weights.b * rates))
    if bits:
        num /= math.log(2.0)
    den = power_model.consumed(w, channels.antennas, channels.num_cells)
    return num / den


def r_max(channels: ChannelSet, p_max: float, gain_lin: float = 1.0,
          weights: Optional[Weights] = None) -> float:
    """Interference-free full-power rate bound, in bits.

    The plain form is ``sum_jm log2(1 + p_max ||g_jjm||**2)``; passing the
    peak antenna gain and the user weights tightens it into a true upper
    bound on the weighted sum rate the solver can ever produce.
    """
    idx = np.arange(channels.num_cells)
    norms = np.sum(np.abs(channels.g[idx, idx]) ** 2, axis=2)  # (L, K)
    terms = np.log2(1.0 + p_max * gain_lin * norms)
    if weights is not None:
        terms = weights.b * terms
    return float(np.sum(terms))


def g_value(w, tilt_deg, eta: float, channels, gains, weights: Weights,
            xi: float) -> float:
    """Parametric surrogate: weighted sum rate minus eta-priced transmit power."""
    rates = rates_nats_all(w, tilt_deg, channels, gains)
    return float(np.sum(weights.b * rates) - eta * xi * total_transmit_power(w))


def h_value(w, u, s, tilt_deg, eta: float, channels, gains, weights: Weights,
            xi: float) -> float:
    """Widened surrogate over (w, u, s); equals ``g_value`` at the optimal
    filters and slacks."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("all slacks must be positive")
    e = mse_all(w, u, tilt_deg, channels, gains)
    b = weights.b
    return float(np.sum(b * (-e * s + np.log(s)))
                 + np.sum(b - eta * xi * np.sum(np.abs(w) ** 2, axis=2)))
