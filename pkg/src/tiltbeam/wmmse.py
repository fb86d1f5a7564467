"""Inner-layer block-coordinate solver for the parametric surrogate.

One sweep updates, in order, the receive filters, the slack weights and
every BS's beamformers; each block update is the exact maximizer of the
widened objective in its own block, so the surrogate value ascends
monotonically sweep after sweep.  The per-BS beamformer solve is a
regularized Hermitian linear system

    w_jm = b_jm s_jm u_jm (A_j + lambda_j I)^-1 g_jjm sqrt(alpha_jj)
    A_j  = sum_in b_in s_in |u_in|^2 alpha_j->(in) g_jin g_jin^H + eta xi I

with lambda_j = 0 when the unconstrained solution already meets the power
budget, else the unique multiplier that makes the per-BS power hit the
budget, found by a one-dimensional search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .channel import ChannelSet
from .objective import (PowerModel, Weights, g_value, link_powers, mse_all,
                        per_bs_power)
from .pattern import LinkGainModel

__all__ = [
    "AscentViolationError",
    "InnerState",
    "InnerResult",
    "matched_init",
    "update_filters",
    "update_slacks",
    "lambda_search",
    "solve_beamformers_bs",
    "inner_iterate",
    "inner_solve",
]

LAMBDA_INTERVAL_FLOOR = 1e-12
TIE_BREAK_REG = 1e-12


class AscentViolationError(RuntimeError):
    """The surrogate decreased across a sweep; indicates an implementation bug."""


@dataclass
class InnerState:
    w: np.ndarray
    u: np.ndarray
    s: np.ndarray
    g_current: float
    iter: int


@dataclass
class InnerResult:
    w: np.ndarray
    u: np.ndarray
    s: np.ndarray
    g_value: float
    iters: int
    converged: bool


def matched_init(channels: ChannelSet, p_max: float) -> np.ndarray:
    """Matched beamformers splitting the budget evenly: sqrt(P/K) g/||g||."""
    idx = np.arange(channels.num_cells)
    g_serv = channels.g[idx, idx]  # (L, K, M)
    norms = np.linalg.norm(g_serv, axis=2, keepdims=True)
    return math.sqrt(p_max / channels.users_per_cell) * g_serv / norms


def _stats(w, tilt_deg, channels, gains):
    alpha = gains.gains_lin(tilt_deg)
    pw, z = link_powers(w, channels)
    idx = np.arange(channels.num_cells)
    total = np.einsum("ijm,ijm->jm", alpha, pw) + 1.0
    return alpha, alpha[idx, idx, :], z, total


def update_filters(w, tilt_deg, channels: ChannelSet, gains: LinkGainModel) -> np.ndarray:
    """Closed-form error-minimizing receive filters for fixed beamformers."""
    _, alpha_serv, z, total = _stats(w, tilt_deg, channels, gains)
    return np.sqrt(alpha_serv) * z / total


def update_slacks(w, u, tilt_deg, channels: ChannelSet, gains: LinkGainModel) -> np.ndarray:
    """Optimal slacks s = 1/mse; equals 1 + SINR at the error-minimizing filter."""
    return 1.0 / mse_all(w, u, tilt_deg, channels, gains)


def lambda_search(power_fn: Callable[[float], float], p_max: float,
                  tol: float = 1e-10) -> float:
    """Multiplier making a decreasing ``power_fn`` meet the budget.

    Returns 0 immediately when the unconstrained power is already
    feasible; otherwise doubles an upper bracket from 1 until the power
    drops below the budget and bisects until the power matches within
    ``tol * p_max`` or the bracket width falls below 1e-12.
    """
    if power_fn(0.0) <= p_max:
        return 0.0
    lo, hi = 0.0, 1.0
    while power_fn(hi) >= p_max:
        lo = hi
        hi *= 2.0
        if hi > 1e30:
            raise RuntimeError("power does not fall below the budget; "
                               "power_fn is not decreasing")
    while True:
        mid = 0.5 * (lo + hi)
        p_mid = power_fn(mid)
        if abs(p_mid - p_max) <= tol * p_max or (hi - lo) < LAMBDA_INTERVAL_FLOOR:
            return mid
        if p_mid > p_max:
            lo = mid
        else:
            hi = mid


def solve_beamformers_bs(j: int, u, s, tilt_j_deg, eta: float,
                         channels: ChannelSet, gains: LinkGainModel,
                         p_max: float, weights: Weights, xi: float = 1.0,
                         power_tol: float = 1e-10) -> np.ndarray:
    """Best response of BS ``j``'s beamformers at fixed filters and slacks.

    Returns the (K, M) block; the per-BS power meets the budget exactly
    when the constraint is active.
    """
    L, K, M = channels.num_cells, channels.users_per_cell, channels.antennas
    if gains.mode == "3d":
        if tilt_j_deg is None or not 0.0 < float(tilt_j_deg) < 90.0:
            raise ValueError("tilt_j_deg must lie strictly inside (0, 90) degrees")
        tilt_j = float(tilt_j_deg)
    else:
        tilt_j = 0.0  # ignored by the tilt-free gain model
    alpha_j = gains.gains_lin_for_bs(j, np.array([tilt_j]))[0]  # (L, K)

    b = weights.b
    coeff = (b * np.asarray(s) * np.abs(u) ** 2 * alpha_j).reshape(-1)
    gj = channels.g[j].reshape(L * K, M)
    a_mat = (gj.T * coeff) @ gj.conj()
    reg = eta * xi
    if reg <= 0.0:
        reg = TIE_BREAK_REG
    a_mat = a_mat + reg * np.eye(M)
    a_mat = 0.5 * (a_mat + a_mat.conj().T)

    rhs_coeff = b[j] * np.asarray(s)[j] * np.asarray(u)[j] * np.sqrt(alpha_j[j])
    rhs = rhs_coeff[None, :] * channels.g[j, j].T  # (M, K)

    lam, q = np.linalg.eigh(a_mat)
    lam = np.maximum(lam, 0.0)
    proj2 = np.abs(q.conj().T @ rhs) ** 2  # (M, K)

    def power_at(mult: float) -> float:
        return float(np.sum(proj2 / (lam + mult)[:, None] ** 2))

    mult = lambda_search(power_at, p_max, tol=power_tol)
    scaled = (q.conj().T @ rhs) / (lam + mult)[:, None]
    return (q @ scaled).T  # (K, M)


def inner_iterate(state: InnerState, tilt_deg, eta: float, channels: ChannelSet,
                  gains: LinkGainModel, power_model: PowerModel,
                  weights: Weights) -> InnerState:
    """One full sweep: filters, slacks, then every BS's beamformers.

    Raises :class:`AscentViolationError` if the surrogate drops by more
    than a 1e-9 relative tolerance; a healthy solver never trips this.
    """
    u = update_filters(state.w, tilt_deg, channels, gains)
    s = update_slacks(state.w, u, tilt_deg, channels, gains)
    w = np.empty_like(state.w)
    for j in range(channels.num_cells):
        tilt_j = None if tilt_deg is None else np.asarray(tilt_deg, dtype=float)[j]
        w[j] = solve_beamformers_bs(j, u, s, tilt_j, eta, channels, gains,
                                    power_model.p_max, weights, power_model.xi)
    g_new = g_value(w, tilt_deg, eta, channels, gains, weights, power_model.xi)
    tol = 1e-9 * abs(state.g_current) + 1e-12
    if g_new < state.g_current - tol:
        raise AscentViolationError(
            f"surrogate decreased from {state.g_current!r} to {g_new!r}")
    return InnerState(w=w, u=u, s=s, g_current=g_new, iter=state.iter + 1)


def inner_solve(channels: ChannelSet, gains: LinkGainModel, eta: float, tilt_deg,
                power_model: PowerModel, weights: Weights,
                init_w: Optional[np.ndarray] = None, delta: float = 1e-3,
                max_iters: int = 200, trace=None) -> InnerResult:
    """Iterate sweeps at a fixed tilt until the surrogate stalls.

    Stops when successive surrogate values differ by less than ``delta``
    or after ``max_iters`` sweeps (flagged non-converged; the best
    iterate is still returned).  ``trace``, when given, receives one
    tab-separated line per sweep: iteration index, surrogate value, then
    the per-BS transmit powers.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    w0 = matched_init(channels, power_model.p_max) if init_w is None else np.array(init_w)
    u0 = update_filters(w0, tilt_deg, channels, gains)
    s0 = update_slacks(w0, u0, tilt_deg, channels, gains)
    g0 = g_value(w0, tilt_deg, eta, channels, gains, weights, power_model.xi)
    state = InnerState(w=w0, u=u0, s=s0, g_current=g0, iter=0)
    converged = False
    for _ in range(max_iters):
        g_prev = state.g_current
        state = inner_iterate(state, tilt_deg, eta, channels, gains, power_model, weights)
        if trace is not None:
            powers = "\t".join(f"{p:.9g}" for p in per_bs_power(state.w))
            trace.write(f"{state.iter}\t{state.g_current:.12g}\t{powers}\n")
        if abs(state.g_current - g_prev) < delta:
            converged = True
            break
    u = update_filters(state.w, tilt_deg, channels, gains)
    s = update_slacks(state.w, u, tilt_deg, channels, gains)
    return InnerResult(w=state.w, u=u, s=s, g_value=state.g_current,
                       iters=state.iter, converged=converged)
