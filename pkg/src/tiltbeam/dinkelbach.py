"""Outer layer: bisection on the efficiency parameter eta.

The ratio maximum equals the unique root of F(eta) = max over feasible
(W, theta) of f1 - eta * f2.  Each F evaluation alternates the inner
beamformer solver with per-BS tilt scans until the surrogate stalls;
the bisection then moves eta_min up on a positive F and eta_max down
otherwise, stopping when the bracket is narrower than epsilon.

Inner solves warm-start from the best solution found so far (by actual
efficiency), which both speeds the search up and guarantees that any
eta probed below the best known efficiency yields a positive F, keeping
the final bracket around the returned efficiency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .channel import ChannelSet
from .objective import (PowerModel, Solution, Weights, g_value, link_powers,
                        r_max, total_ee, total_transmit_power)
from .pattern import LinkGainModel, concavity_halfwidth_deg
from .tiltsearch import (Cluster, cluster_users, exhaustive_tilt_scan,
                         greedy_tilt_scan)
from .wmmse import (inner_solve, matched_init, solve_beamformers_bs,
                    update_filters, update_slacks)

__all__ = ["OuterConfig", "FEtaResult", "OuterDiagnostics", "f_eta", "outer_solve"]


@dataclass
class OuterConfig:
    """Tolerances and search controls for the two-layer solver."""

    epsilon: float = 1e-3
    delta: float = 1e-3
    tilt_step_deg: float = 0.1
    max_outer_iters: int = 64
    tilt_mode: str = "cluster"  # cluster | exhaustive | none
    cluster_threshold_deg: Optional[float] = None
    scan_all_clusters: bool = False
    max_inner_iters: int = 200
    max_tilt_rounds: int = 10
    zero_f_rel_tol: float = 1e-6
    tilt_margin_deg: float = 1e-3
    diversify_outer_iters: int = 4  # probes that also try a fresh cold start

    def __post_init__(self):
        if not (self.epsilon > 0 and self.delta > 0):
            raise ValueError("epsilon and delta must be positive")
        if self.tilt_mode not in ("cluster", "exhaustive", "none"):
            raise ValueError(f"unknown tilt_mode {self.tilt_mode!r}")


@dataclass
class FEtaResult:
    f_value: float
    w: np.ndarray
    tilt_deg: Optional[np.ndarray]
    g_value: float
    u: np.ndarray
    s: np.ndarray
    rounds: int
    inner_iters: int
    tilt_evals: int
    inner_converged: bool


@dataclass
class OuterDiagnostics:
    outer_iters: int
    eta_min: float
    eta_max: float
    tilt_evals: int
    inner_iters: int
    inner_converged_all: bool
    f_trace: List[float] = field(default_factory=list)


class _BsTiltObjective:
    """Vectorized surrogate value as a function of one BS's tilt.

    With the beamformers frozen, only the scanned BS's gains move, so the
    per-link received powers are cached once and each candidate tilt costs
    a handful of array ops.
    """

    def __init__(self, j: int, w, tilt_deg, channels: ChannelSet,
                 gains: LinkGainModel, eta: float, xi: float, weights: Weights):
        self.j = j
        self.gains = gains
        self.b = weights.b
        pw, z = link_powers(w, channels)
        alpha = gains.gains_lin(tilt_deg)
        idx = np.arange(channels.num_cells)
        other = alpha.copy()
        other[j] = 0.0
        self.total_other = np.einsum("ijm,ijm->jm", other, pw) + 1.0  # (L, K)
        self.pw_j = pw[j]  # (L, K)
        self.z2 = np.abs(z) ** 2  # (L, K)
        self.des_other = alpha[idx, idx, :] * self.z2  # row j replaced per candidate
        self.power_term = eta * xi * total_transmit_power(w)
        self.n_evals = 0

    def __call__(self, tilt_candidates_deg) -> np.ndarray:
        cands = np.atleast_1d(np.asarray(tilt_candidates_deg, dtype=float))
        self.n_evals += cands.size
        aj = self.gains.gains_lin_for_bs(self.j, cands)  # (T, L, K)
        total = self.total_other[None, :, :] + aj * self.pw_j[None, :, :]
        des = np.broadcast_to(self.des_other, total.shape).copy()
        des[:, self.j, :] = aj[:, self.j, :] * self.z2[self.j]
        rates = np.log1p(des / (total - des))
        return np.einsum("jm,tjm->t", self.b, rates) - self.power_term


class _BsScaleObjective:
    """Vectorized surrogate value as a function of one BS's power scale.

    Block-coordinate sweeps adjust the transmit power level only slowly
    when it starts far from the optimum (the per-sweep multiplier tends to
    1 at high SNR), so the solver probes a log-spaced grid of whole-block
    power rescalings directly.
    """

    def __init__(self, j: int, w, tilt_deg, channels: ChannelSet,
                 gains: LinkGainModel, eta: float, xi: float, weights: Weights):
        self.j = j
        self.b = weights.b
        pw, z = link_powers(w, channels)
        alpha = gains.gains_lin(tilt_deg)
        idx = np.arange(channels.num_cells)
        other = alpha.copy()
        other[j] = 0.0
        self.total_other = np.einsum("ijm,ijm->jm", other, pw) + 1.0
        self.aj_pwj = alpha[j] * pw[j]  # scales with the power factor
        des = alpha[idx, idx, :] * np.abs(z) ** 2
        self.des_j = des[j].copy()
        self.des_other = des
        self.q_j = float(np.sum(np.abs(w[j]) ** 2))
        self.power_other = float(np.sum(np.abs(w) ** 2)) - self.q_j
        self.eta_xi = eta * xi

    def __call__(self, power_factors) -> np.ndarray:
        c2 = np.atleast_1d(np.asarray(power_factors, dtype=float))
        total = self.total_other[None, :, :] + c2[:, None, None] * self.aj_pwj[None]
        des = np.broadcast_to(self.des_other, total.shape).copy()
        des[:, self.j, :] = c2[:, None] * self.des_j[None, :]
        rates = np.log1p(des / (total - des))
        power = self.power_other + c2 * self.q_j
        return np.einsum("jm,tjm->t", self.b, rates) - self.eta_xi * power


def _default_tilts(gains: LinkGainModel) -> np.ndarray:
    return gains.serving_aoas_deg().mean(axis=1)


def _greedy_init_tilts(w, channels, gains, weights, xi) -> np.ndarray:
    """Per-BS tilt pick over the user angles, scored at the given beamformers.

    Starting the solver at a tilt aligned with one user keeps that user's
    effective channel strong; a between-users compromise tilt can start a
    spread-out user so attenuated that the block updates never revive it.
    """
    tilts = _default_tilts(gains)
    aoas = gains.serving_aoas_deg()
    for j in range(aoas.shape[0]):
        obj = _BsTiltObjective(j, w, tilts, channels, gains, 0.0, xi, weights)
        vals = obj(aoas[j])
        cand = np.concatenate([aoas[j], [tilts[j]]])
        vals = np.concatenate([vals, obj(np.array([tilts[j]]))])
        tilts[j] = float(cand[int(np.argmax(vals))])
    return tilts


def _clusters_per_cell(gains: LinkGainModel, cfg: OuterConfig) -> List[List[Cluster]]:
    threshold = cfg.cluster_threshold_deg
    if threshold is None:
        threshold = 2.0 * concavity_halfwidth_deg(gains.params)
    aoas = gains.serving_aoas_deg()
    return [cluster_users(aoas[j], threshold) for j in range(aoas.shape[0])]


def f_eta(eta: float, channels: ChannelSet, gains: LinkGainModel,
          power_model: PowerModel, weights: Weights, cfg: OuterConfig,
          init_w: Optional[np.ndarray] = None,
          init_tilt_deg: Optional[np.ndarray] = None,
          clusters: Optional[List[List[Cluster]]] = None,
          diversify: bool = True) -> FEtaResult:
    """Approximate max of f1 - eta * f2 by alternating beamformer solves
    with per-BS tilt scans; returns the surrogate at the best point found.

    When a warm start is supplied the matched-beamformer cold start runs as
    well and the better endpoint wins, so warm-starting can never return
    less than the cold solve would (``diversify=False`` skips the extra
    run when the caller only needs the warm refinement).
    """
    result = _ascend(eta, channels, gains, power_model, weights, cfg,
                     init_w, init_tilt_deg, clusters)
    if init_w is not None and diversify:
        cold = _ascend(eta, channels, gains, power_model, weights, cfg,
                       None, None, clusters)
        better = cold if cold.g_value > result.g_value else result
        return FEtaResult(
            f_value=better.f_value, w=better.w, tilt_deg=better.tilt_deg,
            g_value=better.g_value, u=better.u, s=better.s,
            rounds=result.rounds + cold.rounds,
            inner_iters=result.inner_iters + cold.inner_iters,
            tilt_evals=result.tilt_evals + cold.tilt_evals,
            inner_converged=result.inner_converged and cold.inner_converged)
    return result


def _ascend(eta: float, channels: ChannelSet, gains: LinkGainModel,
            power_model: PowerModel, weights: Weights, cfg: OuterConfig,
            init_w: Optional[np.ndarray],
            init_tilt_deg: Optional[np.ndarray],
            clusters: Optional[List[List[Cluster]]]) -> FEtaResult:
    L, K = channels.num_cells, channels.users_per_cell
    halfwidth = concavity_halfwidth_deg(gains.params)
    has_tilt = gains.mode == "3d"
    use_tilt = cfg.tilt_mode != "none" and has_tilt
    if has_tilt:
        if init_tilt_deg is not None:
            tilts = np.array(init_tilt_deg, dtype=float)
        else:
            tilts = _greedy_init_tilts(
                init_w if init_w is not None else matched_init(channels, power_model.p_max),
                channels, gains, weights, power_model.xi)
        if use_tilt and clusters is None and cfg.tilt_mode == "cluster":
            clusters = _clusters_per_cell(gains, cfg)
    else:
        tilts = None

    lo_lim = cfg.tilt_margin_deg
    hi_lim = 90.0 - cfg.tilt_margin_deg
    aoas_all = gains.serving_aoas_deg() if use_tilt else None

    w = init_w
    g_cur = -math.inf
    tilt_evals = 0
    inner_iters = 0
    converged_all = True
    rounds = 0
    result_state = None
    for _ in range(cfg.max_tilt_rounds):
        rounds += 1
        res = inner_solve(channels, gains, eta, tilts, power_model, weights,
                          init_w=w, delta=cfg.delta, max_iters=cfg.max_inner_iters)
        w, g_round_start = res.w, res.g_value
        inner_iters += res.iters
        converged_all = converged_all and res.converged
        g_cur = g_round_start
        result_state = res
        changed = False
        u_snap, s_snap = res.u, res.s
        for j in range(L):
            # chosen-user probes: for each user, try (a) the BS's best-response
            # beamformers and (b) matched beams concentrated on that user, so
            # power can move to a user the current filter state neglects; with
            # a tilt variable the candidate tilt is that user's angle
            q_cur = float(np.sum(np.abs(w[j]) ** 2))
            probe_powers = [q for q in (q_cur, power_model.p_max / K)
                            if q > 1e-12 * power_model.p_max]
            cu, probe_best = 0, -math.inf
            for m in range(K):
                if use_tilt:
                    t_cand = float(aoas_all[j][m])
                else:
                    t_cand = None if tilts is None else float(tilts[j])
                blocks = [solve_beamformers_bs(j, u_snap, s_snap, t_cand,
                                               eta, channels, gains,
                                               power_model.p_max, weights,
                                               power_model.xi)]
                g_focus = channels.g[j, j, m]
                focus = g_focus / np.linalg.norm(g_focus)
                for q in probe_powers:
                    block = np.zeros_like(w[j])
                    block[m] = math.sqrt(q) * focus
                    blocks.append(block)
                if use_tilt:
                    tilts_try = tilts.copy()
                    tilts_try[j] = t_cand
                else:
                    tilts_try = tilts
                for block in blocks:
                    w_try = w.copy()
                    w_try[j] = block
                    g_try = g_value(w_try, tilts_try, eta, channels, gains,
                                    weights, power_model.xi)
                    if use_tilt:
                        tilt_evals += 1
                    if g_try > probe_best:
                        cu, probe_best = m, g_try
                    if g_try > g_cur:
                        w, tilts, g_cur = w_try, tilts_try, g_try
                        changed = True
            # power-rescale probe for the whole block: block sweeps crawl
            # when the power level starts orders of magnitude off
            q_now = float(np.sum(np.abs(w[j]) ** 2))
            if q_now > 1e-12 * power_model.p_max:
                scale_obj = _BsScaleObjective(j, w, tilts, channels, gains,
                                              eta, power_model.xi, weights)
                factors = np.geomspace(1e-4, power_model.p_max / q_now, 25)
                vals = scale_obj(factors)
                best = int(np.argmax(vals))
                if vals[best] > g_cur:
                    w = w.copy()
                    w[j] = w[j] * math.sqrt(factors[best])
                    g_cur = float(vals[best])
                    changed = True
            if not use_tilt:
                continue
            # grid refinement around the chosen user's cluster (beamformers fixed)
            obj = _BsTiltObjective(j, w, tilts, channels, gains, eta,
                                   power_model.xi, weights)
            aoas = aoas_all[j]
            if cfg.tilt_mode == "cluster":
                scan = clusters[j] if cfg.scan_all_clusters \
                    else [c for c in clusters[j] if cu in c.member_indices]
                best_t, best_v = tilts[j], g_cur
                for c in scan:
                    t, v = greedy_tilt_scan(c, cfg.tilt_step_deg, obj, halfwidth,
                                            lo_lim, hi_lim)
                    if v > best_v:
                        best_t, best_v = t, v
            else:
                best_t, best_v = exhaustive_tilt_scan(lo_lim, hi_lim,
                                                      cfg.tilt_step_deg, obj)
                # extra candidates keep the full search a strict superset of
                # the clustering mode's (user angles and padded span edges)
                extras = np.unique(np.clip(
                    np.concatenate([aoas, aoas - halfwidth, aoas + halfwidth]),
                    lo_lim, hi_lim))
                extra_vals = obj(extras)
                k = int(np.argmax(extra_vals))
                if extra_vals[k] > best_v:
                    best_t, best_v = float(extras[k]), float(extra_vals[k])
            tilt_evals += obj.n_evals
            if best_v > g_cur:
                tilts = tilts.copy()
                tilts[j] = best_t
                g_cur = best_v
                changed = True
        if not changed or g_cur - g_round_start < cfg.delta:
            break

    # the probes may have moved (w, tilts) after the last inner solve
    u = update_filters(w, tilts, channels, gains)
    s = update_slacks(w, u, tilts, channels, gains)
    floor = power_model.floor(channels.antennas, L)
    return FEtaResult(f_value=g_cur - eta * floor, w=w, tilt_deg=tilts,
                      g_value=g_cur, u=u, s=s,
                      rounds=rounds, inner_iters=inner_iters,
                      tilt_evals=tilt_evals, inner_converged=converged_all)


def outer_solve(channels: ChannelSet, gains: LinkGainModel,
                power_model: PowerModel, weights: Weights, cfg: OuterConfig,
                trace=None):
    """Bisection on eta over [0, r_max / power floor].

    Returns ``(solution, diagnostics)``; the solution carries the best
    (W, theta) seen across all probes together with its exact efficiency,
    and eta is the final bracket midpoint.  ``trace``, when given,
    receives one tab-separated line per outer iteration:
    ``eta_min  eta_max  F``.
    """
    L, M = channels.num_cells, channels.antennas
    floor = power_model.floor(M, L)
    eta_max = r_max(channels, power_model.p_max, gain_lin=gains.peak_gain_lin,
                    weights=weights) / floor
    eta_min = 0.0

    use_tilt = cfg.tilt_mode != "none" and gains.mode == "3d"
    clusters = _clusters_per_cell(gains, cfg) if use_tilt and cfg.tilt_mode == "cluster" else None
    best_w = matched_init(channels, power_model.p_max)
    best_tilts = _greedy_init_tilts(best_w, channels, gains, weights,
                                    power_model.xi) if use_tilt else None
    best_u = update_filters(best_w, best_tilts, channels, gains)
    best_s = update_slacks(best_w, best_u, best_tilts, channels, gains)
    best_ee = total_ee(best_w, best_tilts, channels, gains, power_model, weights)

    diag = OuterDiagnostics(outer_iters=0, eta_min=eta_min, eta_max=eta_max,
                            tilt_evals=0, inner_iters=0, inner_converged_all=True)
    while (eta_max - eta_min) >= cfg.epsilon and diag.outer_iters < cfg.max_outer_iters:
        eta = 0.5 * (eta_min + eta_max)
        warm_w = best_w if diag.outer_iters > 0 else None
        warm_tilts = best_tilts if diag.outer_iters > 0 else None
        res = f_eta(eta, channels, gains, power_model, weights, cfg,
                    init_w=warm_w, init_tilt_deg=warm_tilts, clusters=clusters,
                    diversify=diag.outer_iters < cfg.diversify_outer_iters)
        diag.outer_iters += 1
        diag.tilt_evals += res.tilt_evals
        diag.inner_iters += res.inner_iters
        diag.inner_converged_all = diag.inner_converged_all and res.inner_converged
        diag.f_trace.append(res.f_value)
        ee_cand = total_ee(res.w, res.tilt_deg, channels, gains, power_model, weights)
        if ee_cand > best_ee:
            best_ee = ee_cand
            best_w, best_tilts, best_u, best_s = res.w, res.tilt_deg, res.u, res.s
        f2_here = power_model.consumed(res.w, M, L)
        if res.f_value > cfg.zero_f_rel_tol * f2_here:
            eta_min = eta
        else:
            eta_max = eta
        if trace is not None:
            trace.write(f"{eta_min:.9g}\t{eta_max:.9g}\t{res.f_value:.9g}\n")

    diag.eta_min, diag.eta_max = eta_min, eta_max
    solution = Solution(w=best_w, tilt_deg=best_tilts, u=best_u, s=best_s,
                        eta=0.5 * (eta_min + eta_max), ee=best_ee)
    return solution, diag
