"""Fast built-in sanity checks: invariants and small oracles.

Run via ``tiltbeam validate``.  Each check prints one PASS/FAIL line;
the suite returns True only if every check passes.  This is a smoke
subset of the full test suite, meant for quick installs.
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelSet
from .dinkelbach import OuterConfig, outer_solve
from .objective import (PowerModel, Weights, g_value, h_value, mse_all,
                        per_bs_power, rates_nats_all, total_ee)
from .pattern import LinkGainModel, PatternParams, concavity_halfwidth_deg
from .tiltsearch import Cluster, cluster_users, exhaustive_tilt_scan, greedy_tilt_scan
from .wmmse import inner_iterate, inner_solve, matched_init, update_filters, update_slacks
from .wmmse import InnerState


def random_instance(rng, num_cells=2, users_per_cell=2, antennas=3):
    """A dense random instance: channels, gains and angles, no geometry."""
    L, K, M = num_cells, users_per_cell, antennas
    g = (rng.standard_normal((L, L, K, M)) + 1j * rng.standard_normal((L, L, K, M)))
    beta = rng.uniform(0.2, 2.0, size=(L, L, K))
    g = g * np.sqrt(beta / 2.0)[..., None]
    channels = ChannelSet(g=g, beta=beta)
    elev = rng.uniform(2.0, 25.0, size=(L, L, K))
    azim = rng.uniform(-180.0, 180.0, size=(L, L, K))
    bores = rng.uniform(-180.0, 180.0, size=L)
    gains = LinkGainModel(PatternParams(), elev, azim, bores, mode="3d")
    return channels, gains


def _check(out, name, ok):
    out.write(f"{'PASS' if ok else 'FAIL'}  {name}\n")
    return ok


def run_validation(seed: int = 7, out=None) -> bool:
    import sys
    out = out or sys.stdout
    rng = np.random.default_rng(seed)
    ok = True

    # reformulation identity: h at optimal filters/slacks collapses onto g
    worst = 0.0
    for _ in range(50):
        channels, gains = random_instance(rng)
        L, K = channels.num_cells, channels.users_per_cell
        tilts = rng.uniform(3.0, 20.0, size=L)
        w = matched_init(channels, p_max=2.0) * rng.uniform(0.2, 1.0)
        weights = Weights.uniform(L, K)
        eta = rng.uniform(0.0, 0.3)
        u = update_filters(w, tilts, channels, gains)
        s = update_slacks(w, u, tilts, channels, gains)
        h = h_value(w, u, s, tilts, eta, channels, gains, weights, 1.0)
        g = g_value(w, tilts, eta, channels, gains, weights, 1.0)
        worst = max(worst, abs(h - g) / (1.0 + abs(g)))
        rates = rates_nats_all(w, tilts, channels, gains)
        worst = max(worst, float(np.max(np.abs(
            -np.log(mse_all(w, u, tilts, channels, gains)) - rates))))
    ok &= _check(out, f"reformulation identity (worst dev {worst:.2e})", worst <= 1e-9)

    # monotone ascent of the surrogate across sweeps
    violations = 0
    for _ in range(10):
        channels, gains = random_instance(rng)
        L, K = channels.num_cells, channels.users_per_cell
        tilts = rng.uniform(3.0, 20.0, size=L)
        pm = PowerModel(p_max=3.0)
        weights = Weights.uniform(L, K)
        w = matched_init(channels, pm.p_max)
        u = update_filters(w, tilts, channels, gains)
        s = update_slacks(w, u, tilts, channels, gains)
        state = InnerState(w=w, u=u, s=s,
                           g_current=g_value(w, tilts, 0.05, channels, gains, weights, pm.xi),
                           iter=0)
        try:
            for _ in range(15):
                state = inner_iterate(state, tilts, 0.05, channels, gains, pm, weights)
        except Exception:
            violations += 1
    ok &= _check(out, "monotone surrogate ascent (10 seeded runs)", violations == 0)

    # power feasibility and budget accuracy
    feasible = True
    for _ in range(10):
        channels, gains = random_instance(rng)
        L, K = channels.num_cells, channels.users_per_cell
        tilts = rng.uniform(3.0, 20.0, size=L)
        pm = PowerModel(p_max=1.5)
        res = inner_solve(channels, gains, 0.02, tilts, pm,
                          Weights.uniform(L, K), delta=1e-6)
        feasible &= bool(np.all(per_bs_power(res.w) <= pm.p_max * (1 + 1e-9)))
    ok &= _check(out, "per-BS power within budget", feasible)

    # clustering partition / gap properties
    aoas = rng.uniform(0.0, 40.0, size=12)
    thr = 2.0 * concavity_halfwidth_deg(PatternParams())
    clusters = cluster_users(aoas, thr)
    members = sorted(i for c in clusters for i in c.member_indices)
    partition_ok = members == list(range(len(aoas)))
    spans = sorted((c.span_min_deg, c.span_max_deg) for c in clusters)
    gaps_ok = all(spans[i + 1][0] - spans[i][1] >= thr for i in range(len(spans) - 1))
    ok &= _check(out, "clustering partition and inter-cluster gaps", partition_ok and gaps_ok)

    # greedy scan never beats the full-range scan on the same step
    def bump(t):
        t = np.asarray(t, dtype=float)
        return -((t - 17.3) ** 2)
    c = Cluster(member_indices=(0,), span_min_deg=16.0, span_max_deg=16.0)
    _, v_greedy = greedy_tilt_scan(c, 0.1, bump, halfwidth_deg=2.55)
    _, v_full = exhaustive_tilt_scan(1e-3, 90 - 1e-3, 0.1, bump)
    ok &= _check(out, "greedy scan value <= exhaustive scan value", v_greedy <= v_full + 1e-12)

    # outer solve self-consistency: stored efficiency is reproducible
    channels, gains = random_instance(rng)
    L, K = channels.num_cells, channels.users_per_cell
    pm = PowerModel(p_max=2.0)
    weights = Weights.uniform(L, K)
    sol, diag = outer_solve(channels, gains, pm, weights, OuterConfig())
    ee = total_ee(sol.w, sol.tilt_deg, channels, gains, pm, weights)
    ok &= _check(out, "outer solve efficiency self-consistency",
                 abs(ee - sol.ee) <= 1e-9 * (1 + abs(ee)))
    return bool(ok)
