"""Tilt-angle search: AoA clustering, chosen-user selection and grid scans.

Users of one cell are chained into clusters whenever consecutive sorted
elevation angles differ by less than a threshold (twice the pattern's
concavity half-width by default).  A tilt optimum can only sit within
one half-width of some user's angle, so scanning each cluster's span
padded by one half-width per side covers every candidate maximum while
skipping the empty stretches in between.  An exhaustive full-range scan
with the same step serves as the oracle baseline.

Every scan evaluates ``eval_fn`` once on a whole candidate array;
callers supply a vectorized objective (candidate tilts in, objective
values out).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

__all__ = [
    "Cluster",
    "cluster_users",
    "chosen_user",
    "tilt_grid",
    "greedy_tilt_scan",
    "exhaustive_tilt_scan",
]

EvalFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Cluster:
    """A run of AoA-adjacent users and the interval their angles span."""

    member_indices: Tuple[int, ...]
    span_min_deg: float
    span_max_deg: float


def cluster_users(aoas_deg: Sequence[float], threshold_deg: float) -> List[Cluster]:
    """Greedy chaining of AoA-sorted users into clusters.

    Consecutive users closer than ``threshold_deg`` share a cluster; the
    clusters partition the users and each spans [min, max] of its member
    angles (a single point for singletons).
    """
    aoas = np.asarray(aoas_deg, dtype=float)
    if aoas.size == 0:
        raise ValueError("at least one user is required")
    if not threshold_deg > 0:
        raise ValueError("threshold_deg must be positive")
    order = np.argsort(aoas, kind="stable")
    sorted_aoas = aoas[order]
    clusters: List[Cluster] = []
    start = 0
    for pos in range(1, aoas.size + 1):
        if pos == aoas.size or sorted_aoas[pos] - sorted_aoas[pos - 1] >= threshold_deg:
            members = tuple(int(k) for k in order[start:pos])
            clusters.append(Cluster(member_indices=members,
                                    span_min_deg=float(sorted_aoas[start]),
                                    span_max_deg=float(sorted_aoas[pos - 1])))
            start = pos
    return clusters


def chosen_user(eval_fn: EvalFn, aoas_deg: Sequence[float]) -> int:
    """Index of the user whose AoA, used as the tilt, scores highest.

    Ties break toward the smallest index.
    """
    vals = np.asarray(eval_fn(np.asarray(aoas_deg, dtype=float)))
    return int(np.argmax(vals))


def tilt_grid(lo_deg: float, hi_deg: float, step_deg: float) -> np.ndarray:
    """Grid points over [lo, hi]: every multiple of the step inside the
    interval, plus both endpoints.

    Anchoring interior points at absolute multiples of the step makes a
    grid over a sub-interval a subset of the grid over a larger one.
    """
    if not step_deg > 0:
        raise ValueError("step_deg must be positive")
    if hi_deg < lo_deg:
        raise ValueError("need lo_deg <= hi_deg")
    k0 = int(math.ceil(lo_deg / step_deg - 1e-9))
    k1 = int(math.floor(hi_deg / step_deg + 1e-9))
    interior = np.arange(k0, k1 + 1, dtype=float) * step_deg
    pts = np.concatenate(([lo_deg], interior, [hi_deg]))
    pts = pts[(pts >= lo_deg) & (pts <= hi_deg)]
    return np.unique(pts)


def greedy_tilt_scan(cluster: Cluster, step_deg: float, eval_fn: EvalFn,
                     halfwidth_deg: float, lo_limit_deg: float = 1e-3,
                     hi_limit_deg: float = 90.0 - 1e-3) -> Tuple[float, float]:
    """Grid argmax over the cluster's span padded by one half-width per side,
    clipped to the feasible tilt range."""
    lo = max(lo_limit_deg, cluster.span_min_deg - halfwidth_deg)
    hi = min(hi_limit_deg, cluster.span_max_deg + halfwidth_deg)
    if hi < lo:
        lo = hi = min(max(cluster.span_min_deg, lo_limit_deg), hi_limit_deg)
    grid = tilt_grid(lo, hi, step_deg)
    vals = np.asarray(eval_fn(grid))
    best = int(np.argmax(vals))
    return float(grid[best]), float(vals[best])


def exhaustive_tilt_scan(lo_deg: float, hi_deg: float, step_deg: float,
                         eval_fn: EvalFn) -> Tuple[float, float]:
    """Full-grid argmax over [lo, hi]; ties break toward the lowest angle."""
    if not lo_deg < hi_deg:
        raise ValueError("need lo_deg < hi_deg")
    grid = tilt_grid(lo_deg, hi_deg, step_deg)
    vals = np.asarray(eval_fn(grid))
    best = int(np.argmax(vals))
    return float(grid[best]), float(vals[best])
