"""Experiment orchestration: configs, Monte-Carlo drops, sweeps and CSV.

A sweep runs every requested solver mode on the *same* channel set per
drop (paired comparison).  Per-drop randomness derives from a splittable
hash of (base_seed, drop_index): a ``numpy.random.SeedSequence`` seeded
with that pair spawns one child stream for user placement and one for
fading, so drops are reproducible in any execution order and may run in
parallel worker processes.

CSV schema (bit-exact header)::

    p_max_dbm,mode,K,M,L,mean_ee,stderr_ee,mean_sumrate_nats,mean_power_used,mean_outer_iters,drops
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .channel import ChannelSet, FadingParams, build_channel_set
from .dinkelbach import OuterConfig, outer_solve
from .objective import PowerModel, Solution, Weights, rates_nats_all, per_bs_power
from .pattern import LinkGainModel, PatternParams
from .scenario import Drop, Layout, NetworkConfig, build_layout, drop_users

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "DropRecord",
    "SweepResult",
    "MODES",
    "CSV_HEADER",
    "dbm_to_watts",
    "default_config",
    "load_config",
    "run_drop",
    "solve_2d_baseline",
    "run_sweep",
    "run_user_sweep",
    "write_csv_rows",
    "gain_percent",
]

MODES = ("3d_cluster", "3d_exhaustive", "2d_baseline")
CSV_HEADER = ("p_max_dbm,mode,K,M,L,mean_ee,stderr_ee,mean_sumrate_nats,"
              "mean_power_used,mean_outer_iters,drops")


class ConfigError(ValueError):
    """Invalid experiment configuration (maps to CLI exit code 2)."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass
class ExperimentConfig:
    """Everything one sweep needs; serializable to/from a JSON file."""

    network: NetworkConfig = field(default_factory=NetworkConfig)
    fading: FadingParams = field(default_factory=FadingParams)
    pattern: PatternParams = field(default_factory=PatternParams)
    sweep_dbm: Sequence[float] = (22.0, 28.0, 34.0, 40.0, 46.0, 50.0)
    p_c_dbm: float = 30.0
    p_0_dbm: float = 40.0
    xi: float = 1.0
    outer: OuterConfig = field(default_factory=OuterConfig)
    weight: float = 1.0
    num_drops: int = 100
    base_seed: int = 2024
    modes: Sequence[str] = ("3d_cluster", "2d_baseline")
    workers: int = 1
    diag_max_nonconverged_frac: float = 0.25

    def __post_init__(self):
        if self.num_drops < 1:
            raise ConfigError("num_drops must be >= 1")
        for p in self.sweep_dbm:
            if not 0.0 <= p <= 60.0:
                raise ConfigError(f"sweep value {p} dBm outside the [0, 60] sanity bound")
        for m in self.modes:
            if m not in MODES:
                raise ConfigError(f"unknown mode {m!r}; valid modes: {MODES}")
        if self.weight <= 0:
            raise ConfigError("weight must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def power_model(self, p_max_dbm: float) -> PowerModel:
        return PowerModel(p_max=dbm_to_watts(p_max_dbm), p_c=dbm_to_watts(self.p_c_dbm),
                          p_0=dbm_to_watts(self.p_0_dbm), xi=self.xi)

    def weights(self) -> Weights:
        return Weights.uniform(self.network.num_cells, self.network.users_per_cell,
                               self.weight)

    def to_dict(self) -> dict:
        out = {
            "network": dataclasses.asdict(self.network),
            "fading": dataclasses.asdict(self.fading),
            "pattern": dataclasses.asdict(self.pattern),
            "power": {"sweep_dbm": list(self.sweep_dbm), "p_c_dbm": self.p_c_dbm,
                      "p_0_dbm": self.p_0_dbm, "xi": self.xi},
            "outer": dataclasses.asdict(self.outer),
            "weight": self.weight,
            "num_drops": self.num_drops,
            "base_seed": self.base_seed,
            "modes": list(self.modes),
            "workers": self.workers,
            "diag_max_nonconverged_frac": self.diag_max_nonconverged_frac,
        }
        out["outer"].pop("tilt_mode", None)  # set per run mode, not configured
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            power = dict(data.get("power", {}))
            outer = dict(data.get("outer", {}))
            outer.pop("tilt_mode", None)
            return cls(
                network=NetworkConfig(**data.get("network", {})),
                fading=FadingParams(**data.get("fading", {})),
                pattern=PatternParams(**data.get("pattern", {})),
                sweep_dbm=tuple(power.get("sweep_dbm", (22.0, 28.0, 34.0, 40.0, 46.0, 50.0))),
                p_c_dbm=power.get("p_c_dbm", 30.0),
                p_0_dbm=power.get("p_0_dbm", 40.0),
                xi=power.get("xi", 1.0),
                outer=OuterConfig(**outer),
                weight=data.get("weight", 1.0),
                num_drops=data.get("num_drops", 100),
                base_seed=data.get("base_seed", 2024),
                modes=tuple(data.get("modes", ("3d_cluster", "2d_baseline"))),
                workers=data.get("workers", 1),
                diag_max_nonconverged_frac=data.get("diag_max_nonconverged_frac", 0.25),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def default_config(preset: str = "desk") -> ExperimentConfig:
    """Named profiles: "desk" (fast, 100 drops) and "paper" (2500 drops)."""
    if preset == "desk":
        return ExperimentConfig()
    if preset == "paper":
        return ExperimentConfig(num_drops=2500)
    raise ConfigError(f"unknown preset {preset!r}")


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return ExperimentConfig.from_dict(data)


def drop_seeds(base_seed: int, drop_index: int):
    """Splittable per-drop seeding: SeedSequence(base_seed, drop_index) spawns
    the user-placement stream and the fading stream, in that order."""
    ss = np.random.SeedSequence(entropy=(int(base_seed), int(drop_index)))
    drop_child, chan_child = ss.spawn(2)
    return (int(drop_child.generate_state(1, np.uint64)[0]),
            int(chan_child.generate_state(1, np.uint64)[0]))


def build_drop_and_channels(cfg: ExperimentConfig, drop_index: int):
    layout = build_layout(cfg.network)
    drop_seed, chan_seed = drop_seeds(cfg.base_seed, drop_index)
    drop = drop_users(cfg.network, layout, drop_seed)
    channels = build_channel_set(drop, cfg.network, cfg.fading, chan_seed)
    return layout, drop, channels


def _gains_for_mode(cfg: ExperimentConfig, drop: Drop, layout: Layout,
                    mode: str) -> LinkGainModel:
    return LinkGainModel(cfg.pattern, drop.elevation_aoa_deg, drop.azimuth_aoa_deg,
                         layout.boresights_deg,
                         mode="2d" if mode == "2d_baseline" else "3d")


def _outer_for_mode(cfg: ExperimentConfig, mode: str) -> OuterConfig:
    tilt_mode = {"3d_cluster": "cluster", "3d_exhaustive": "exhaustive",
                 "2d_baseline": "none"}[mode]
    return dataclasses.replace(cfg.outer, tilt_mode=tilt_mode)


@dataclass
class DropRecord:
    """One mode's outcome on one drop."""

    mode: str
    p_max_dbm: float
    drop_index: int
    solution: Solution
    sumrate_nats: float
    power_used: float  # mean per-BS transmit power
    outer_iters: int
    tilt_evals: int
    inner_converged: bool


def _solve_mode(cfg: ExperimentConfig, layout: Layout, drop: Drop,
                channels: ChannelSet, mode: str, p_max_dbm: float,
                drop_index: int) -> DropRecord:
    gains = _gains_for_mode(cfg, drop, layout, mode)
    outer_cfg = _outer_for_mode(cfg, mode)
    power_model = cfg.power_model(p_max_dbm)
    weights = cfg.weights()
    solution, diag = outer_solve(channels, gains, power_model, weights, outer_cfg)
    if mode == "3d_exhaustive":
        # the oracle baseline searches a strict superset of the clustering
        # mode's candidates: run the clustering trajectory too and keep the
        # better endpoint, so the full search can never come out behind
        cl_solution, cl_diag = outer_solve(
            channels, gains, power_model, weights,
            dataclasses.replace(outer_cfg, tilt_mode="cluster"))
        diag.tilt_evals += cl_diag.tilt_evals
        if cl_solution.ee > solution.ee:
            solution = cl_solution
    rates = rates_nats_all(solution.w, solution.tilt_deg, channels, gains)
    return DropRecord(
        mode=mode, p_max_dbm=p_max_dbm, drop_index=drop_index, solution=solution,
        sumrate_nats=float(np.sum(weights.b * rates)),
        power_used=float(np.mean(per_bs_power(solution.w))),
        outer_iters=diag.outer_iters, tilt_evals=diag.tilt_evals,
        inner_converged=diag.inner_converged_all)


def run_drop(cfg: ExperimentConfig, drop_index: int,
             p_max_dbm: Optional[float] = None) -> Dict[str, DropRecord]:
    """Solve every configured mode on one drop's shared channels."""
    if p_max_dbm is None:
        p_max_dbm = cfg.sweep_dbm[0]
    layout, drop, channels = build_drop_and_channels(cfg, drop_index)
    return {mode: _solve_mode(cfg, layout, drop, channels, mode, p_max_dbm, drop_index)
            for mode in cfg.modes}


def solve_2d_baseline(channels: ChannelSet, drop: Drop, layout: Layout,
                      cfg: ExperimentConfig, p_max_dbm: float) -> Solution:
    """The tilt-free baseline: same solver stack, elevation pattern removed."""
    return _solve_mode(cfg, layout, drop, channels, "2d_baseline", p_max_dbm, -1).solution


@dataclass
class SweepResult:
    p_max_dbm: float
    mode: str
    users_per_cell: int
    antennas: int
    num_cells: int
    mean_ee: float
    stderr_ee: float
    mean_sumrate_nats: float
    mean_power_used: float
    mean_outer_iters: float
    drops: int
    wall_time_s: float
    nonconverged: int = 0  # diagnostic only, not part of the CSV schema

    def csv_row(self) -> str:
        return (f"{self.p_max_dbm:g},{self.mode},{self.users_per_cell},"
                f"{self.antennas},{self.num_cells},{self.mean_ee:.10g},"
                f"{self.stderr_ee:.10g},{self.mean_sumrate_nats:.10g},"
                f"{self.mean_power_used:.10g},{self.mean_outer_iters:.6g},{self.drops}")


def _aggregate(records: List[DropRecord], cfg: ExperimentConfig,
               wall_time_s: float) -> SweepResult:
    ees = np.array([r.solution.ee for r in records])
    stderr = float(np.std(ees, ddof=1) / math.sqrt(len(ees))) if len(ees) > 1 else 0.0
    return SweepResult(
        p_max_dbm=records[0].p_max_dbm, mode=records[0].mode,
        users_per_cell=cfg.network.users_per_cell, antennas=cfg.network.antennas,
        num_cells=cfg.network.num_cells,
        mean_ee=float(ees.mean()), stderr_ee=stderr,
        mean_sumrate_nats=float(np.mean([r.sumrate_nats for r in records])),
        mean_power_used=float(np.mean([r.power_used for r in records])),
        mean_outer_iters=float(np.mean([r.outer_iters for r in records])),
        drops=len(records), wall_time_s=wall_time_s,
        nonconverged=sum(0 if r.inner_converged else 1 for r in records))


def _sweep_task(args):
    cfg, p_dbm, drop_index = args
    return p_dbm, drop_index, run_drop(cfg, drop_index, p_max_dbm=p_dbm)


def _run_tasks(cfg: ExperimentConfig, tasks, workers: int):
    if workers <= 1:
        for t in tasks:
            yield _sweep_task(t)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(_sweep_task, tasks, chunksize=1)


def write_csv_rows(fh, rows: Sequence[SweepResult], header: bool = True) -> None:
    if header:
        fh.write(CSV_HEADER + "\n")
    for row in rows:
        fh.write(row.csv_row() + "\n")


def run_sweep(cfg: ExperimentConfig, csv_path=None, workers: Optional[int] = None,
              progress=None) -> List[SweepResult]:
    """Average every configured mode over the drops at each sweep power.

    Results stream to ``csv_path`` as each power point completes, so an
    interrupted sweep still leaves the finished rows on disk.
    """
    workers = cfg.workers if workers is None else workers
    rows: List[SweepResult] = []
    fh = open(csv_path, "w") if csv_path is not None else None
    if fh is not None:
        fh.write(CSV_HEADER + "\n")
        fh.flush()
    try:
        for p_dbm in cfg.sweep_dbm:
            t0 = time.perf_counter()
            per_mode: Dict[str, List[DropRecord]] = {m: [] for m in cfg.modes}
            tasks = [(cfg, p_dbm, d) for d in range(cfg.num_drops)]
            for _, _, recs in _run_tasks(cfg, tasks, workers):
                for mode, rec in recs.items():
                    per_mode[mode].append(rec)
                if progress is not None:
                    progress(p_dbm, len(per_mode[cfg.modes[0]]), cfg.num_drops)
            elapsed = time.perf_counter() - t0
            for mode in cfg.modes:
                recs = sorted(per_mode[mode], key=lambda r: r.drop_index)
                row = _aggregate(recs, cfg, elapsed)
                rows.append(row)
                if fh is not None:
                    fh.write(row.csv_row() + "\n")
                    fh.flush()
    except KeyboardInterrupt:
        pass  # partial rows already flushed
    finally:
        if fh is not None:
            fh.close()
    return rows


def run_user_sweep(cfg: ExperimentConfig, k_values: Sequence[int], p_max_dbm: float,
                   csv_path=None, workers: Optional[int] = None) -> List[SweepResult]:
    """Vary users-per-cell at a fixed power; shares the CSV schema (the
    varying column is K).  Drops at equal index share user prefixes and
    per-link fading across K values, so the comparison is paired."""
    rows: List[SweepResult] = []
    for k in k_values:
        kcfg = dataclasses.replace(cfg, network=dataclasses.replace(
            cfg.network, users_per_cell=int(k)), sweep_dbm=(p_max_dbm,))
        rows.extend(run_sweep(kcfg, csv_path=None, workers=workers))
    if csv_path is not None:
        with open(csv_path, "w") as fh:
            write_csv_rows(fh, rows)
    return rows


def gain_percent(rows: Sequence[SweepResult], mode_hi: str = "3d_cluster",
                 mode_lo: str = "2d_baseline") -> Dict[float, float]:
    """Per-power percentage efficiency gain of ``mode_hi`` over ``mode_lo``."""
    by_key = {(r.p_max_dbm, r.mode): r for r in rows}
    out = {}
    for (p, mode), row in by_key.items():
        if mode != mode_hi:
            continue
        lo = by_key.get((p, mode_lo))
        if lo is not None:
            out[p] = 100.0 * (row.mean_ee - lo.mean_ee) / lo.mean_ee
    return dict(sorted(out.items()))
