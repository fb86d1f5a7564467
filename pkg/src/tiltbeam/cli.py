"""Command-line interface.

Subcommands::

    tiltbeam config --print-defaults [--preset desk|paper]
    tiltbeam run --config cfg.json --out results.csv [--workers N]
    tiltbeam run --config cfg.json --users-sweep 2,4 --p-max-dbm 46 --out k.csv
    tiltbeam drop --config cfg.json --index 0 --p-max-dbm 46 [--verbose]
    tiltbeam validate [--seed 7]

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 solver-diagnostic threshold exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import harness
from .harness import ConfigError, ExperimentConfig, default_config, load_config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tiltbeam")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a power sweep (or a user-count sweep)")
    p_run.add_argument("--config", help="JSON config file (defaults when omitted)")
    p_run.add_argument("--preset", default="desk", choices=("desk", "paper"))
    p_run.add_argument("--out", required=True, help="output CSV path")
    p_run.add_argument("--workers", type=int, default=None)
    p_run.add_argument("--users-sweep", default=None,
                       help="comma-separated users-per-cell values; switches to a "
                            "user-count sweep at --p-max-dbm")
    p_run.add_argument("--p-max-dbm", type=float, default=46.0)
    p_run.add_argument("--progress", action="store_true")

    p_drop = sub.add_parser("drop", help="solve one drop and print a summary")
    p_drop.add_argument("--config", help="JSON config file (defaults when omitted)")
    p_drop.add_argument("--preset", default="desk", choices=("desk", "paper"))
    p_drop.add_argument("--index", type=int, default=0)
    p_drop.add_argument("--p-max-dbm", type=float, default=None)
    p_drop.add_argument("--verbose", action="store_true",
                        help="also print the per-mode outer bisection traces")

    p_val = sub.add_parser("validate", help="run quick invariant and oracle checks")
    p_val.add_argument("--seed", type=int, default=7)

    p_cfg = sub.add_parser("config", help="print configuration JSON")
    p_cfg.add_argument("--print-defaults", action="store_true")
    p_cfg.add_argument("--preset", default="desk", choices=("desk", "paper"))
    return parser


def _load(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return default_config(args.preset)


def _cmd_run(args) -> int:
    cfg = _load(args)
    progress = None
    if args.progress:
        def progress(p, done, total):
            print(f"\r{p:g} dBm: {done}/{total} drops", end="", file=sys.stderr)
    if args.users_sweep:
        k_values = [int(k) for k in args.users_sweep.split(",")]
        rows = harness.run_user_sweep(cfg, k_values, args.p_max_dbm,
                                      csv_path=args.out, workers=args.workers)
    else:
        rows = harness.run_sweep(cfg, csv_path=args.out, workers=args.workers,
                                 progress=progress)
    if args.progress:
        print(file=sys.stderr)
    print(f"wrote {len(rows)} rows to {args.out}")
    # diagnostic gate: a sweep with too many non-converged inner solves is suspect
    total = sum(r.drops for r in rows)
    bad = sum(r.nonconverged for r in rows)
    if total and bad / total > cfg.diag_max_nonconverged_frac:
        print(f"warning: {bad}/{total} solves hit the sweep-count limit",
              file=sys.stderr)
        return 3
    return 0


def _cmd_drop(args) -> int:
    cfg = _load(args)
    records = harness.run_drop(cfg, args.index, p_max_dbm=args.p_max_dbm)
    nonconverged = 0
    for mode, rec in records.items():
        sol = rec.solution
        tilt = "-" if sol.tilt_deg is None else \
            "/".join(f"{t:.2f}" for t in np.asarray(sol.tilt_deg))
        print(f"{mode}: ee={sol.ee:.6g} sumrate={rec.sumrate_nats:.6g} nats "
              f"power={rec.power_used:.6g} tilt_deg={tilt} "
              f"outer_iters={rec.outer_iters} tilt_evals={rec.tilt_evals} "
              f"converged={rec.inner_converged}")
        nonconverged += 0 if rec.inner_converged else 1
    if args.verbose:
        layout, drop, channels = harness.build_drop_and_channels(cfg, args.index)
        from .dinkelbach import outer_solve
        for mode in cfg.modes:
            gains = harness._gains_for_mode(cfg, drop, layout, mode)
            outer_cfg = harness._outer_for_mode(cfg, mode)
            pm = cfg.power_model(args.p_max_dbm if args.p_max_dbm is not None
                                 else cfg.sweep_dbm[0])
            print(f"# outer trace {mode} (eta_min\teta_max\tF)")
            outer_solve(channels, gains, pm, cfg.weights(), outer_cfg,
                        trace=sys.stdout)
    return 3 if nonconverged else 0


def _cmd_validate(args) -> int:
    from .validate import run_validation
    ok = run_validation(seed=args.seed, out=sys.stdout)
    return 0 if ok else 1


def _cmd_config(args) -> int:
    cfg = default_config(args.preset)
    print(json.dumps(cfg.to_dict(), indent=2))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "drop": _cmd_drop,
                "validate": _cmd_validate, "config": _cmd_config}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
