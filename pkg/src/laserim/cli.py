"""Command-line entry point: ``sim run | sweep | scaling | oracle``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

import numpy as np

from .bench import load_sweep, run_size_scaling, run_sweep, target_for, trial_seed
from .config import ConfigError, RunConfig, build_problem, load_config
from .dynamics import NumericFault, run_trial
from .ising import build_cubic_problem, flip_one_coupling, random_target
from .spectrum import DEFAULT_CAP, CapacityError, enumerate_spectrum

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CAPACITY = 4


def _config(path) -> RunConfig:
    return load_config(path) if path else RunConfig()


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def cmd_run(args) -> int:
    cfg = _config(args.config)
    # --seed plays the role of the master seed for target 0, trial 0
    target, flip = target_for(cfg, args.seed, 0)
    p = build_problem(cfg, target, flip)
    seed = trial_seed(args.seed, cfg.problem.m, 0, 0)
    res = run_trial(
        p, cfg.schedule_spec(), cfg.physics, cfg.readout, seed, cfg.t_end(),
        record_trajectory=args.traj is not None,
    )
    if args.traj:
        res.trajectory.write_csv(args.traj)
    out = {
        "config": cfg.to_dict(),
        "master_seed": args.seed,
        "target": [int(v) for v in p.target_spins],
        "flip_edge": flip,
        "result": res.to_dict(),
    }
    text = json.dumps(out, indent=1, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args.config)
    spec = load_sweep(args.sweep, cfg)
    if args.master_seed is not None:
        spec = replace(spec, master_seed=args.master_seed)
    agg = run_sweep(spec, workers=args.workers)
    agg.write(args.out, args.json)
    print(json.dumps(cfg.to_dict(), sort_keys=True), file=sys.stderr)
    sys.stdout.write(agg.to_csv())
    return 0


def cmd_scaling(args) -> int:
    cfg = _config(args.config)
    agg = run_size_scaling(
        args.sizes,
        args.schemes,
        cfg,
        targets=args.targets,
        trials_per_target=args.trials,
        master_seed=args.master_seed or 0,
        include_flip=args.flip,
        workers=args.workers,
    )
    agg.write(args.out, args.json)
    print(json.dumps(cfg.to_dict(), sort_keys=True), file=sys.stderr)
    sys.stdout.write(agg.to_csv())
    return 0


def cmd_oracle(args) -> int:
    if args.m < 4 or args.m % 2:
        raise ConfigError("m", f"must be even and >= 4, got {args.m}")
    if args.target:
        target = [int(v) for v in _str_list(args.target)]
    else:
        target = random_target(args.m, np.random.default_rng(args.seed))
    p = build_cubic_problem(args.m, target)
    if args.flip_edge is not None:
        if not 0 <= args.flip_edge < p.n_edges:
            raise ConfigError("flip_edge", f"edge index out of range [0, {p.n_edges})")
        p = flip_one_coupling(p, args.flip_edge)
    stats = enumerate_spectrum(p, cap=args.cap, force=args.force)
    out = {"problem": p.to_dict(), "flip_edge": args.flip_edge, "spectrum": stats.to_dict()}
    print(json.dumps(out, indent=1))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sim", description="Polarization-bistable laser network Ising simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="single trial")
    r.add_argument("--config", help="JSON run configuration (defaults if omitted)")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--traj", help="write sigma trajectory CSV here")
    r.add_argument("--out", help="write result JSON here")
    r.set_defaults(func=cmd_run)

    def _bench_opts(q):
        q.add_argument("--config")
        q.add_argument("--out", required=True, help="results CSV")
        q.add_argument("--json", help="also write JSON with per-trial detail")
        q.add_argument("--workers", type=int, default=1)
        q.add_argument("--master-seed", type=int, default=None)

    s = sub.add_parser("sweep", help="parameter sweep")
    s.add_argument("--sweep", required=True, help="sweep JSON: variable, values, trials_per_point, ...")
    _bench_opts(s)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("scaling", help="success and net time vs problem size")
    c.add_argument("--sizes", type=_int_list, required=True)
    c.add_argument("--schemes", type=_str_list, default=["gp", "gc", "abrupt"])
    c.add_argument("--targets", type=int, default=5)
    c.add_argument("--trials", type=int, default=10, help="trials per target")
    c.add_argument("--flip", action="store_true", help="add GC rows with one random flipped coupling")
    _bench_opts(c)
    c.set_defaults(func=cmd_scaling)

    o = sub.add_parser("oracle", help="exact spectrum by enumeration")
    o.add_argument("--m", type=int, required=True)
    o.add_argument("--seed", type=int, default=0, help="seed for the random target")
    o.add_argument("--target", help="comma-separated +-1 target (overrides --seed)")
    o.add_argument("--flip-edge", type=int, default=None)
    o.add_argument("--cap", type=int, default=DEFAULT_CAP)
    o.add_argument("--force", action="store_true")
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFault as exc:
        print(f"numeric fault: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
