"""Trial orchestration, parameter sweeps and result emission."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, build_problem
from .dynamics import NumericFault, run_trial
from .ising import random_target
from .schedules import Scheme

log = logging.getLogger(__name__)

RESULT_COLUMNS = (
    "scheme", "m", "alpha_f", "t_p_ns", "pump_over_th", "n_trials", "n_success",
    "success_prob", "worst_time_ns", "net_time_ns", "master_seed",
)
SWEEP_VARIABLES = ("alpha", "ramp_rate", "pump_final", "problem_size")


def _seed(*words: int) -> int:
    return int(np.random.SeedSequence([int(w) for w in words]).generate_state(1, np.uint64)[0])


def trial_seed(master_seed: int, m: int, target_index: int, trial_index: int) -> int:
    """64-bit seed for one trial; independent of execution order and sweep point."""
    return _seed(master_seed, 1, m, target_index, trial_index)


def target_for(cfg: RunConfig, master_seed: int, target_index: int) -> tuple[np.ndarray, int | None]:
    """Target spins and flipped-edge index for one problem instance."""
    rng = np.random.default_rng(_seed(master_seed, 0, cfg.problem.m, target_index))
    m = cfg.problem.m
    target = np.array(cfg.problem.target) if cfg.problem.target is not None else random_target(m, rng)
    flip = cfg.problem.flip_edge
    if flip == "random":
        flip = int(rng.integers(3 * m // 2))
    return target, flip


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    trials_per_point: int
    targets_per_point: int
    base: RunConfig
    master_seed: int

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError("sweep.variable", f"expected one of {SWEEP_VARIABLES}")
        if len(self.values) == 0:
            raise ConfigError("sweep.values", "must be non-empty")
        if self.trials_per_point < 1:
            raise ConfigError("sweep.trials_per_point", "must be >= 1")
        if self.targets_per_point < 1:
            raise ConfigError("sweep.targets_per_point", "must be >= 1")

    def point_config(self, value) -> RunConfig:
        """Base config with the swept variable set to ``value``.

        ``ramp_rate`` values are process times t_P in ns (the ramp rate of
        the swept quantity is its rise divided by t_P).
        """
        b = self.base
        if self.variable == "alpha":
            return b.with_changes(schedule={"alpha_final": float(value)})
        if self.variable == "ramp_rate":
            return b.with_changes(schedule={"t_p_ns": float(value)})
        if self.variable == "pump_final":
            return b.with_changes(schedule={"pump_final_over_threshold": float(value)})
        m = int(value)
        if m < 4 or m % 2:
            raise ConfigError("sweep.values", f"problem sizes must be even and >= 4, got {m}")
        return b.with_changes(problem={"m": m})

    def configs(self) -> list[RunConfig]:
        return [self.point_config(v) for v in self.values]


def load_sweep(path, base: RunConfig) -> SweepSpec:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path}: JSON parse error at line {exc.lineno}: {exc.msg}") from None
    for key in ("variable", "values"):
        if key not in d:
            raise ConfigError(f"sweep.{key}", "missing")
    return SweepSpec(
        variable=d["variable"],
        values=tuple(d["values"]),
        trials_per_point=int(d.get("trials_per_point", 1)),
        targets_per_point=int(d.get("targets_per_point", 1)),
        base=base,
        master_seed=int(d.get("master_seed", 0)),
    )


@dataclass
class PointResult:
    config: RunConfig
    label: str
    master_seed: int
    trials: list[dict] = field(default_factory=list)

    @property
    def n_trials(self) -> int:
        return len(self.trials)

    @property
    def n_success(self) -> int:
        return sum(1 for r in self.trials if r["success"])

    @property
    def success_probability(self) -> float:
        return self.n_success / self.n_trials if self.trials else 0.0

    @property
    def worst_comp_time(self) -> float | None:
        times = [r["comp_time_ns"] for r in self.trials if r["success"] and r["comp_time_ns"] is not None]
        return max(times) * 1e-9 if times else None

    @property
    def net_comp_time(self) -> float:
        """Worst time among successes divided by success probability; inf if none."""
        worst = self.worst_comp_time
        if worst is None or self.success_probability == 0:
            return math.inf
        return worst / self.success_probability

    def mean_comp_time(self) -> float | None:
        times = [r["comp_time_ns"] for r in self.trials if r["success"] and r["comp_time_ns"] is not None]
        return float(np.mean(times)) * 1e-9 if times else None

    def row(self) -> dict:
        s = self.config.schedule
        worst = self.worst_comp_time
        net = self.net_comp_time
        return {
            "scheme": self.label,
            "m": self.config.problem.m,
            "alpha_f": s.alpha_final,
            "t_p_ns": s.t_p_ns,
            "pump_over_th": s.pump_final_over_threshold,
            "n_trials": self.n_trials,
            "n_success": self.n_success,
            "success_prob": self.success_probability,
            "worst_time_ns": None if worst is None else worst * 1e9,
            "net_time_ns": None if math.isinf(net) else net * 1e9,
            "master_seed": self.master_seed,
        }

    def to_dict(self) -> dict:
        return {**self.row(), "config": self.config.to_dict(), "trials": self.trials}


@dataclass
class AggregateResult:
    points: list[PointResult]
    extra_columns: dict[str, list] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = list(RESULT_COLUMNS) + list(self.extra_columns)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for k, pt in enumerate(self.points):
            row = pt.row()
            vals = [_fmt(row[c]) for c in RESULT_COLUMNS]
            vals += [_fmt(self.extra_columns[c][k]) for c in self.extra_columns]
            w.writerow(vals)
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {"points": [p.to_dict() for p in self.points]}
        if self.extra_columns:
            payload["extra_columns"] = self.extra_columns
        return json.dumps(payload, indent=1, sort_keys=True)

    def write(self, csv_path=None, json_path=None) -> None:
        if csv_path:
            Path(csv_path).write_text(self.to_csv())
        if json_path:
            Path(json_path).write_text(self.to_json())


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _execute(task: tuple) -> tuple[tuple, dict]:
    key, cfg, target, flip, seed = task
    p = build_problem(cfg, target, flip)
    spec = cfg.schedule_spec()
    try:
        res = run_trial(p, spec, cfg.physics, cfg.readout, seed, cfg.t_end(), record_trajectory=False)
        rec = res.to_dict()
    except NumericFault as exc:
        log.warning("trial %s failed: %s", key, exc)
        rec = {"seed": seed, "success": False, "comp_time_ns": None, "error": str(exc), "laser": exc.laser}
    rec["target_index"] = key[1]
    rec["trial_index"] = key[2]
    rec["flip_edge"] = flip
    return key, rec


def _run_tasks(tasks: list[tuple], workers: int) -> dict[tuple, dict]:
    if workers <= 1:
        return dict(_execute(t) for t in tasks)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return dict(pool.map(_execute, tasks, chunksize=1))


def run_points(
    configs: list[RunConfig],
    labels: list[str],
    *,
    trials_per_target: int,
    targets: int,
    master_seed: int,
    workers: int = 1,
) -> list[PointResult]:
    """Run every (point, target, trial) work item and merge by key order."""
    tasks = []
    for pi, cfg in enumerate(configs):
        for ti in range(targets):
            target, flip = target_for(cfg, master_seed, ti)
            for k in range(trials_per_target):
                seed = trial_seed(master_seed, cfg.problem.m, ti, k)
                tasks.append(((pi, ti, k), cfg, target, flip, seed))
    results = _run_tasks(tasks, workers)
    points = [PointResult(config=c, label=l, master_seed=master_seed) for c, l in zip(configs, labels)]
    for key in sorted(results):
        points[key[0]].trials.append(results[key])
    return points


def _label(cfg: RunConfig) -> str:
    name = Scheme.parse(cfg.schedule.scheme).label
    return f"{name}_flip" if cfg.problem.flip_edge is not None else name


def run_sweep(spec: SweepSpec, workers: int = 1) -> AggregateResult:
    configs = spec.configs()
    points = run_points(
        configs,
        [_label(c) for c in configs],
        trials_per_target=spec.trials_per_point,
        targets=spec.targets_per_point,
        master_seed=spec.master_seed,
        workers=workers,
    )
    return AggregateResult(points)


def run_size_scaling(
    sizes,
    schemes,
    base: RunConfig,
    *,
    targets: int = 5,
    trials_per_target: int = 10,
    master_seed: int = 0,
    include_flip: bool = False,
    workers: int = 1,
) -> AggregateResult:
    """Success and net time per (size, scheme); optional flipped-coupling GC rows.

    The flipped variant draws one random edge per target.  A ``brute_force_states``
    column carries 2^M for comparison.
    """
    configs, labels = [], []
    for m in sizes:
        if m < 4 or m % 2:
            raise ConfigError("sizes", f"problem sizes must be even and >= 4, got {m}")
        for sch in schemes:
            c = base.with_changes(
                schedule={"scheme": Scheme.parse(sch).label},
                problem={"m": int(m), "target": None, "flip_edge": None},
            )
            configs.append(c)
            labels.append(_label(c))
        if include_flip:
            c = base.with_changes(
                schedule={"scheme": "gc"},
                problem={"m": int(m), "target": None, "flip_edge": "random"},
            )
            configs.append(c)
            labels.append(_label(c))
    points = run_points(
        configs,
        labels,
        trials_per_target=trials_per_target,
        targets=targets,
        master_seed=master_seed,
        workers=workers,
    )
    return AggregateResult(points, {"brute_force_states": [2 ** p.config.problem.m for p in points]})
