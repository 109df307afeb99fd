"""Run-configuration loading and validation.

JSON layout (every section and key optional)::

    {"physics":  {"omega_q", "tau_sp_ns", "beta_sp", "dt_ps", "amp_floor", "noise_factor"},
     "schedule": {"scheme", "t_mid_ns", "t_p_ns", "pump_ratio_mid",
                  "pump_final_over_threshold", "alpha_ratio_mid", "alpha_final",
                  "zeta_over_alpha", "zeta", "a_m"},
     "readout":  {"sigma_threshold", "sample_interval_ns"},
     "problem":  {"m", "target", "flip_edge"},
     "run":      {"settle_fraction", "t_end_ns"}}
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .ising import InvalidProblemError, IsingProblem, as_spins, build_cubic_problem, cubic_graph_edges
from .readout import ReadoutConfig
from .schedules import DEFAULT_A_M, PhysicsConfig, Scheme, ScheduleSpec, make_schedule


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


# JSON key -> (PhysicsConfig attribute, scale to SI)
_PHYSICS_KEYS = {
    "omega_q": ("omega_q", 1.0),
    "tau_sp_ns": ("tau_sp", 1e-9),
    "beta_sp": ("beta_sp", 1.0),
    "dt_ps": ("dt", 1e-12),
    "amp_floor": ("amp_floor", 1.0),
    "noise_factor": ("noise_factor", 1.0),
}
_READOUT_KEYS = {
    "sigma_threshold": ("sigma_threshold", 1.0),
    "sample_interval_ns": ("sample_interval", 1e-9),
}


@dataclass(frozen=True)
class ScheduleConfig:
    scheme: str = "gp"
    t_mid_ns: float = 10.0
    t_p_ns: float = 1000.0
    pump_ratio_mid: float = 0.5
    pump_final_over_threshold: float = 3.0
    alpha_ratio_mid: float = 0.6
    alpha_final: float = 0.02
    zeta_over_alpha: float = 1.0
    zeta: float | None = None
    a_m: float = DEFAULT_A_M

    def build(self, physics: PhysicsConfig) -> ScheduleSpec:
        return make_schedule(
            self.scheme,
            physics,
            t_p=self.t_p_ns * 1e-9,
            t_mid=self.t_mid_ns * 1e-9,
            pump_over_threshold=self.pump_final_over_threshold,
            pump_ratio_mid=self.pump_ratio_mid,
            alpha_final=self.alpha_final,
            alpha_ratio_mid=self.alpha_ratio_mid,
            zeta=self.zeta,
            zeta_over_alpha=self.zeta_over_alpha,
            a_m=self.a_m,
        )

    @property
    def effective_zeta(self) -> float:
        return self.zeta_over_alpha * self.alpha_final if self.zeta is None else self.zeta


@dataclass(frozen=True)
class ProblemConfig:
    m: int = 8
    target: tuple[int, ...] | None = None
    # None, an edge index, or "random" (drawn per target from the seed)
    flip_edge: int | str | None = None


@dataclass(frozen=True)
class RunConfig:
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    readout: ReadoutConfig = field(default_factory=ReadoutConfig)
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    settle_fraction: float = 0.2
    t_end_ns: float | None = None

    def schedule_spec(self) -> ScheduleSpec:
        return self.schedule.build(self.physics)

    def t_end(self) -> float:
        spec = self.schedule_spec()
        if self.t_end_ns is not None:
            return self.t_end_ns * 1e-9
        return spec.t_f + self.settle_fraction * spec.t_p

    def with_changes(self, **sections) -> RunConfig:
        """Replace fields inside sections, e.g. ``schedule={"alpha_final": 0.01}``."""
        kwargs = {}
        for name, changes in sections.items():
            if isinstance(changes, dict):
                kwargs[name] = replace(getattr(self, name), **changes)
            else:
                kwargs[name] = changes
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        phys = {k: getattr(self.physics, attr) / scale for k, (attr, scale) in _PHYSICS_KEYS.items()}
        read = {k: getattr(self.readout, attr) / scale for k, (attr, scale) in _READOUT_KEYS.items()}
        sched = asdict(self.schedule)
        sched["zeta"] = self.schedule.effective_zeta
        prob = asdict(self.problem)
        if prob["target"] is not None:
            prob["target"] = list(prob["target"])
        return {
            "physics": phys,
            "schedule": sched,
            "readout": read,
            "problem": prob,
            "run": {"settle_fraction": self.settle_fraction, "t_end_ns": self.t_end_ns},
        }


def _number(path: str, value, *, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if integer and not float(value).is_integer():
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return int(value) if integer else float(value)


def _section(d: dict, name: str) -> dict:
    sec = d.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(name, "expected an object")
    return sec


def _check_keys(path: str, sec: dict, allowed) -> None:
    for k in sec:
        if k not in allowed:
            raise ConfigError(f"{path}.{k}" if path else k, "unknown key")


def _scaled_section(name, sec, keys, cls):
    _check_keys(name, sec, keys)
    kwargs = {}
    for k, v in sec.items():
        attr, scale = keys[k]
        kwargs[attr] = _number(f"{name}.{k}", v) * scale
    try:
        return cls(**kwargs)
    except ValueError as exc:
        # attribute the failure to the offending key when we can tell
        msg = str(exc)
        if "omega_q*dt" in msg:
            culprit = "dt_ps"
        else:
            culprit = next((k for k, (attr, _) in keys.items() if msg.startswith(attr + " ")), None)
        raise ConfigError(f"{name}.{culprit}" if culprit else name, msg) from None


def _schedule_section(sec: dict) -> ScheduleConfig:
    fields = ScheduleConfig.__dataclass_fields__
    _check_keys("schedule", sec, fields)
    kwargs = {}
    for k, v in sec.items():
        path = f"schedule.{k}"
        if k == "scheme":
            try:
                kwargs[k] = Scheme.parse(v).label
            except ValueError as exc:
                raise ConfigError(path, str(exc)) from None
        elif k == "zeta" and v is None:
            kwargs[k] = None
        else:
            kwargs[k] = _number(path, v)
            if kwargs[k] < 0:
                raise ConfigError(path, "must be >= 0")
    for k in ("pump_ratio_mid", "alpha_ratio_mid"):
        if k in kwargs and kwargs[k] > 1:
            raise ConfigError(f"schedule.{k}", "ratio must lie in [0, 1]")
    if "t_mid_ns" in kwargs and kwargs["t_mid_ns"] <= 0:
        raise ConfigError("schedule.t_mid_ns", "must be > 0")
    return ScheduleConfig(**kwargs)


def _problem_section(sec: dict) -> ProblemConfig:
    _check_keys("problem", sec, ProblemConfig.__dataclass_fields__)
    m = _number("problem.m", sec.get("m", ProblemConfig.m), integer=True)
    try:
        cubic_graph_edges(m)
    except InvalidProblemError as exc:
        raise ConfigError("problem.m", str(exc)) from None
    target = sec.get("target")
    if target is not None:
        try:
            target = tuple(int(v) for v in as_spins(target, m))
        except ValueError as exc:
            raise ConfigError("problem.target", str(exc)) from None
    flip = sec.get("flip_edge")
    if flip is not None and flip != "random":
        flip = _number("problem.flip_edge", flip, integer=True)
        if not 0 <= flip < 3 * m // 2:
            raise ConfigError("problem.flip_edge", f"edge index out of range [0, {3 * m // 2})")
    return ProblemConfig(m=m, target=target, flip_edge=flip)


def config_from_dict(d: dict) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("", "top level must be a JSON object")
    _check_keys("", d, ("physics", "schedule", "readout", "problem", "run"))
    physics = _scaled_section("physics", _section(d, "physics"), _PHYSICS_KEYS, PhysicsConfig)
    readout = _scaled_section("readout", _section(d, "readout"), _READOUT_KEYS, ReadoutConfig)
    schedule = _schedule_section(_section(d, "schedule"))
    problem = _problem_section(_section(d, "problem"))
    run = _section(d, "run")
    _check_keys("run", run, ("settle_fraction", "t_end_ns"))
    settle = _number("run.settle_fraction", run.get("settle_fraction", 0.2))
    if settle < 0:
        raise ConfigError("run.settle_fraction", "must be >= 0")
    t_end_ns = run.get("t_end_ns")
    cfg = RunConfig(
        physics=physics,
        schedule=schedule,
        readout=readout,
        problem=problem,
        settle_fraction=settle,
        t_end_ns=None if t_end_ns is None else _number("run.t_end_ns", t_end_ns),
    )
    try:
        spec = cfg.schedule_spec()
    except ValueError as exc:
        raise ConfigError("schedule", str(exc)) from None
    if cfg.t_end() < spec.t_f:
        raise ConfigError("run.t_end_ns", "must not precede t_f")
    return cfg


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(data)


def build_problem(cfg: RunConfig, target, flip_edge: int | None = None) -> IsingProblem:
    from .ising import flip_one_coupling

    p = build_cubic_problem(cfg.problem.m, target)
    return p if flip_edge is None else flip_one_coupling(p, flip_edge)
