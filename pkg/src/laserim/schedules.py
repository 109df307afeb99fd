"""Pump, mutual-coupling and master-injection schedules.

Three schemes are supported:

* GP (gradual pumping): pump ramps 0 -> p_mid over [0, t_mid], then
  p_mid -> p_f over [t_mid, t_f]; coupling fixed at alpha_f.
* GC (gradual coupling): same two-segment shape applied to the coupling;
  pump fixed at p_f.
* ABRUPT: pump fixed at p_f, coupling stepped 0 -> alpha_f at t_mid.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numba
from scipy.constants import e as ELEMENTARY_CHARGE

DEFAULT_T_MID = 10e-9
# Master amplitude in sqrt-photon units; see README "Master injection scale".
DEFAULT_A_M = 2000.0
STABILITY_GUARD = 0.2


class Scheme(enum.IntEnum):
    GP = 0
    GC = 1
    ABRUPT = 2

    @classmethod
    def parse(cls, value) -> Scheme:
        if isinstance(value, Scheme):
            return value
        try:
            return cls[str(value).upper()]
        except KeyError:
            raise ValueError(f"unknown scheme {value!r}; expected gp, gc or abrupt") from None

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class PhysicsConfig:
    omega_q: float = 1e11  # cavity photon decay rate, 1/s
    tau_sp: float = 1e-9  # spontaneous lifetime, s
    beta_sp: float = 1e-6  # spontaneous emission coupling efficiency
    dt: float = 1e-12  # integration step, s
    amp_floor: float = 1e-3  # sqrt-photon units
    # multiplies the per-mode Poisson emission rate; 0 disables noise
    noise_factor: float = 1.0

    def __post_init__(self):
        for name in ("omega_q", "tau_sp", "beta_sp", "dt", "amp_floor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if self.noise_factor < 0:
            raise ValueError("noise_factor must be >= 0")
        if self.omega_q * self.dt > STABILITY_GUARD:
            raise ValueError(
                f"omega_q*dt = {self.omega_q * self.dt:g} exceeds stability guard {STABILITY_GUARD}"
            )

    def without_noise(self) -> PhysicsConfig:
        return replace(self, noise_factor=0.0)


@dataclass(frozen=True)
class ScheduleSpec:
    scheme: Scheme
    t_f: float
    p_mid: float
    p_f: float
    alpha_mid: float
    alpha_f: float
    zeta: float
    t_mid: float = DEFAULT_T_MID
    a_m: float = DEFAULT_A_M

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if not self.t_mid > 0:
            raise ValueError("t_mid must be > 0")
        # t_f == t_mid is the instantaneous-ramp limit
        if self.t_f < self.t_mid:
            raise ValueError(f"t_f ({self.t_f}) must not precede t_mid ({self.t_mid})")
        for name in ("p_mid", "p_f", "alpha_mid", "alpha_f", "zeta", "a_m"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.p_mid > self.p_f:
            raise ValueError("p_mid must not exceed p_f")
        if self.alpha_mid > self.alpha_f:
            raise ValueError("alpha_mid must not exceed alpha_f")

    @property
    def t_p(self) -> float:
        return self.t_f - self.t_mid

    def as_params(self) -> tuple[float, ...]:
        """Flat tuple consumed by the compiled integrator."""
        return (
            float(self.scheme),
            self.t_mid,
            self.t_f,
            self.p_mid,
            self.p_f,
            self.alpha_mid,
            self.alpha_f,
        )


def make_schedule(
    scheme,
    cfg: PhysicsConfig | None = None,
    *,
    t_p: float = 1e-6,
    t_mid: float = DEFAULT_T_MID,
    pump_over_threshold: float = 3.0,
    pump_ratio_mid: float = 0.5,
    alpha_final: float = 0.02,
    alpha_ratio_mid: float = 0.6,
    zeta: float | None = None,
    zeta_over_alpha: float = 1.0,
    a_m: float = DEFAULT_A_M,
) -> ScheduleSpec:
    """Build a schedule from the dimensionless knobs used in run configs.

    The intermediate ratios only apply to the ramped quantity of the chosen
    scheme.  ``zeta`` defaults to ``zeta_over_alpha * alpha_final``.
    """
    cfg = cfg or PhysicsConfig()
    scheme = Scheme.parse(scheme)
    p_f = pump_over_threshold * threshold_pump(cfg)
    p_mid = pump_ratio_mid * p_f if scheme is Scheme.GP else p_f
    a_mid = alpha_ratio_mid * alpha_final if scheme is Scheme.GC else alpha_final
    if scheme is Scheme.ABRUPT:
        a_mid = 0.0
    if zeta is None:
        zeta = zeta_over_alpha * alpha_final
    return ScheduleSpec(
        scheme=scheme,
        t_mid=t_mid,
        t_f=t_mid + t_p,
        p_mid=p_mid,
        p_f=p_f,
        alpha_mid=a_mid,
        alpha_f=alpha_final,
        zeta=zeta,
        a_m=a_m,
    )


@numba.njit(cache=True)
def _ramp(t, t_mid, t_f, v_mid, v_f):
    if t <= 0.0:
        return 0.0
    if t < t_mid:
        return v_mid * (t / t_mid)
    if t < t_f:
        return v_mid + (v_f - v_mid) * ((t - t_mid) / (t_f - t_mid))
    return v_f


@numba.njit(cache=True)
def profile(t, scheme, t_mid, t_f, p_mid, p_f, a_mid, a_f):
    """(pump, coupling) at time t; scheme is the integer value of Scheme."""
    if scheme == 0:
        return _ramp(t, t_mid, t_f, p_mid, p_f), a_f
    if scheme == 1:
        return p_f, _ramp(t, t_mid, t_f, a_mid, a_f)
    return p_f, a_f if t >= t_mid else 0.0


def pump_at(spec: ScheduleSpec, t: float) -> float:
    return profile(t, *spec.as_params())[0]


def coupling_at(spec: ScheduleSpec, t: float) -> float:
    return profile(t, *spec.as_params())[1]


def threshold_pump(cfg: PhysicsConfig) -> float:
    """Pump rate at which the clamped gain beta*P*tau/tau equals omega/Q."""
    return cfg.omega_q / cfg.beta_sp


def threshold_current(cfg: PhysicsConfig) -> float:
    return ELEMENTARY_CHARGE * threshold_pump(cfg)
