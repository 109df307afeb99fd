"""Stochastic dynamics of the injection-locked slave-laser network."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .ising import IsingProblem
from .readout import ReadoutConfig, decide, frame_from_state
from .schedules import PhysicsConfig, ScheduleSpec, coupling_at, pump_at


class NumericFault(FloatingPointError):
    def __init__(self, message: str, laser: int | None = None, t: float | None = None):
        super().__init__(message)
        self.laser = laser
        self.t = t


@dataclass
class LaserNetworkState:
    """Amplitudes ``a`` and phases ``phi`` have shape (M, 2): columns D, D-bar."""

    a: np.ndarray
    phi: np.ndarray
    n_c: np.ndarray
    t: float = 0.0

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def a_d(self):
        return self.a[:, 0]

    @property
    def a_dbar(self):
        return self.a[:, 1]

    @property
    def phi_d(self):
        return self.phi[:, 0]

    @property
    def phi_dbar(self):
        return self.phi[:, 1]

    @property
    def fields(self) -> np.ndarray:
        return self.a * np.exp(1j * self.phi)

    @property
    def photon_number(self) -> np.ndarray:
        return np.sum(self.a**2, axis=1)

    @classmethod
    def from_cartesian(cls, x, y, n_c, t: float) -> LaserNetworkState:
        return cls(a=np.hypot(x, y), phi=np.arctan2(y, x), n_c=n_c.copy(), t=t)

    def cartesian(self) -> tuple[np.ndarray, np.ndarray]:
        return self.a * np.cos(self.phi), self.a * np.sin(self.phi)

    def copy(self) -> LaserNetworkState:
        return LaserNetworkState(self.a.copy(), self.phi.copy(), self.n_c.copy(), self.t)

    @classmethod
    def initial(cls, m: int, cfg: PhysicsConfig, rng: np.random.Generator) -> LaserNetworkState:
        """Fields at the floor with random phases, carriers empty."""
        return cls(
            a=np.full((m, 2), cfg.amp_floor),
            phi=rng.uniform(0.0, 2 * np.pi, size=(m, 2)),
            n_c=np.zeros(m),
            t=0.0,
        )

    def check_finite(self) -> None:
        bad = ~(
            np.isfinite(self.a).all(axis=1)
            & np.isfinite(self.phi).all(axis=1)
            & np.isfinite(self.n_c)
        )
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise NumericFault(f"non-finite state in laser {i} at t={self.t:.4g}s", laser=i, t=self.t)


@dataclass
class StateDerivative:
    da: np.ndarray
    dphi: np.ndarray
    dn_c: np.ndarray


def gain_coefficient(n_c, cfg: PhysicsConfig):
    """Stimulated gain beta*N_C/tau_sp in 1/s."""
    return cfg.beta_sp * np.asarray(n_c) / cfg.tau_sp


def drift(
    state: LaserNetworkState,
    p: IsingProblem,
    sched: ScheduleSpec,
    cfg: PhysicsConfig,
    t: float | None = None,
) -> StateDerivative:
    """Noise-free time derivatives of amplitudes, phases and carriers."""
    state.check_finite()
    t = state.t if t is None else t
    w = cfg.omega_q
    xi = coupling_at(sched, t)
    gain = gain_coefficient(state.n_c, cfg)
    e = state.fields
    h = e[:, 0] - e[:, 1]
    i_idx, j_idx, jw = p.edge_arrays
    inj = np.zeros(p.m, dtype=complex)
    np.add.at(inj, i_idx, jw * h[j_idx])
    np.add.at(inj, j_idx, jw * h[i_idx])
    # complex drive on each mode, excluding the linear gain/loss term
    drive = np.empty_like(e)
    drive[:, 0] = w * sched.zeta * sched.a_m - 0.5 * w * xi * inj
    drive[:, 1] = w * sched.zeta * sched.a_m + 0.5 * w * xi * inj
    proj = drive * np.exp(-1j * state.phi)
    da = -0.5 * (w - gain)[:, None] * state.a + proj.real
    dphi = proj.imag / np.maximum(state.a, cfg.amp_floor)
    dn = pump_at(sched, t) - state.n_c / cfg.tau_sp - gain * state.photon_number
    return StateDerivative(da=da, dphi=dphi, dn_c=dn)


def apply_spontaneous_noise(
    state: LaserNetworkState, cfg: PhysicsConfig, rng: np.random.Generator
) -> LaserNetworkState:
    """One step's worth of spontaneous-emission photons, added per mode."""
    x, y = state.cartesian()
    nc = state.n_c.copy()
    rate = cfg.noise_factor * cfg.beta_sp / cfg.tau_sp
    if rate > 0:
        _kernel.spontaneous_emission(x, y, nc, rate, cfg.dt, rng)
    _kernel.clamp(x, y, nc, cfg.amp_floor)
    return LaserNetworkState.from_cartesian(x, y, nc, state.t)


class _Integrator:
    """Holds the Cartesian working copy of a state between kernel calls."""

    def __init__(self, p: IsingProblem, sched: ScheduleSpec, cfg: PhysicsConfig, rng, state):
        self.p = p
        self.sched = sched
        self.cfg = cfg
        self.rng = rng
        self.x, self.y = state.cartesian()
        self.nc = np.ascontiguousarray(state.n_c, dtype=float).copy()
        self.step_index = int(round(state.t / cfg.dt))
        self.t0_offset = state.t - self.step_index * cfg.dt
        self._sp = np.array(sched.as_params())
        self._csr = p.csr

    @property
    def t(self) -> float:
        return self.step_index * self.cfg.dt + self.t0_offset

    def advance(self, nsteps: int) -> None:
        cfg = self.cfg
        indptr, indices, weights = self._csr
        _kernel.advance(
            self.x, self.y, self.nc, self.step_index, nsteps, indptr, indices, weights,
            self._sp, self.sched.zeta, self.sched.a_m, cfg.omega_q, cfg.tau_sp,
            cfg.beta_sp, cfg.dt, cfg.amp_floor, cfg.noise_factor, self.rng,
        )
        self.step_index += nsteps

    def state(self) -> LaserNetworkState:
        s = LaserNetworkState.from_cartesian(self.x, self.y, self.nc, self.t)
        s.check_finite()
        return s


def step(
    state: LaserNetworkState,
    p: IsingProblem,
    sched: ScheduleSpec,
    cfg: PhysicsConfig,
    rng: np.random.Generator,
) -> LaserNetworkState:
    """Advance by one dt: RK4 on the drift, then spontaneous emission, then clamps."""
    state.check_finite()
    integ = _Integrator(p, sched, cfg, rng, state)
    integ.advance(1)
    return integ.state()


def _ns(t: float) -> float:
    # sample times are multiples of dt; drop float noise from the unit change
    return round(float(t) * 1e9, 6)


@dataclass
class Trajectory:
    t: np.ndarray
    sigma_circ: np.ndarray
    sigma_diag: np.ndarray
    mean_nc: np.ndarray

    def write_csv(self, path) -> None:
        m = self.sigma_circ.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t_ns", *(f"sigma_{k + 1}" for k in range(m)), "mean_nc"])
            for t, row, nc in zip(self.t, self.sigma_circ, self.mean_nc):
                w.writerow([repr(_ns(t)), *(repr(float(v)) for v in row), repr(float(nc))])


@dataclass
class TrialResult:
    success_circular: bool
    success_diagonal: bool
    comp_time: float | None
    bifurcation_time: float | None
    final_spins_circular: np.ndarray
    final_spins_diagonal: np.ndarray
    seed: int
    t_end: float
    trajectory: Trajectory | None = field(default=None, repr=False)
    final_state: LaserNetworkState | None = field(default=None, repr=False)

    @property
    def success(self) -> bool:
        return self.success_circular or self.success_diagonal

    def to_dict(self) -> dict:
        return {
            "seed": int(self.seed),
            "success": self.success,
            "success_circular": self.success_circular,
            "success_diagonal": self.success_diagonal,
            "comp_time_ns": None if self.comp_time is None else _ns(self.comp_time),
            "bifurcation_time_ns": None if self.bifurcation_time is None else _ns(self.bifurcation_time),
            "t_end_ns": _ns(self.t_end),
            "final_spins_circular": [float(v) for v in self.final_spins_circular],
            "final_spins_diagonal": [float(v) for v in self.final_spins_diagonal],
        }


def run_trial(
    p: IsingProblem,
    sched: ScheduleSpec,
    cfg: PhysicsConfig,
    readout_cfg: ReadoutConfig,
    seed: int,
    t_end: float,
    *,
    record_trajectory: bool = True,
    initial_state: LaserNetworkState | None = None,
) -> TrialResult:
    """Integrate one trial from t=0 to ``t_end`` and read it out.

    Spins are sampled every ``readout_cfg.sample_interval``.  ``comp_time`` is
    the first sample at which either basis shows the target (or its flip)
    with every |sigma| at or above threshold; success is judged on the final
    sample in both bases.
    """
    if t_end < sched.t_f:
        raise ValueError(f"t_end ({t_end}) must be >= t_f ({sched.t_f})")
    rng = np.random.default_rng(seed)
    state = initial_state.copy() if initial_state is not None else LaserNetworkState.initial(p.m, cfg, rng)
    if state.m != p.m:
        raise ValueError("initial state size does not match problem")
    integ = _Integrator(p, sched, cfg, rng, state)

    chunk = max(1, int(round(readout_cfg.sample_interval / cfg.dt)))
    total = int(round(t_end / cfg.dt)) - integ.step_index
    thr = readout_cfg.sigma_threshold

    ts, sc_rows, sd_rows, nc_rows = [], [], [], []
    comp_time = None
    bif_time = None
    done = 0
    frame = decision = None
    while done < total:
        n = min(chunk, total - done)
        integ.advance(n)
        done += n
        cur = integ.state()
        frame = frame_from_state(cur)
        decision = decide(frame, p, readout_cfg)
        if comp_time is None and decision.success:
            comp_time = cur.t
        if bif_time is None:
            strength = np.maximum(np.abs(frame.sigma_circ), np.abs(frame.sigma_diag))
            if strength.mean() >= thr:
                bif_time = cur.t
        if record_trajectory:
            ts.append(cur.t)
            sc_rows.append(frame.sigma_circ)
            sd_rows.append(frame.sigma_diag)
            nc_rows.append(cur.n_c.mean())

    if frame is None:
        cur = integ.state()
        frame = frame_from_state(cur)
        decision = decide(frame, p, readout_cfg)

    traj = None
    if record_trajectory:
        traj = Trajectory(
            t=np.array(ts),
            sigma_circ=np.array(sc_rows).reshape(len(ts), p.m),
            sigma_diag=np.array(sd_rows).reshape(len(ts), p.m),
            mean_nc=np.array(nc_rows),
        )
    return TrialResult(
        success_circular=decision.success_circ,
        success_diagonal=decision.success_diag,
        comp_time=comp_time,
        bifurcation_time=bif_time,
        final_spins_circular=frame.sigma_circ,
        final_spins_diagonal=frame.sigma_diag,
        seed=int(seed),
        t_end=t_end,
        trajectory=traj,
        final_state=cur,
    )
