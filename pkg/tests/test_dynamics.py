from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laserim import _kernel
from laserim.dynamics import (
    LaserNetworkState,
    NumericFault,
    apply_spontaneous_noise,
    drift,
    gain_coefficient,
    run_trial,
    step,
)
from laserim.ising import build_cubic_problem
from laserim.readout import ReadoutConfig, frame_from_state
from laserim.schedules import PhysicsConfig, make_schedule, profile

CFG = PhysicsConfig()
QUIET = CFG.without_noise()
P4 = build_cubic_problem(4, [1, -1, 1, 1])


def test_gain_coefficient_examples():
    assert gain_coefficient(1e8, CFG) == pytest.approx(1e11)
    assert gain_coefficient(0.0, CFG) == 0.0


def test_master_only_fixed_point():
    """alpha = 0 and no carriers: E* = 2 zeta A_M on every mode."""
    sched = make_schedule("gp", CFG, alpha_final=0.0, zeta=0.02, pump_over_threshold=1e-9)
    e_star = 2 * 0.02 * sched.a_m
    s = LaserNetworkState(a=np.full((4, 2), e_star), phi=np.zeros((4, 2)), n_c=np.zeros(4))
    d = drift(s, P4, sched, CFG, t=0.0)
    assert np.allclose(d.da, 0.0, atol=1e-6 * CFG.omega_q)
    assert np.allclose(d.dphi, 0.0)
    # half-amplitude is pulled back up at rate omega/Q/2 * (E* - a)
    s.a[:] = e_star / 2
    d = drift(s, P4, sched, CFG, t=0.0)
    assert np.allclose(d.da, 0.5 * CFG.omega_q * e_star / 2)


def test_symmetric_state_has_no_coupling_drive():
    sched = make_schedule("gc", CFG)
    s = LaserNetworkState(
        a=np.full((4, 2), 50.0), phi=np.full((4, 2), 0.3), n_c=np.full(4, 1e8), t=5e-7
    )
    d = drift(s, P4, sched, CFG)
    assert np.allclose(d.da[:, 0], d.da[:, 1])
    assert np.allclose(d.dphi[:, 0], d.dphi[:, 1])


def test_carrier_rate_example():
    sched = make_schedule("abrupt", CFG)
    s = LaserNetworkState(a=np.full((4, 2), 10.0), phi=np.zeros((4, 2)), n_c=np.full(4, 1e8))
    d = drift(s, P4, sched, CFG, t=1e-9)
    # P - N/tau - G * I = 3e17 - 1e17 - 1e11 * 200
    assert np.allclose(d.dn_c, 3e17 - 1e17 - 1e11 * 200)


def test_polar_drift_matches_compiled_rates():
    rng = np.random.default_rng(5)
    p = build_cubic_problem(8, rng.choice([-1, 1], 8))
    sched = make_schedule("gc", CFG)
    s = LaserNetworkState(
        a=rng.uniform(1, 100, (8, 2)), phi=rng.uniform(0, 6.3, (8, 2)), n_c=rng.uniform(0, 2e8, 8), t=3e-7
    )
    d = drift(s, p, sched, CFG)
    x, y = s.cartesian()
    dx, dy, dn = np.empty_like(x), np.empty_like(y), np.empty(8)
    pump, alpha = profile(s.t, *sched.as_params())
    indptr, idx, w = p.csr
    _kernel.field_rates(
        x, y, s.n_c, indptr, idx, w, pump, alpha, sched.zeta, sched.a_m,
        CFG.omega_q, CFG.tau_sp, CFG.beta_sp, dx, dy, dn,
    )
    np.testing.assert_allclose((x * dx + y * dy) / s.a, d.da, rtol=1e-9, atol=1e-3)
    np.testing.assert_allclose((x * dy - y * dx) / s.a**2, d.dphi, rtol=1e-9, atol=1e-3)
    np.testing.assert_allclose(dn, d.dn_c, rtol=1e-12)


def test_check_finite_reports_laser():
    s = LaserNetworkState(a=np.ones((4, 2)), phi=np.zeros((4, 2)), n_c=np.zeros(4))
    s.a[2, 1] = np.nan
    with pytest.raises(NumericFault) as exc:
        drift(s, P4, make_schedule("gp"), CFG)
    assert exc.value.laser == 2


def test_noise_zero_when_no_carriers():
    rng = np.random.default_rng(0)
    s = LaserNetworkState(a=np.full((4, 2), 3.0), phi=np.full((4, 2), 0.2), n_c=np.zeros(4))
    out = apply_spontaneous_noise(s, CFG, rng)
    np.testing.assert_allclose(out.a, s.a)


def test_noise_ensemble_rate():
    rng = np.random.default_rng(1)
    m = 20000
    nc = np.full(m, 2e8)
    lam = CFG.beta_sp / CFG.tau_sp * 2e8 * CFG.dt
    tot = 0.0
    for _ in range(10):
        x, y = np.zeros((m, 2)), np.zeros((m, 2))
        _kernel.spontaneous_emission(x, y, nc, CFG.beta_sp / CFG.tau_sp, CFG.dt, rng)
        tot += np.mean(x**2 + y**2)
    assert tot / 10 == pytest.approx(lam, rel=0.05)


def test_carrier_relaxation_matches_closed_form():
    sched = make_schedule("gc", CFG, t_mid=2e-9, t_p=3e-9, pump_over_threshold=0.5, alpha_final=0.0, zeta=0.0)
    s = LaserNetworkState.initial(4, QUIET, np.random.default_rng(0))
    res = run_trial(P4, sched, QUIET, ReadoutConfig(), 0, 5e-9, initial_state=s, record_trajectory=False)
    expect = 0.5e17 * 1e-9 * (1 - np.exp(-5.0))
    np.testing.assert_allclose(res.final_state.n_c, expect, rtol=1e-6)


def test_step_and_run_trial_agree():
    sched = make_schedule("gc", CFG, t_p=1e-9)
    s0 = LaserNetworkState.initial(4, CFG, np.random.default_rng(9))
    rng = np.random.default_rng(2)
    s = s0
    for _ in range(50):
        s = step(s, P4, sched, CFG, rng)
    assert s.t == pytest.approx(50e-12)
    assert np.all(np.isfinite(s.a))


def test_run_trial_deterministic():
    sched = make_schedule("gp", CFG, t_p=20e-9)
    a = run_trial(P4, sched, CFG, ReadoutConfig(), 42, 40e-9)
    b = run_trial(P4, sched, CFG, ReadoutConfig(), 42, 40e-9)
    c = run_trial(P4, sched, CFG, ReadoutConfig(), 43, 40e-9)
    np.testing.assert_array_equal(a.trajectory.sigma_circ, b.trajectory.sigma_circ)
    assert a.to_dict() == b.to_dict()
    assert not np.array_equal(a.trajectory.sigma_circ, c.trajectory.sigma_circ)
    assert len(a.trajectory.t) == 40


def test_symmetric_noiseless_run_keeps_zero_spin():
    sched = make_schedule("gp", QUIET, t_p=20e-9)
    s0 = LaserNetworkState(a=np.full((8, 2), 1e-3), phi=np.zeros((8, 2)), n_c=np.zeros(8))
    p = build_cubic_problem(8, [1, -1, 1, 1, -1, 1, -1, -1])
    res = run_trial(p, sched, QUIET, ReadoutConfig(), 0, 40e-9, initial_state=s0)
    assert np.max(np.abs(res.trajectory.sigma_circ)) < 1e-12
    assert np.max(np.abs(res.trajectory.sigma_diag)) < 1e-12
    assert not res.success


def test_gc_instant_ramp_equals_abrupt():
    gc = make_schedule("gc", CFG, t_p=0.0, alpha_ratio_mid=0.0)
    ab = make_schedule("abrupt", CFG, t_p=0.0)
    a = run_trial(P4, gc, CFG, ReadoutConfig(), 7, 30e-9)
    b = run_trial(P4, ab, CFG, ReadoutConfig(), 7, 30e-9)
    np.testing.assert_array_equal(a.final_state.a, b.final_state.a)
    np.testing.assert_array_equal(a.final_state.n_c, b.final_state.n_c)


def _final(dt, t_end=2e-9):
    # short window from a lasing, unlocked state; long noiseless runs amplify
    # round-off through the coupling instability
    cfg = replace(QUIET, dt=dt)
    sched = make_schedule("gc", cfg, t_mid=1e-9, t_p=1e-9)
    s0 = LaserNetworkState(
        a=np.array([[40.0, 60.0], [55.0, 20.0], [30.0, 35.0], [70.0, 50.0]]),
        phi=np.array([[0.1, 1.2], [2.0, 0.4], [0.3, 3.0], [1.5, 0.9]]),
        n_c=np.array([0.8e8, 1.1e8, 0.95e8, 1.2e8]),
    )
    res = run_trial(P4, sched, cfg, ReadoutConfig(), 0, t_end, initial_state=s0, record_trajectory=False)
    x, y = res.final_state.cartesian()
    return np.concatenate([x.ravel(), y.ravel(), res.final_state.n_c / 1e6])


def test_rk4_fourth_order_self_convergence():
    f1, f2, f4 = _final(1e-12), _final(0.5e-12), _final(0.25e-12)
    e12 = np.linalg.norm(f1 - f2)
    e24 = np.linalg.norm(f2 - f4)
    order = np.log2(e12 / e24)
    assert 3.6 < order < 4.4
    assert e24 / np.linalg.norm(f4) < 1e-6


@settings(max_examples=10, deadline=None)
@given(st.floats(0.0, 0.05), st.floats(0.0, 0.05))
def test_zero_coupling_lasers_stay_identical(zeta, alpha):
    """Identical initial lasers with no noise evolve identically."""
    sched = make_schedule("gp", QUIET, t_p=5e-9, alpha_final=alpha, zeta=zeta)
    s0 = LaserNetworkState(a=np.full((4, 2), 1e-3), phi=np.tile([0.3, 1.1], (4, 1)), n_c=np.zeros(4))
    p = build_cubic_problem(4, [1, 1, 1, 1])
    res = run_trial(p, sched, QUIET, ReadoutConfig(), 0, 16e-9, initial_state=s0, record_trajectory=False)
    f = frame_from_state(res.final_state)
    assert np.ptp(res.final_state.n_c) <= 1e-9 * max(1.0, res.final_state.n_c.max())
    assert np.ptp(f.sigma_circ) < 1e-9
