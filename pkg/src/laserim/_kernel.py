"""Compiled inner loops for the slave-laser network.

Fields are carried as Cartesian components ``x + i y`` of the complex mode
amplitude A exp(i phi); column 0 is the D mode and column 1 the D-bar mode.
In these coordinates the amplitude/phase equations become

    dE_X/dt = -1/2 (w - G) E_X + w zeta A_M - 1/2 w alpha sum_j J_ij (E_Xj - E_Xbar,j)

with G = beta N_C / tau_sp and w = omega/Q, which has no 1/A singularity.
"""

from __future__ import annotations

import numba
import numpy as np

from .schedules import profile

TWO_PI = 2.0 * np.pi


@numba.njit(cache=True)
def field_rates(
    x, y, nc, indptr, indices, weights,
    pump, alpha, zeta, a_m, omega_q, tau_sp, beta_sp,
    dx, dy, dn,
):
    m = x.shape[0]
    half_c = 0.5 * omega_q * alpha
    master = omega_q * zeta * a_m
    gain_per_carrier = beta_sp / tau_sp
    for i in range(m):
        g = gain_per_carrier * nc[i]
        # injected horizontal component, sum_j J_ij (E_Dj - E_Dbar,j)
        hx = 0.0
        hy = 0.0
        for q in range(indptr[i], indptr[i + 1]):
            j = indices[q]
            hx += weights[q] * (x[j, 0] - x[j, 1])
            hy += weights[q] * (y[j, 0] - y[j, 1])
        lin = -0.5 * (omega_q - g)
        dx[i, 0] = lin * x[i, 0] + master - half_c * hx
        dy[i, 0] = lin * y[i, 0] - half_c * hy
        dx[i, 1] = lin * x[i, 1] + master + half_c * hx
        dy[i, 1] = lin * y[i, 1] + half_c * hy
        n_t = x[i, 0] ** 2 + y[i, 0] ** 2 + x[i, 1] ** 2 + y[i, 1] ** 2
        dn[i] = pump - nc[i] / tau_sp - g * n_t


@numba.njit(cache=True)
def spontaneous_emission(x, y, nc, rate_per_carrier, dt, rng):
    """Add Poisson(G*dt) unit photons of random phase to every mode.

    Event positions are drawn as a single Poisson process over the
    concatenated per-mode intensities (exponential gaps), which gives
    independent Poisson counts per mode with one draw per event.
    """
    gap = rng.standard_exponential()
    m = x.shape[0]
    for i in range(m):
        lam = rate_per_carrier * nc[i] * dt
        for k in range(2):
            if gap >= lam:
                gap -= lam
                continue
            rem = lam
            while gap < rem:
                rem -= gap
                th = TWO_PI * rng.random()
                x[i, k] += np.cos(th)
                y[i, k] += np.sin(th)
                gap = rng.standard_exponential()
            gap -= rem


@numba.njit(cache=True)
def clamp(x, y, nc, amp_floor):
    m = x.shape[0]
    f2 = amp_floor * amp_floor
    for i in range(m):
        if nc[i] < 0.0:
            nc[i] = 0.0
        for k in range(2):
            r2 = x[i, k] ** 2 + y[i, k] ** 2
            if r2 < f2:
                if r2 > 0.0:
                    s = amp_floor / np.sqrt(r2)
                    x[i, k] *= s
                    y[i, k] *= s
                else:
                    x[i, k] = amp_floor
                    y[i, k] = 0.0


@numba.njit(cache=True)
def advance(
    x, y, nc, step0, nsteps, indptr, indices, weights, sp, zeta, a_m,
    omega_q, tau_sp, beta_sp, dt, amp_floor, noise_factor, rng,
):
    """RK4 + spontaneous emission for ``nsteps`` steps, in place.

    Time of step k is ``k * dt``; ``sp`` is ScheduleSpec.as_params().
    """
    m = x.shape[0]
    kx = np.empty((4, m, 2))
    ky = np.empty((4, m, 2))
    kn = np.empty((4, m))
    tx = np.empty((m, 2))
    ty = np.empty((m, 2))
    tn = np.empty(m)
    scheme = int(sp[0])
    rate = noise_factor * beta_sp / tau_sp
    for s in range(nsteps):
        t = (step0 + s) * dt
        for stage in range(4):
            if stage == 0:
                h = 0.0
                tx[:, :] = x
                ty[:, :] = y
                tn[:] = nc
            else:
                h = dt if stage == 3 else 0.5 * dt
                for i in range(m):
                    for k in range(2):
                        tx[i, k] = x[i, k] + h * kx[stage - 1, i, k]
                        ty[i, k] = y[i, k] + h * ky[stage - 1, i, k]
                    tn[i] = nc[i] + h * kn[stage - 1, i]
            pump, alpha = profile(t + h, scheme, sp[1], sp[2], sp[3], sp[4], sp[5], sp[6])
            field_rates(
                tx, ty, tn, indptr, indices, weights, pump, alpha, zeta, a_m,
                omega_q, tau_sp, beta_sp, kx[stage], ky[stage], kn[stage],
            )
        c = dt / 6.0
        for i in range(m):
            for k in range(2):
                x[i, k] += c * (kx[0, i, k] + 2.0 * kx[1, i, k] + 2.0 * kx[2, i, k] + kx[3, i, k])
                y[i, k] += c * (ky[0, i, k] + 2.0 * ky[1, i, k] + 2.0 * ky[2, i, k] + ky[3, i, k])
            nc[i] += c * (kn[0, i] + 2.0 * kn[1, i] + 2.0 * kn[2, i] + kn[3, i])
            if nc[i] < 0.0:
                nc[i] = 0.0
        if rate > 0.0:
            spontaneous_emission(x, y, nc, rate, dt, rng)
        clamp(x, y, nc, amp_floor)
