"""Compiled RK4 time loop in scaled units.

Scaled variables (per channel v, reference half-density n0 = n_t,total / 2):
    tau~ = tau / T_R,  z~ = z / L,  n~ = n' / n0,  p~ = P'+ / (d' n0),
    e~ = (2 d' T_R / hbar) E+

    dn~/dtau~ = -Im(p~ e~) - n~ T_R/T1 + lam_n
    dp~/dtau~ = i delta p~ + i n~ conj(e~) - p~ T_R/T2 + lam_p exp(i rot tau~)
    de~/dz~   = i G sum_v conj(p~_v)
"""
import numpy as np
from numba import njit

OK = 0
NONFINITE = 1


@njit(cache=True, nogil=True)
def field_scan(p, eb, g, dz, out):
    """Trapezoidal cumulative integration of de/dz = i g sum_v conj(p_v)."""
    nc, nz = p.shape
    s_prev = 0j
    for v in range(nc):
        s_prev += np.conj(p[v, 0])
    out[0] = eb
    half = 0.5 * dz * g
    for j in range(1, nz):
        s = 0j
        for v in range(nc):
            s += np.conj(p[v, j])
        out[j] = out[j - 1] + 1j * half * (s_prev + s)
        s_prev = s


@njit(cache=True, nogil=True)
def bloch_rates(n, p, e, t1inv, t2inv, delta, lam_n, lam_p, dn, dp):
    nc, nz = p.shape
    for v in range(nc):
        dv = delta[v]
        ln = lam_n[v]
        lp = lam_p[v]
        for j in range(nz):
            pv = p[v, j]
            nv = n[v, j]
            ej = e[j]
            dn[v, j] = -(pv * ej).imag - nv * t1inv + ln
            dp[v, j] = 1j * dv * pv + 1j * nv * np.conj(ej) - pv * t2inv + lp


@njit(cache=True, nogil=True)
def pump_at(lam_p, rot, t, out):
    """Polarisation pump of each channel at scaled time t: lam_p exp(i rot t)."""
    for v in range(lam_p.shape[0]):
        if rot[v] == 0.0:
            out[v] = lam_p[v]
        else:
            out[v] = lam_p[v] * np.exp(1j * rot[v] * t)


@njit(cache=True, nogil=True)
def rk4_step(n, p, e, t, eb_mid, eb_end, dt, dz, g, t1inv, t2inv, delta, lam_n, lam_p, rot,
             work_n, work_p, acc_n, acc_p, dn, dp):
    """Advance (n, p) in place by one step from scaled time t; ``e`` must hold
    the field of the current state on entry and holds the new field on exit."""
    nc, nz = p.shape
    lp = np.empty_like(lam_p)
    # stage 1
    pump_at(lam_p, rot, t, lp)
    bloch_rates(n, p, e, t1inv, t2inv, delta, lam_n, lp, dn, dp)
    for v in range(nc):
        for j in range(nz):
            acc_n[v, j] = dn[v, j]
            acc_p[v, j] = dp[v, j]
            work_n[v, j] = n[v, j] + 0.5 * dt * dn[v, j]
            work_p[v, j] = p[v, j] + 0.5 * dt * dp[v, j]
    # stage 2
    pump_at(lam_p, rot, t + 0.5 * dt, lp)
    field_scan(work_p, eb_mid, g, dz, e)
    bloch_rates(work_n, work_p, e, t1inv, t2inv, delta, lam_n, lp, dn, dp)
    for v in range(nc):
        for j in range(nz):
            acc_n[v, j] += 2.0 * dn[v, j]
            acc_p[v, j] += 2.0 * dp[v, j]
            work_n[v, j] = n[v, j] + 0.5 * dt * dn[v, j]
            work_p[v, j] = p[v, j] + 0.5 * dt * dp[v, j]
    # stage 3
    field_scan(work_p, eb_mid, g, dz, e)
    bloch_rates(work_n, work_p, e, t1inv, t2inv, delta, lam_n, lp, dn, dp)
    for v in range(nc):
        for j in range(nz):
            acc_n[v, j] += 2.0 * dn[v, j]
            acc_p[v, j] += 2.0 * dp[v, j]
            work_n[v, j] = n[v, j] + dt * dn[v, j]
            work_p[v, j] = p[v, j] + dt * dp[v, j]
    # stage 4
    pump_at(lam_p, rot, t + dt, lp)
    field_scan(work_p, eb_end, g, dz, e)
    bloch_rates(work_n, work_p, e, t1inv, t2inv, delta, lam_n, lp, dn, dp)
    sixth = dt / 6.0
    for v in range(nc):
        for j in range(nz):
            n[v, j] += sixth * (acc_n[v, j] + dn[v, j])
            p[v, j] += sixth * (acc_p[v, j] + dp[v, j])
    field_scan(p, eb_end, g, dz, e)


@njit(cache=True, nogil=True)
def integrate(n, p, eb, dt, dz, g, t1inv, t2inv, delta, lam_n, lam_p, rot, snap_steps,
              e_end, mean_n, max_p, snap_n, snap_p, snap_e):
    """Run n_tau - 1 RK4 steps, recording the endfire field and channel summaries.

    ``eb`` has shape (n_tau, 2): boundary field at each step start and at the
    following half step.  Returns (status, step, z index); on a non-finite
    field the state is left at the offending step.
    """
    nc, nz = p.shape
    n_tau = e_end.shape[0]
    e = np.empty(nz, dtype=np.complex128)
    work_n = np.empty_like(n)
    work_p = np.empty_like(p)
    acc_n = np.empty_like(n)
    acc_p = np.empty_like(p)
    dn = np.empty_like(n)
    dp = np.empty_like(p)

    field_scan(p, eb[0, 0], g, dz, e)
    next_snap = 0
    n_snap = snap_steps.shape[0]
    for i in range(n_tau):
        if i > 0:
            rk4_step(n, p, e, (i - 1) * dt, eb[i - 1, 1], eb[i, 0], dt, dz, g, t1inv, t2inv,
                     delta, lam_n, lam_p, rot, work_n, work_p, acc_n, acc_p, dn, dp)
        for j in range(nz):
            if not (np.isfinite(e[j].real) and np.isfinite(e[j].imag)):
                return NONFINITE, i, j
        e_end[i] = e[nz - 1]
        for v in range(nc):
            s = 0.0
            m = 0.0
            for j in range(nz):
                s += n[v, j]
                a = abs(p[v, j])
                if a > m:
                    m = a
            mean_n[i, v] = s / nz
            max_p[i, v] = m
        while next_snap < n_snap and snap_steps[next_snap] == i:
            snap_n[next_snap, :, :] = n
            snap_p[next_snap, :, :] = p
            snap_e[next_snap, :] = e
            next_snap += 1
    return OK, n_tau - 1, -1
