"""Reduced-scale invariant and oracle checks behind ``relmbe check``.

Each check returns a :class:`CheckResult`; none takes more than a few
seconds.  The full-scale versions live in the acceptance tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import auto_n_tau
from .params import OH1612, SampleSpec
from .solver import MBESystem, VelocityChannel, run_system
from .steady_state import linear_regime_polarization

# Fig. 1 sample at rest: L' = 4.2e13 m, n_t' = 2e4 m^-3
FIG1_LENGTH = 4.2e13
FIG1_DENSITY = 2e4
FIG1_T1 = 0.1
FIG1_T2 = 1.2e-3


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def small_system(**changes) -> MBESystem:
    """Fig. 1 sample on a coarse z grid over the first 20 ms (burst included)."""
    tau_max_rest = changes.pop("tau_max_rest", 0.02)
    n_tau = changes.pop("n_tau", None)
    if n_tau is None:
        tr_rest = SampleSpec(OH1612, FIG1_LENGTH, FIG1_DENSITY).tr_rest
        n_tau = auto_n_tau(tau_max_rest, tr_rest, FIG1_T2)
    base = MBESystem(
        transition=OH1612,
        length_rest=FIG1_LENGTH,
        t1_rest=FIG1_T1,
        t2_rest=FIG1_T2,
        beta=0.0,
        channels=(VelocityChannel(0.0, FIG1_DENSITY),),
        n_z=60,
        n_tau=n_tau,
        tau_max_rest=tau_max_rest,
    )
    return replace(base, **changes)


def lossless_system(tau_max_tr: float, n_z: int, n_tau: int, theta0: float, **changes) -> MBESystem:
    """Fig. 1 sample with relaxation switched off and no pumps."""
    tr_rest = SampleSpec(OH1612, FIG1_LENGTH, FIG1_DENSITY).tr_rest
    return small_system(t1_rest=1e30, t2_rest=1e30, inversion_rate=0.0, polarization_rate=0.0,
                        theta0=theta0, n_z=n_z, n_tau=n_tau, tau_max_rest=tau_max_tr * tr_rest,
                        **changes)


def check_derived_parameters() -> CheckResult:
    s = SampleSpec(OH1612, FIG1_LENGTH, FIG1_DENSITY)
    ok = abs(s.tr_rest / 22e-6 - 1) < 0.05 and abs(s.particle_count / 7e30 - 1) < 0.10
    return CheckResult("derived parameters", ok,
                       f"T_R' = {s.tr_rest:.4g} s (22 us), N = {s.particle_count:.4g} (7e30)")


def check_bessel_oracle(n_z=100, n_tau=1001, arg_max=6.0) -> CheckResult:
    theta0 = 1e-9
    sysm = lossless_system((arg_max / 2) ** 2, n_z, n_tau, theta0)
    res = run_system(sysm, snapshot_times=(sysm.grid.tau_max,))
    snap = res.snapshots[0]
    p0 = sysm.dipole * sysm.n0_ref * math.sin(theta0)
    exact = linear_regime_polarization(snap.z, snap.tau, p0, sysm.length, sysm.tr)
    err = float(np.max(np.abs(snap.polarization_abs[0] / exact - 1)))
    return CheckResult("Bessel oracle", err < 0.01, f"max rel. error {err:.2e} up to argument {arg_max:g}")


def check_bloch_length(n_z=60, n_tau=6001) -> CheckResult:
    sysm = lossless_system(120.0, n_z, n_tau, 1e-6)
    res = run_system(sysm)
    n = res.final_states[0].inversion
    p = np.abs(res.final_states[0].polarization_plus) / sysm.dipole
    n0 = sysm.n0_ref
    # initial state n = n0, |P|/d' = n0 sin(theta0)
    r0 = math.hypot(n0, n0 * math.sin(1e-6))
    drift = float(np.max(np.abs(np.hypot(n, p) / r0 - 1)))
    swing = float(np.min(n) / n0)
    return CheckResult("Bloch-length conservation", drift < 1e-5,
                       f"max drift {drift:.2e}; min n/n0 reached {swing:.3f}")


def check_channel_merge() -> CheckResult:
    single = small_system(channels=(VelocityChannel(0.0, 1.2e4),))
    merged = small_system(channels=(VelocityChannel(0.0, 6e3), VelocityChannel(0.0, 6e3)))
    a = run_system(single).intensity
    b = run_system(merged).intensity
    err = float(np.max(np.abs(a - b)) / np.max(a))
    return CheckResult("channel merge", err < 1e-9, f"max |diff| / peak = {err:.2e}")


def check_frame_scaling() -> CheckResult:
    ref = run_system(small_system())
    fast = run_system(small_system(beta=0.5))
    ratio = fast.intensity.max() / ref.intensity.max()
    t_ratio = fast.tau[fast.intensity.argmax()] / ref.tau[ref.intensity.argmax()]
    ok = abs(ratio / 3 - 1) < 1e-6 and abs(t_ratio * math.sqrt(3) - 1) < 1e-6
    return CheckResult("frame scaling", ok, f"peak ratio {ratio:.9f} (3), time ratio {t_ratio:.9f} (0.577350269)")


def check_step_cross() -> CheckResult:
    """Compiled scaled kernel against the plain SI RK4 step."""
    sysm = small_system(channels=(VelocityChannel(-1.0, 6e3), VelocityChannel(2.0, 4e3)), n_z=40,
                        n_tau=200, theta0=1e-3)
    steps = 20
    res_states, fs = sysm.init_state()
    dt = sysm.grid.dtau
    for i in range(steps):
        res_states, fs = sysm.step(res_states, fs, i * dt, dt)
    short = replace(sysm, n_tau=steps + 1, tau_max_rest=sysm.tau_max_rest * steps / (sysm.n_tau - 1))
    res = run_system(short, check_steps=False)
    err = 0.0
    for a, b in zip(res_states, res.final_states):
        err = max(err, float(np.max(np.abs(a.polarization_plus - b.polarization_plus))
                             / np.max(np.abs(a.polarization_plus))))
        err = max(err, float(np.max(np.abs(a.inversion - b.inversion)) / np.max(np.abs(a.inversion))))
    return CheckResult("kernel vs SI step", err < 1e-9, f"max rel. difference {err:.2e} after {steps} steps")


ALL_CHECKS = (check_derived_parameters, check_step_cross, check_bessel_oracle, check_bloch_length,
              check_channel_merge, check_frame_scaling)


def run_checks() -> list[CheckResult]:
    return [chk() for chk in ALL_CHECKS]
