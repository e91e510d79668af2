"""Relativistic Maxwell-Bloch integrator on a retarded-time x space grid.

The Bloch variables of every velocity channel are advanced with classical RK4
in retarded time.  The field envelope has no time derivative of its own; it
is rebuilt by trapezoidal quadrature along z from the polarisation at every
RK4 stage.  The production loop (:func:`run`) works in scaled units (see
:mod:`relmbe._kernel`); :meth:`MBESystem.step` is a plain-numpy SI version of
the same scheme used for cross-checking.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernel, relativity
from .errors import ConfigError, DomainError, NumericalError
from .params import CONST, SampleSpec, TimescaleSpec, TransitionSpec, gain_coefficient_rest, \
    saturation_intensity
from .steady_state import delay_time_estimate

logger = logging.getLogger(__name__)

# step-size rule: resolve T_R, T2 and the fastest channel beat
STEPS_PER_TIMESCALE = 50
MAX_BEAT_PHASE_PER_STEP = 0.1
SVEA_WARN = 0.1


@dataclass(frozen=True)
class GridSpec:
    """Uniform observer-frame grid: ``n_tau`` retarded times on [0, tau_max],
    ``n_z`` points on [0, length_observer]."""

    n_z: int
    n_tau: int
    tau_max: float
    length_observer: float

    def __post_init__(self):
        if self.n_z < 2 or self.n_tau < 2:
            raise ConfigError(f"need n_z >= 2 and n_tau >= 2, got {self.n_z}, {self.n_tau}",
                              key="grid")
        if not (self.tau_max > 0 and self.length_observer > 0):
            raise ConfigError("tau_max and length_observer must be positive", key="grid")

    @property
    def dtau(self) -> float:
        return self.tau_max / (self.n_tau - 1)

    @property
    def dz(self) -> float:
        return self.length_observer / (self.n_z - 1)

    @property
    def tau(self) -> np.ndarray:
        return np.arange(self.n_tau) * self.dtau

    @property
    def z(self) -> np.ndarray:
        return np.linspace(0.0, self.length_observer, self.n_z)


@dataclass(frozen=True)
class VelocityChannel:
    dv_rest: float
    inversion_density_rest: float

    def __post_init__(self):
        if not self.inversion_density_rest > 0:
            raise DomainError("channel inversion density must be positive")


def channel_layout(ks: Sequence[int], densities: Sequence[float], lambda_rest: float,
                   tau_max_rest: float) -> list[VelocityChannel]:
    """Channels offset by integer multiples of the fundamental step lambda'/tau_max'."""
    dv = lambda_rest / tau_max_rest
    return [VelocityChannel(int(k) * dv, float(d)) for k, d in zip(ks, densities)]


@dataclass
class ChannelState:
    inversion: np.ndarray           # n'_v(z), 1/m^3
    polarization_plus: np.ndarray   # P'+_v(z), C/m^2


@dataclass
class FieldState:
    envelope_plus: np.ndarray       # E+(z), V/m
    boundary_input: Callable[[float], complex] = lambda tau: 0j


@dataclass(frozen=True)
class PumpSpec:
    lambda_n: float   # 1/(m^3 s)
    lambda_p: complex  # C/(m^2 s)


def bloch_rhs(inversion, polarization, field, *, detuning, t1, t2, pump: PumpSpec, dipole):
    """Rates (dn'/dtau, dP'+/dtau) for one channel, SI units.

    ``detuning`` is the observer-frame angular detuning k dv (rad/s).
    """
    hbar = CONST.hbar
    pe = polarization * field
    # -(1/i hbar)(P+E+ - P-E-) = -(2/hbar) Im(P+E+)
    dn = -(2.0 / hbar) * np.imag(pe) - inversion / t1 + pump.lambda_n
    dp = (1j * detuning * polarization
          + (2j * dipole**2 / hbar) * inversion * np.conj(field)
          - polarization / t2 + pump.lambda_p)
    return dn, dp


def integrate_field(polarizations: Sequence[np.ndarray], dz: float, beta: float,
                    transition: TransitionSpec, boundary: complex = 0j) -> np.ndarray:
    """E+(z) from dE+/dz = coupling(beta) * i omega0'/(2 c eps0) * sum_v P'-_v.

    Channels are summed in list order; trapezoidal cumulative quadrature from
    ``boundary`` at z = 0.
    """
    pref = 1j * relativity.field_coupling_factor(beta) * transition.omega0_rest / (
        2.0 * CONST.c * CONST.eps0)
    total = np.zeros_like(np.asarray(polarizations[0], dtype=complex))
    for pol in polarizations:
        total = total + np.conj(pol)
    out = np.empty_like(total)
    out[0] = boundary
    out[1:] = boundary + pref * np.cumsum(0.5 * dz * (total[1:] + total[:-1]))
    return out


def constant_boundary(intensity: float) -> Callable[[float], complex]:
    """Boundary field with real phase carrying ``intensity`` (W/m^2)."""
    if intensity < 0:
        raise DomainError("boundary intensity must be >= 0")
    amp = math.sqrt(2.0 * intensity / (CONST.c * CONST.eps0))
    return lambda tau: complex(amp)


@dataclass(frozen=True)
class MBESystem:
    """Fully resolved observer-frame problem.

    Pumps default to Lambda_n = n0_v/T1 and Lambda_P = n0_v d' sin(theta0)/T2
    with observer-frame T1, T2; ``theta0`` defaults to 2/sqrt(N) for the
    total density of all channels.
    """

    transition: TransitionSpec
    length_rest: float
    t1_rest: float
    t2_rest: float
    beta: float
    channels: tuple[VelocityChannel, ...]
    n_z: int
    n_tau: int
    tau_max_rest: float
    inversion_rate: float | None = None
    polarization_rate: float | None = None
    theta0: float | None = None
    boundary: Callable[[float], complex] = field(default=lambda tau: 0j, compare=False)
    detuning_model: str = "doppler"
    pump_phase: str = "corotating"

    def __post_init__(self):
        if self.pump_phase not in ("corotating", "fixed"):
            raise ConfigError(f"unknown pump phase {self.pump_phase!r}", key="pumps.polarization_phase")
        if not self.channels:
            raise ConfigError("at least one velocity channel is required", key="channels")
        relativity.lorentz_gamma(self.beta)

    # -- derived quantities ------------------------------------------------
    @property
    def total_density_rest(self) -> float:
        return math.fsum(ch.inversion_density_rest for ch in self.channels)

    @property
    def sample(self) -> SampleSpec:
        return SampleSpec(self.transition, self.length_rest, self.total_density_rest)

    @property
    def timescales(self) -> TimescaleSpec:
        return TimescaleSpec(self.t1_rest, self.t2_rest, self.sample.tr_rest)

    @property
    def gamma(self) -> float:
        return relativity.lorentz_gamma(self.beta)

    @property
    def omega(self) -> float:
        return relativity.doppler_frequency(self.transition.omega0_rest, self.beta)

    @property
    def t1(self) -> float:
        return relativity.timescale_to_observer(self.t1_rest, self.beta)

    @property
    def t2(self) -> float:
        return relativity.timescale_to_observer(self.t2_rest, self.beta)

    @property
    def tr(self) -> float:
        return relativity.timescale_to_observer(self.sample.tr_rest, self.beta)

    @property
    def length(self) -> float:
        return relativity.length_to_observer(self.length_rest, self.beta)

    @property
    def tipping(self) -> float:
        return self.sample.tipping_angle if self.theta0 is None else self.theta0

    @property
    def dipole(self) -> float:
        return self.transition.dipole_rest

    @property
    def grid(self) -> GridSpec:
        tau_max = relativity.timescale_to_observer(self.tau_max_rest, self.beta)
        return GridSpec(self.n_z, self.n_tau, tau_max, self.length)

    @property
    def n0_ref(self) -> float:
        return 0.5 * self.total_density_rest

    def detunings(self) -> np.ndarray:
        w0 = self.transition.omega0_rest
        return np.array([relativity.channel_detuning(w0, ch.dv_rest, self.beta, self.detuning_model)
                         for ch in self.channels])

    def weights(self) -> np.ndarray:
        total = self.total_density_rest
        return np.array([ch.inversion_density_rest / total for ch in self.channels])

    def pumps(self) -> list[PumpSpec]:
        out = []
        for w, ch in zip(self.weights(), self.channels):
            n0v = 0.5 * ch.inversion_density_rest
            lam_n = n0v / self.t1 if self.inversion_rate is None else w * self.inversion_rate
            if self.polarization_rate is None:
                lam_p = n0v * self.dipole * math.sin(self.tipping) / self.t2
            else:
                lam_p = w * self.polarization_rate
            out.append(PumpSpec(lam_n, complex(lam_p)))
        return out

    def pump_rotation(self) -> np.ndarray:
        """Angular rate (rad/s) at which each channel's polarisation pump turns.

        ``corotating`` pumps follow their channel's own detuning, ``fixed``
        pumps keep the common real phase of tau = 0.
        """
        if self.pump_phase == "fixed":
            return np.zeros(len(self.channels))
        return self.detunings()

    def field_scale(self) -> float:
        """E+ (V/m) per unit scaled field."""
        return CONST.hbar / (2.0 * self.dipole * self.tr)

    def coupling(self) -> float:
        """Scaled field-equation coupling G (exactly 1 for an Einstein-A dipole)."""
        kappa = relativity.field_coupling_factor(self.beta)
        return (kappa * self.transition.omega0_rest * self.dipole**2 * self.n0_ref * self.length
                * self.tr / (CONST.hbar * CONST.c * CONST.eps0))

    def check_step_size(self) -> None:
        g = self.grid
        dtau = g.dtau
        limit = min(self.tr, self.t2) / STEPS_PER_TIMESCALE
        if dtau > limit * (1 + 1e-12):
            raise ConfigError(
                f"dtau = {dtau:.4g} s exceeds min(T_R, T2)/{STEPS_PER_TIMESCALE} = {limit:.4g} s; "
                f"raise n_tau to at least {math.ceil(g.tau_max / limit) + 1}",
                key="grid.n_tau")
        beat = float(np.max(np.abs(self.detunings())))
        if beat * dtau > MAX_BEAT_PHASE_PER_STEP:
            raise ConfigError(
                f"dtau * max|k dv| = {beat * dtau:.3g} exceeds {MAX_BEAT_PHASE_PER_STEP}",
                key="grid.n_tau")

    def metadata(self) -> dict:
        tr_rest = self.sample.tr_rest
        alpha_rest = gain_coefficient_rest(self.t2_rest, self.length_rest, tr_rest)
        n = self.sample.particle_count
        meta = {
            "beta": self.beta,
            "gamma": self.gamma,
            "omega0_rest_rad_s": self.transition.omega0_rest,
            "omega_rad_s": self.omega,
            "lambda_rest_m": self.transition.lambda_rest,
            "gamma_sp_rest_s": self.transition.gamma_sp_rest,
            "dipole_rest_C_m": self.dipole,
            "length_rest_m": self.length_rest,
            "length_m": self.length,
            "cross_section_rest_m2": self.sample.cross_section_rest,
            "inversion_density_total_rest_m3": self.total_density_rest,
            "particle_number": n,
            "particle_number_rounded": int(round(n)),
            "tipping_angle_rad": self.tipping,
            "tr_rest_s": tr_rest,
            "tr_s": self.tr,
            "t1_rest_s": self.t1_rest,
            "t2_rest_s": self.t2_rest,
            "t1_s": self.t1,
            "t2_s": self.t2,
            "superradiant_condition": self.timescales.superradiant,
            "alpha_rest_per_m": alpha_rest,
            "alpha_per_m": self.gamma * alpha_rest,
            "isat_rest_W_m2": saturation_intensity(self.dipole, self.t1_rest, self.t2_rest),
            "isat_W_m2": saturation_intensity(self.dipole, self.t1, self.t2),
            "intensity_boost": relativity.intensity_boost(self.beta),
            "dv_fundamental_rest_m_s": self.transition.lambda_rest / self.tau_max_rest,
            "tau_max_rest_s": self.tau_max_rest,
            "tau_max_s": self.grid.tau_max,
            "dtau_s": self.grid.dtau,
            "dz_m": self.grid.dz,
            "n_z": self.n_z,
            "n_tau": self.n_tau,
            "channel_dv_rest_m_s": [ch.dv_rest for ch in self.channels],
            "channel_inversion_density_rest_m3": [ch.inversion_density_rest for ch in self.channels],
            "channel_detuning_rad_s": self.detunings().tolist(),
            "detuning_model": self.detuning_model,
            "pump_phase": self.pump_phase,
            "coupling_scaled": self.coupling(),
        }
        if 0 < self.tipping < 1:
            meta["delay_estimate_s"] = delay_time_estimate(self.tr, self.tipping)
        return meta

    # -- SI reference path ---------------------------------------------------
    def init_state(self) -> tuple[list[ChannelState], FieldState]:
        """Pump fixed point n' = n0_v with a uniform real polarisation seed."""
        nz = self.n_z
        states = []
        for ch in self.channels:
            n0v = 0.5 * ch.inversion_density_rest
            states.append(ChannelState(
                inversion=np.full(nz, n0v),
                polarization_plus=np.full(nz, self.dipole * n0v * math.sin(self.tipping), dtype=complex),
            ))
        e = integrate_field([s.polarization_plus for s in states], self.grid.dz, self.beta,
                            self.transition, self.boundary(0.0))
        return states, FieldState(e, self.boundary)

    def _rates(self, inv, pol, tau):
        e = integrate_field(pol, self.grid.dz, self.beta, self.transition, self.boundary(tau))
        pumps = [PumpSpec(pp.lambda_n, pp.lambda_p * np.exp(1j * rot * tau))
                 for pp, rot in zip(self.pumps(), self.pump_rotation())]
        rates = [bloch_rhs(n, p, e, detuning=d, t1=self.t1, t2=self.t2, pump=pump, dipole=self.dipole)
                 for n, p, d, pump in zip(inv, pol, self.detunings(), pumps)]
        return [r[0] for r in rates], [r[1] for r in rates]

    def step(self, states: Sequence[ChannelState], fieldstate: FieldState, tau: float,
             dtau: float) -> tuple[list[ChannelState], FieldState]:
        """One classical RK4 step with the field re-derived at every stage."""
        inv = [s.inversion for s in states]
        pol = [s.polarization_plus for s in states]

        def axpy(base, k, h):
            return [b + h * r for b, r in zip(base, k)]

        k1n, k1p = self._rates(inv, pol, tau)
        k2n, k2p = self._rates(axpy(inv, k1n, dtau / 2), axpy(pol, k1p, dtau / 2), tau + dtau / 2)
        k3n, k3p = self._rates(axpy(inv, k2n, dtau / 2), axpy(pol, k2p, dtau / 2), tau + dtau / 2)
        k4n, k4p = self._rates(axpy(inv, k3n, dtau), axpy(pol, k3p, dtau), tau + dtau)
        new = []
        for i in range(len(states)):
            n = inv[i] + dtau / 6 * (k1n[i] + 2 * k2n[i] + 2 * k3n[i] + k4n[i])
            p = pol[i] + dtau / 6 * (k1p[i] + 2 * k2p[i] + 2 * k3p[i] + k4p[i])
            new.append(ChannelState(n, p))
        e = integrate_field([s.polarization_plus for s in new], self.grid.dz, self.beta,
                            self.transition, self.boundary(tau + dtau))
        return new, FieldState(e, fieldstate.boundary_input)


@dataclass
class Snapshot:
    tau: float
    z: np.ndarray
    inversion: np.ndarray          # (channels, n_z), 1/m^3
    polarization_abs: np.ndarray   # (channels, n_z), C/m^2
    field_abs: np.ndarray          # (n_z,), V/m


@dataclass
class SimulationResult:
    tau: np.ndarray                      # observer retarded time, s
    field: np.ndarray                    # endfire E+ at z = L, V/m
    channel_mean_inversion: np.ndarray   # (n_tau, channels), 1/m^3
    channel_max_polarization: np.ndarray  # (n_tau, channels), C/m^2
    metadata: dict
    snapshots: list[Snapshot] = field(default_factory=list)
    final_states: list[ChannelState] | None = None
    name: str = ""

    @property
    def intensity(self) -> np.ndarray:
        return 0.5 * CONST.c * CONST.eps0 * np.abs(self.field) ** 2

    @property
    def normalized_intensity(self) -> np.ndarray:
        i = self.intensity
        peak = i.max() if i.size else 0.0
        return i / peak if peak > 0 else np.zeros_like(i)


def run_system(system: MBESystem, snapshot_times: Sequence[float] = (), name: str = "",
               check_steps: bool = True) -> SimulationResult:
    """Integrate ``system`` over its grid and return the endfire series."""
    if check_steps:
        system.check_step_size()
    grid = system.grid
    tr = system.tr
    nc, nz, nt = len(system.channels), grid.n_z, grid.n_tau
    dt = grid.dtau / tr
    dz = 1.0 / (nz - 1)
    g = system.coupling()
    escale = system.field_scale()

    w = system.weights()
    n = np.repeat(w[:, None], nz, axis=1).astype(np.float64)
    p = (n * math.sin(system.tipping)).astype(np.complex128)

    pumps = system.pumps()
    lam_n = np.array([pp.lambda_n for pp in pumps]) * tr / system.n0_ref
    lam_p = np.array([pp.lambda_p for pp in pumps], dtype=np.complex128) * tr / (
        system.dipole * system.n0_ref)
    delta = system.detunings() * tr
    rot = system.pump_rotation() * tr

    taus = grid.tau
    eb = np.empty((nt, 2), dtype=np.complex128)
    for i in range(nt):
        eb[i, 0] = system.boundary(taus[i]) / escale
        eb[i, 1] = system.boundary(taus[i] + 0.5 * grid.dtau) / escale

    snap_steps = np.array(sorted(int(round(t / grid.dtau)) for t in snapshot_times), dtype=np.int64)
    if snap_steps.size and (snap_steps.min() < 0 or snap_steps.max() >= nt):
        raise ConfigError("snapshot time outside [0, tau_max]", key="outputs.snapshot_times")
    ns = snap_steps.size

    e_end = np.empty(nt, dtype=np.complex128)
    mean_n = np.empty((nt, nc))
    max_p = np.empty((nt, nc))
    snap_n = np.empty((ns, nc, nz))
    snap_p = np.empty((ns, nc, nz), dtype=np.complex128)
    snap_e = np.empty((ns, nz), dtype=np.complex128)

    status, i_bad, j_bad = _kernel.integrate(
        n, p, eb, dt, dz, g, tr / system.t1, tr / system.t2, delta, lam_n, lam_p, rot, snap_steps,
        e_end, mean_n, max_p, snap_n, snap_p, snap_e)
    if status != _kernel.OK:
        raise NumericalError(
            f"non-finite field at tau = {taus[i_bad]:.6g} s (step {i_bad}), "
            f"z = {grid.z[j_bad]:.6g} m (index {j_bad})",
            tau=float(taus[i_bad]), z=float(grid.z[j_bad]))

    meta = system.metadata()
    # SVEA diagnostic at the final state: |dE/dz| / (k |E|)
    de = g * np.abs(np.conj(p).sum(axis=0)) / system.length
    e_fin = np.empty(nz, dtype=np.complex128)
    _kernel.field_scan(p, eb[-1, 0], g, dz, e_fin)
    k = system.omega / CONST.c
    mask = np.abs(e_fin) > 0
    svea = float(np.max(de[mask] / (k * np.abs(e_fin[mask])))) if mask.any() else 0.0
    meta["svea_ratio_final"] = svea
    if svea > SVEA_WARN:
        warnings.warn(f"slowly-varying envelope diagnostic {svea:.3g} exceeds {SVEA_WARN}")

    z = grid.z
    snaps = [Snapshot(float(taus[s]), z, snap_n[i] * system.n0_ref,
                      np.abs(snap_p[i]) * system.dipole * system.n0_ref,
                      np.abs(snap_e[i]) * escale)
             for i, s in enumerate(snap_steps)]
    finals = [ChannelState(n[v] * system.n0_ref, p[v] * system.dipole * system.n0_ref)
              for v in range(nc)]
    return SimulationResult(
        tau=taus,
        field=e_end * escale,
        channel_mean_inversion=mean_n * system.n0_ref,
        channel_max_polarization=max_p * system.dipole * system.n0_ref,
        metadata=meta,
        snapshots=snaps,
        final_states=finals,
        name=name,
    )


def run(config) -> SimulationResult:
    """Simulate a :class:`relmbe.config.ScenarioConfig`."""
    system = config.system()
    result = run_system(system, config.outputs.snapshot_times, name=config.name)
    result.metadata["config_name"] = config.name
    return result
