"""Physical constants, rest-frame transition/sample data and derived quantities.

Everything here is in SI units and refers to the emitters' rest frame unless
a function explicitly takes observer-frame timescales.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import constants as _codata

from .errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = _codata.c
    eps0: float = _codata.epsilon_0
    hbar: float = _codata.hbar


CONST = PhysicalConstants()


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not (value > 0.0 and math.isfinite(value)):
            raise DomainError(f"{name} must be positive and finite, got {value!r}")


def derive_dipole(gamma_sp_rest: float, omega0_rest: float) -> float:
    """Dipole magnitude from the Einstein A coefficient.

    d'^2 = 3 pi eps0 hbar c^3 Gamma' / omega0'^3
    """
    _require_positive(gamma_sp_rest=gamma_sp_rest, omega0_rest=omega0_rest)
    c, eps0, hbar = CONST.c, CONST.eps0, CONST.hbar
    return math.sqrt(3.0 * math.pi * eps0 * hbar * c**3 * gamma_sp_rest / omega0_rest**3)


@dataclass(frozen=True)
class TransitionSpec:
    lambda_rest: float
    gamma_sp_rest: float

    def __post_init__(self):
        _require_positive(lambda_rest=self.lambda_rest, gamma_sp_rest=self.gamma_sp_rest)

    @property
    def omega0_rest(self) -> float:
        return 2.0 * math.pi * CONST.c / self.lambda_rest

    @property
    def dipole_rest(self) -> float:
        return derive_dipole(self.gamma_sp_rest, self.omega0_rest)


# 1612 MHz satellite line of OH
OH1612 = TransitionSpec(lambda_rest=0.186, gamma_sp_rest=1.282e-11)

TRANSITION_PRESETS = {"oh1612": OH1612}


def superradiance_time_rest(lambda_rest, inversion_density_rest, length_rest, gamma_sp_rest) -> float:
    """Characteristic superradiance time T_R' = 8 pi / (3 lambda'^2 n_t' L' Gamma')."""
    _require_positive(
        lambda_rest=lambda_rest,
        inversion_density_rest=inversion_density_rest,
        length_rest=length_rest,
        gamma_sp_rest=gamma_sp_rest,
    )
    return 8.0 * math.pi / (3.0 * lambda_rest**2 * inversion_density_rest * length_rest * gamma_sp_rest)


def particle_number(inversion_density_rest, lambda_rest, length_rest) -> float:
    """Emitters in a Fresnel-number-one cylinder, N = n_t' lambda' L'^2."""
    for name, value in (("inversion_density_rest", inversion_density_rest),
                        ("lambda_rest", lambda_rest), ("length_rest", length_rest)):
        if not (value >= 0.0 and math.isfinite(value)):
            raise DomainError(f"{name} must be non-negative and finite, got {value!r}")
    return inversion_density_rest * lambda_rest * length_rest**2


def tipping_angle(n_particles: float) -> float:
    _require_positive(n_particles=n_particles)
    return 2.0 / math.sqrt(n_particles)


def saturation_intensity(dipole_rest, t1, t2) -> float:
    """I_sat = c eps0 hbar^2 / (8 d'^2 T1 T2).

    Pass rest-frame T1', T2' for the rest-frame value, observer-frame T1, T2
    for the observer-frame value.
    """
    _require_positive(dipole_rest=dipole_rest, t1=t1, t2=t2)
    return CONST.c * CONST.eps0 * CONST.hbar**2 / (8.0 * dipole_rest**2 * t1 * t2)


def gain_coefficient_rest(t2_rest, length_rest, tr_rest) -> float:
    """Unsaturated rest-frame gain alpha' = 2 T2' / (L' T_R')."""
    _require_positive(t2_rest=t2_rest, length_rest=length_rest, tr_rest=tr_rest)
    return 2.0 * t2_rest / (length_rest * tr_rest)


@dataclass(frozen=True)
class SampleSpec:
    """Fresnel-number-one cylinder of inverted emitters (rest frame)."""

    transition: TransitionSpec
    length_rest: float
    inversion_density_rest: float

    def __post_init__(self):
        _require_positive(length_rest=self.length_rest,
                          inversion_density_rest=self.inversion_density_rest)

    @property
    def cross_section_rest(self) -> float:
        return self.transition.lambda_rest * self.length_rest

    @property
    def particle_count(self) -> float:
        return particle_number(self.inversion_density_rest, self.transition.lambda_rest,
                               self.length_rest)

    @property
    def tipping_angle(self) -> float:
        # unrounded N on purpose
        return tipping_angle(self.particle_count)

    @property
    def tr_rest(self) -> float:
        t = self.transition
        return superradiance_time_rest(t.lambda_rest, self.inversion_density_rest,
                                       self.length_rest, t.gamma_sp_rest)


@dataclass(frozen=True)
class TimescaleSpec:
    t1_rest: float
    t2_rest: float
    tr_rest: float

    def __post_init__(self):
        _require_positive(t1_rest=self.t1_rest, t2_rest=self.t2_rest, tr_rest=self.tr_rest)
        if self.t1_rest < self.t2_rest:
            raise DomainError(f"need t1_rest >= t2_rest, got T1'={self.t1_rest}, T2'={self.t2_rest}")

    @property
    def superradiant(self) -> bool:
        """Dephasing slower than the superradiance time."""
        return self.t2_rest > self.tr_rest
