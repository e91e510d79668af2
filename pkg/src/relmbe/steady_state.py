"""Closed-form maser and linear-regime results.

These serve as calculators and as independent checks on the time-domain
solver.  Intensities and timescales are observer-frame unless the name says
``_rest``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import lambertw

from . import relativity
from .errors import DomainError
from .params import CONST


@dataclass(frozen=True)
class MaserOperatingPoint:
    background_intensity: float   # I0 at z = 0, W/m^2
    gain_rest: float              # alpha', 1/m
    saturation_intensity: float   # observer-frame I_sat, W/m^2
    beta: float = 0.0
    length_observer: float = math.inf

    def __post_init__(self):
        if self.background_intensity < 0 or self.saturation_intensity < 0:
            raise DomainError("intensities must be >= 0")
        relativity.lorentz_gamma(self.beta)

    @property
    def gain(self) -> float:
        """Observer-frame gain alpha = gamma alpha'."""
        return relativity.lorentz_gamma(self.beta) * self.gain_rest


def steady_inversion(n0_rest, intensity_ratio):
    """n' = n0' / (1 + I/I_sat)."""
    r = np.asarray(intensity_ratio, dtype=float)
    if np.any(r < 0):
        raise DomainError("intensity ratio must be >= 0")
    out = n0_rest / (1.0 + r)
    return float(out) if out.ndim == 0 else out


def _check_z(z, length):
    za = np.asarray(z, dtype=float)
    if np.any(za < 0) or np.any(za > length * (1 + 1e-12)):
        raise DomainError(f"z must lie in [0, {length}]")
    return za


def unsaturated_profile(z, point: MaserOperatingPoint):
    """I(z) = I0 exp(gamma alpha' z), valid while I << I_sat."""
    za = _check_z(z, point.length_observer)
    out = point.background_intensity * np.exp(point.gain * za)
    return float(out) if out.ndim == 0 else out


def saturated_profile(z, *, omega0_rest, inversion_density_rest, t1_rest, beta, length_rest=math.inf):
    """Linear growth of a fully saturated maser.

    I(z) = (1+beta)/(1-beta) * hbar omega0' n_t' / (8 T1') * gamma z
    """
    length = relativity.length_to_observer(length_rest, beta) if math.isfinite(length_rest) else math.inf
    za = _check_z(z, length)
    slope_rest = CONST.hbar * omega0_rest * inversion_density_rest / (8.0 * t1_rest)
    out = relativity.intensity_boost(beta) * slope_rest * relativity.lorentz_gamma(beta) * za
    return float(out) if out.ndim == 0 else out


def saturable_gain_profile(z, background_intensity, gain, saturation_intensity):
    """Solution of dI/dz = gain I / (1 + I/I_sat), bridging both limits.

    Implicit form ln(I/I0) + (I - I0)/I_sat = gain z, solved with the
    principal branch of the Lambert W function.
    """
    za = np.asarray(z, dtype=float)
    if background_intensity <= 0:
        raise DomainError("background intensity must be positive")
    r0 = background_intensity / saturation_intensity
    # I/I_sat = W(r0 exp(r0 + gain z)); work in logs to avoid overflow
    log_arg = math.log(r0) + r0 + gain * za
    out = np.empty_like(log_arg)
    small = log_arg < 500.0
    out[small] = np.real(lambertw(np.exp(log_arg[small])))
    # asymptotic W(x) for huge x: L1 - L2 + L2/L1, refined by Newton on w + ln w = log_arg
    lg = log_arg[~small]
    w = lg - np.log(lg)
    for _ in range(6):
        w = w - (w + np.log(w) - lg) / (1.0 + 1.0 / w)
    out[~small] = w
    out = out * saturation_intensity
    return float(out) if out.ndim == 0 else out


def bessel_i0_series(x, tol=1e-16):
    """Modified Bessel function I0(x) from its power series sum (x^2/4)^k / (k!)^2."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    q = 0.25 * xa * xa
    term = np.ones_like(xa)
    total = np.ones_like(xa)
    k = 0
    while True:
        k += 1
        term = term * q / (k * k)
        total = total + term
        if np.all(term <= tol * total) or k > 500:
            break
    return total if np.ndim(x) else float(total[0])


def linear_regime_polarization(z, tau, seed_polarization, length_observer, tr_observer):
    """P0 I0(2 sqrt(tau z / (L T_R))) for a uniform seed, undepleted inversion.

    Solves d^2P/(dtau dz) = P/(L T_R) with P = P0 on z = 0 and on tau = 0.
    """
    za = np.asarray(z, dtype=float)
    ta = np.asarray(tau, dtype=float)
    if np.any(za < 0) or np.any(ta < 0):
        raise DomainError("z and tau must be >= 0")
    arg = 2.0 * np.sqrt(ta * za / (length_observer * tr_observer))
    return seed_polarization * bessel_i0_series(arg)


def delay_time_estimate(tr_observer, tipping_angle):
    """Order-of-magnitude burst delay (T_R/4) ln^2(theta0 / 2 pi). Heuristic only."""
    if not (0 < tipping_angle < 1):
        raise DomainError("tipping angle must lie in (0, 1)")
    if not tr_observer > 0:
        raise DomainError("T_R must be positive")
    return 0.25 * tr_observer * math.log(tipping_angle / (2.0 * math.pi)) ** 2


def unsaturated_seed_intensity(dipole_rest, t2, tipping_angle):
    """Effective input intensity of the polarisation-pump seed.

    With the default pump Lambda_P = n0 d' sin(theta0)/T2 and an undepleted
    inversion, the steady field obeys dE/dz = (alpha/2) E + const, so
    I(L) = I_seed (exp(alpha L / 2) - 1)^2 with
    I_seed = (c eps0 / 2) (hbar sin(theta0) / (2 d' T2))^2.
    """
    amp = CONST.hbar * math.sin(tipping_angle) / (2.0 * dipole_rest * t2)
    return 0.5 * CONST.c * CONST.eps0 * amp * amp


def unsaturated_plateau(dipole_rest, t2, tipping_angle, gain_length):
    """Endfire steady intensity of the seeded unsaturated maser (see above)."""
    return unsaturated_seed_intensity(dipole_rest, t2, tipping_angle) * math.expm1(0.5 * gain_length) ** 2
