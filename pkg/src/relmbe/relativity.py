"""Lorentz kinematics between the emitters' rest frame and the observer.

``beta`` is signed: positive for emitters approaching the observer, negative
for receding ones.
"""
from __future__ import annotations

import math

from .errors import DomainError
from .params import CONST

# linearised velocity-offset transform is accepted below this |dv'|/c
DV_VALIDITY = 0.01


def _check_beta(beta: float) -> None:
    if not (abs(beta) < 1.0):
        raise DomainError(f"|beta| < 1 required, got beta={beta!r}")


def lorentz_gamma(beta: float) -> float:
    _check_beta(beta)
    return 1.0 / math.sqrt(1.0 - beta * beta)


def time_factor(beta: float) -> float:
    """sqrt((1 - beta)/(1 + beta)): observer interval per rest-frame interval."""
    _check_beta(beta)
    return math.sqrt((1.0 - beta) / (1.0 + beta))


def doppler_frequency(omega0_rest: float, beta: float) -> float:
    """Observed angular frequency gamma * omega0' * (1 + beta)."""
    if not omega0_rest > 0.0:
        raise DomainError(f"omega0_rest must be positive, got {omega0_rest!r}")
    return lorentz_gamma(beta) * omega0_rest * (1.0 + beta)


def timescale_to_observer(t_rest: float, beta: float) -> float:
    if not t_rest > 0.0:
        raise DomainError(f"t_rest must be positive, got {t_rest!r}")
    return t_rest * time_factor(beta)


def intensity_boost(beta: float) -> float:
    _check_beta(beta)
    return (1.0 + beta) / (1.0 - beta)


def length_to_observer(length_rest: float, beta: float) -> float:
    if not length_rest > 0.0:
        raise DomainError(f"length_rest must be positive, got {length_rest!r}")
    return length_rest / lorentz_gamma(beta)


def velocity_offset_to_observer(dv_rest: float, beta: float) -> float:
    """Observer-frame offset from the central velocity, dv' (1 - beta^2).

    First order in dv'/c; offsets of 1% of c or more are rejected.
    """
    _check_beta(beta)
    if abs(dv_rest) >= DV_VALIDITY * CONST.c:
        raise DomainError(
            f"|dv_rest| must be < {DV_VALIDITY}c for the linearised transform, got {dv_rest!r} m/s"
        )
    return dv_rest * (1.0 - beta * beta)


def field_coupling_factor(beta: float) -> float:
    """Relativistic prefactor multiplying i omega0'/(2 c eps0) in the field equation.

    Equal to gamma * omega / omega0' = gamma * sqrt((1+beta)/(1-beta)) = 1/(1-beta).
    This is the factor for which the observer sees the rest-frame response
    with timescales scaled by sqrt((1-beta)/(1+beta)) and intensities by
    (1+beta)/(1-beta).
    """
    return lorentz_gamma(beta) * math.sqrt((1.0 + beta) / (1.0 - beta))


def channel_detuning(omega0_rest: float, dv_rest: float, beta: float, model: str = "doppler") -> float:
    """Angular detuning (rad/s, observer frame) of a velocity channel offset by dv'.

    ``"literal"`` is k * dv with k = omega/c and dv = dv'(1 - beta^2).
    ``"doppler"`` is the Doppler-shifted rest-frame detuning
    sqrt((1+beta)/(1-beta)) * omega0' dv'/c, i.e. k * dv'.
    """
    omega = doppler_frequency(omega0_rest, beta)
    k = omega / CONST.c
    if model == "literal":
        return k * velocity_offset_to_observer(dv_rest, beta)
    if model == "doppler":
        # same validity window as the literal transform
        velocity_offset_to_observer(dv_rest, beta)
        return k * dv_rest
    raise DomainError(f"unknown detuning model {model!r}")
