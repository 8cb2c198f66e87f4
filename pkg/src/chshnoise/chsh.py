"""CHSH Bell operator for the two-angle x-z measurement family.

The four one-qubit observables are

    A0 = sz
    A1 = cos(theta) sz + sin(theta) sx
    B0 = cos(phi) sz + sin(phi) sx
    B1 = cos(phi - theta) sz + sin(phi - theta) sx

and the Bell value is ``-<A0B0> - <A0B1> - <A1B0> + <A1B1>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .qstate import NoiseParams, expectation, kron, pauli

TSIRELSON = 2.0 * math.sqrt(2.0)

_SX = pauli("x")
_SZ = pauli("z")


def _wrap_phi(phi: float) -> float:
    wrapped = math.remainder(phi, 2.0 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


@dataclass(frozen=True)
class MeasurementAngles:
    theta: float
    phi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError("measurement angles must be finite")

    def canonical(self) -> MeasurementAngles:
        """Equivalent angles with theta in [0, pi] and phi in (-pi, pi].

        The Bell value is invariant under (theta, phi) -> (-theta, -phi), which
        is used to fold theta into [0, pi].
        """
        theta = math.remainder(self.theta, 2.0 * math.pi)
        phi = self.phi
        if theta < 0.0:
            theta, phi = -theta, -phi
        return MeasurementAngles(theta, _wrap_phi(phi))


class BellSettings(NamedTuple):
    a0: np.ndarray
    a1: np.ndarray
    b0: np.ndarray
    b1: np.ndarray


def planar_observable(angle: float) -> np.ndarray:
    return math.cos(angle) * _SZ + math.sin(angle) * _SX


def observables(angles: MeasurementAngles) -> BellSettings:
    theta, phi = angles.theta, angles.phi
    return BellSettings(
        a0=_SZ.copy(),
        a1=planar_observable(theta),
        b0=planar_observable(phi),
        b1=planar_observable(phi - theta),
    )


def bell_value_trace(rho: np.ndarray, settings: BellSettings) -> float:
    """Bell value from traces of the state against each correlator."""
    a0, a1, b0, b1 = settings
    return (
        -expectation(rho, kron(a0, b0))
        - expectation(rho, kron(a0, b1))
        - expectation(rho, kron(a1, b0))
        + expectation(rho, kron(a1, b1))
    )


def beta_cw_closed(params: NoiseParams, angles: MeasurementAngles) -> float:
    """Closed-form Bell value of the colored+white state (Psi- sign convention)."""
    p, r = params.p, params.r
    ct, st = math.cos(angles.theta), math.sin(angles.theta)
    cp, sp = math.cos(angles.phi), math.sin(angles.phi)
    k = 2.0 * p + r
    return cp * (k * (st * st + ct) + r * ct) - sp * k * (ct - 1.0) * st


def beta_w_closed(p: float, angles: MeasurementAngles) -> float:
    """Closed form with no colored noise (r = 0)."""
    ct, st = math.cos(angles.theta), math.sin(angles.theta)
    cp, sp = math.cos(angles.phi), math.sin(angles.phi)
    return 2.0 * p * (cp * (st * st + ct) - sp * (ct - 1.0) * st)


def beta_c_closed(p: float, angles: MeasurementAngles) -> float:
    """Closed form with no white noise (r = 1 - p)."""
    ct, st = math.cos(angles.theta), math.sin(angles.theta)
    cp, sp = math.cos(angles.phi), math.sin(angles.phi)
    return cp * ((1.0 + p) * st * st + 2.0 * ct) - sp * (1.0 + p) * (ct - 1.0) * st
