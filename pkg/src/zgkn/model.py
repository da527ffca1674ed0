"""Physical parameters, unit normalization, coordinate maps and closed-form constants.

Everything downstream of :func:`normalize` works in units where the electron
mass is 1; physical energies are recovered by multiplying with ``E_scale``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SEPARABILITY_RTOL = 1e-12


class ParameterError(ValueError):
    """Raised for physically inadmissible or malformed inputs."""


class RingSingularityError(ValueError):
    """Raised when a field is evaluated on the ring r=0, theta=pi/2."""


def _is_half_integer(kappa: float, tol: float = 1e-12) -> bool:
    return abs(2.0 * kappa - round(2.0 * kappa)) < tol and round(2.0 * kappa) % 2 != 0


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs for the ring model.

    a : ring radius (length), must be nonzero; canonicalized to a > 0.
    m : electron rest mass (inverse length), > 0.
    e : elementary charge magnitude.
    Q : ring charge.
    I : ring current.
    kappa : half-integer azimuthal quantum number.
    """

    a: float
    m: float
    e: float
    Q: float
    I: float
    kappa: float

    def __post_init__(self):
        if self.m <= 0:
            raise ParameterError(f"mass must be positive, got m={self.m}")
        if self.a == 0:
            raise ParameterError("ring radius must be nonzero")
        if not _is_half_integer(self.kappa):
            raise ParameterError(
                f"kappa must be a half-integer (..., -1/2, 1/2, ...), got {self.kappa}"
            )

    def canonicalized(self) -> tuple["ModelParams", list[str]]:
        """Map to the equivalent configuration with a > 0.

        Flipping the sign of the ring radius is a pure reorientation provided
        the current flips with it; the record lists what was applied.
        """
        applied: list[str] = []
        a, I = self.a, self.I
        if a < 0:
            a, I = -a, -I
            applied.append("flipped sign of a (and of I) to canonical orientation a > 0")
        if a == self.a and I == self.I:
            return self, applied
        return ModelParams(a=a, m=self.m, e=self.e, Q=self.Q, I=I, kappa=self.kappa), applied


@dataclass(frozen=True)
class NormalizedParams:
    """Dimensionless parameters with the mass scaled out (m = 1 internally)."""

    a: float
    gamma: float
    kappa: float
    E_scale: float

    def __post_init__(self):
        if self.a <= 0:
            raise ParameterError(f"normalized ring radius must be positive, got {self.a}")
        if not _is_half_integer(self.kappa):
            raise ParameterError(f"kappa must be a half-integer, got {self.kappa}")


@dataclass(frozen=True)
class AdmissibilityReport:
    mass_condition: bool
    coupling_condition: bool
    separability: bool
    messages: list[str] = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return self.mass_condition and self.coupling_condition and self.separability


def normalize(params: ModelParams) -> NormalizedParams:
    """Scale the mass out: a -> m*a, gamma = -e*Q, energies in units of m."""
    canon, _ = params.canonicalized()
    return NormalizedParams(
        a=canon.m * canon.a,
        gamma=-canon.e * canon.Q,
        kappa=canon.kappa,
        E_scale=canon.m,
    )


def coupling_bound(ma: float) -> float:
    """Largest admissible |eQ| for dimensionless ring radius ma in (0, 1/2)."""
    x = 2.0 * ma * (1.0 - 2.0 * ma)
    return math.sqrt(x) if x > 0 else 0.0


def check_admissibility(params: ModelParams) -> AdmissibilityReport:
    """Check the three conditions the solve pipeline requires.

    Each flag is computed independently; this never raises.
    """
    canon, applied = params.canonicalized()
    msgs = list(applied)

    ma = canon.m * canon.a
    mass_ok = 2.0 * ma < 1.0
    if not mass_ok:
        msgs.append(f"mass condition violated: 2*m*a = {2 * ma:.6g} >= 1")

    bound = coupling_bound(ma)
    eQ = abs(canon.e * canon.Q)
    coupling_ok = eQ < bound
    if not coupling_ok:
        msgs.append(
            f"coupling condition violated: |eQ| = {eQ:.6g} >= sqrt(2ma(1-2ma)) = {bound:.6g}"
        )

    target = canon.I * math.pi * canon.a
    denom = max(abs(canon.Q), abs(target), 1.0e-300)
    separable = abs(canon.Q - target) <= SEPARABILITY_RTOL * denom
    if not separable:
        msgs.append(
            f"separability violated: Q = {canon.Q:.17g} but I*pi*a = {target:.17g}"
        )

    return AdmissibilityReport(
        mass_condition=mass_ok,
        coupling_condition=coupling_ok,
        separability=separable,
        messages=msgs,
    )


def oblate_to_cylindrical(r, theta, a):
    """Map oblate-spheroidal (r, theta) to cylindrical (rho, z).

    Returns (rho, z, varpi, abs_rho_sq) where varpi = sqrt(r^2 + a^2) and
    abs_rho_sq = r^2 + a^2 cos^2(theta).  Negative r addresses the second
    sheet.  Accepts arrays.
    """
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < -1e-15) or np.any(theta > math.pi + 1e-15):
        raise ParameterError("theta must lie in [0, pi]")
    varpi = np.sqrt(r * r + a * a)
    rho = varpi * np.sin(theta)
    z = r * np.cos(theta)
    abs_rho_sq = r * r + (a * np.cos(theta)) ** 2
    return rho, z, varpi, abs_rho_sq


def winklmeier_eigenvalue(kappa: float, n: int) -> float:
    """Closed-form angular eigenvalue in the a -> 0 limit, sgn(n)(|kappa| - 1/2 + |n|)."""
    if not _is_half_integer(kappa):
        raise ParameterError(f"kappa must be a half-integer, got {kappa}")
    if n == 0:
        raise ParameterError("index n must be a nonzero integer")
    return math.copysign(1.0, n) * (abs(kappa) - 0.5 + abs(n))


def sommerfeld_potential(r, theta, a: float, Q: float, I: float):
    """Electromagnetic potential of the charged, current-carrying ring.

    Returns (A_t, A_phi, At0, At2): the coordinate components and the two
    potentially nonzero orthonormal-frame components.  At2 vanishes
    identically when Q = I*pi*a.
    """
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    _, _, varpi, abs_rho_sq = oblate_to_cylindrical(r, theta, a)
    # cos(pi/2) rounds to ~6e-17, so an exact zero test would miss the ring.
    if np.any(abs_rho_sq < (1e-12 * a) ** 2):
        raise RingSingularityError("potential is singular on the ring r=0, theta=pi/2")
    abs_rho = np.sqrt(abs_rho_sq)
    sin_t = np.sin(theta)

    A_t = -Q * r / abs_rho_sq
    A_phi = r * (I * math.pi * a * a) * sin_t**2 / abs_rho_sq

    excess = Q - I * math.pi * a
    At0 = -Q * r / (abs_rho * varpi) - excess * (a * a * r * sin_t**2) / (varpi * abs_rho**3)
    At2 = -excess * (a * r * sin_t) / abs_rho**3
    return A_t, A_phi, At0, At2
