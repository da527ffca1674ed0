"""The two autonomous planar flows on finite cylinders and their geometry.

The angular flow lives on [0, pi] x S^1 in (theta, Theta); the radial flow on
[-pi/2, pi/2] x S^1 in (xi, Omega) with xi = arctan(r/a).  Both have the form
(x' = f(x), y' = g(x, y)) with all equilibria on the boundary circles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import ParameterError


class FlowKind(Enum):
    THETA = "theta"
    OMEGA = "omega"


class Regime(Enum):
    SUB_CRITICAL = "subcritical"
    SUPER_CRITICAL = "supercritical"
    INDETERMINATE = "indeterminate"


class DegenerateEquilibriaError(ValueError):
    """E = 1 makes the saddle/node pairs of the radial flow coalesce."""


class RangeError(ValueError):
    """Input outside the parameter range the classification formulas cover."""


@dataclass(frozen=True)
class FlowParams:
    """Parameters shared by both flows.  gamma only enters the Omega flow."""

    a: float
    kappa: float
    E: float
    lam: float
    gamma: float = 0.0

    def __post_init__(self):
        if self.a <= 0:
            raise ParameterError(f"a must be positive, got {self.a}")


@dataclass(frozen=True)
class EquilibriumSet:
    """Boundary equilibria of one flow, with linearization data.

    Angles are the y-coordinates of S-/N- (left circle) and S+/N+ (right).
    ``w0`` is the base winding offset (s+ - n-)/(2 pi); ``slope`` is the
    saddle-connector launch slope dy/dx at both saddles.
    """

    kind: FlowKind
    s_minus: float
    n_minus: float
    s_plus: float
    n_plus: float
    eigenvalues_s_minus: tuple[float, float]
    eigenvalues_s_plus: tuple[float, float]
    unstable_direction_minus: tuple[float, float]
    stable_direction_plus: tuple[float, float]
    slope: float
    w0: float


# --- right-hand sides ------------------------------------------------------

def theta_rhs(theta, Theta, p: FlowParams):
    """Angular flow in slow time: (dtheta/dtau, dTheta/dtau)."""
    st, ct = np.sin(theta), np.cos(theta)
    sT, cT = np.sin(Theta), np.cos(Theta)
    dTheta = (
        -2.0 * p.a * st * ct * cT
        + 2.0 * p.a * p.E * st * st * sT
        - 2.0 * p.kappa * sT
        + 2.0 * p.lam * st
    )
    return st, dTheta


def omega_rhs(xi, Omega, p: FlowParams):
    """Radial flow in slow time: (dxi/dtau, dOmega/dtau)."""
    sx, cx = np.sin(xi), np.cos(xi)
    sO, cO = np.sin(Omega), np.cos(Omega)
    dOmega = (
        2.0 * p.a * sx * cO
        + 2.0 * p.lam * cx * sO
        + 2.0 * p.gamma * sx * cx
        + 2.0 * p.kappa * cx * cx
        - 2.0 * p.a * p.E
    )
    return cx * cx, dOmega


def radial_rhs(r, Omega, p: FlowParams):
    """dOmega/dr for the radial phase equation (m = 1 units)."""
    varpi2 = r * r + p.a * p.a
    varpi = np.sqrt(varpi2)
    return (
        2.0 * r / varpi * np.cos(Omega)
        + 2.0 * p.lam / varpi * np.sin(Omega)
        + 2.0 * (p.a * p.kappa + p.gamma * r) / varpi2
        - 2.0 * p.E
    )


def angular_rhs(theta, Theta, p: FlowParams):
    """dTheta/dtheta for the angular phase equation; singular at theta in {0, pi}."""
    st = np.sin(theta)
    # sin(pi) is ~1e-16 in floating point; treat anything that close as the pole.
    if np.any(np.abs(st) < 1e-12):
        raise ParameterError("angular_rhs is singular at theta = 0, pi; use theta_rhs")
    return (
        -2.0 * p.a * np.cos(theta) * np.cos(Theta)
        + 2.0 * (p.a * p.E * st - p.kappa / st) * np.sin(Theta)
        + 2.0 * p.lam
    )


# --- equilibria -------------------------------------------------------------

def equilibria(kind: FlowKind, p: FlowParams) -> EquilibriumSet:
    """Boundary equilibria with eigen-data.  Assumes kappa > 0 roles."""
    if kind is FlowKind.THETA:
        # Saddles S- = (0, 0), S+ = (pi, -pi); nodes opposite.
        slope = (p.lam - p.a) / (p.kappa + 0.5)
        v = (p.kappa + 0.5, p.lam - p.a)
        nv = math.hypot(*v)
        direction = (v[0] / nv, v[1] / nv)
        return EquilibriumSet(
            kind=kind,
            s_minus=0.0,
            n_minus=math.pi,
            s_plus=-math.pi,
            n_plus=0.0,
            eigenvalues_s_minus=(1.0, -2.0 * p.kappa),
            eigenvalues_s_plus=(-1.0, 2.0 * p.kappa),
            unstable_direction_minus=direction,
            stable_direction_plus=direction,
            slope=slope,
            w0=(-math.pi - math.pi) / (2.0 * math.pi),
        )

    if not 0.0 <= p.E < 1.0:
        raise DegenerateEquilibriaError(
            f"Omega-flow equilibria require E in [0, 1), got E={p.E}"
        )
    acE = math.acos(p.E)
    mu = 2.0 * p.a * math.sqrt(1.0 - p.E * p.E)
    s_minus = -math.pi + acE
    n_minus = math.pi - acE
    s_plus = -acE
    n_plus = acE
    return EquilibriumSet(
        kind=kind,
        s_minus=s_minus,
        n_minus=n_minus,
        s_plus=s_plus,
        n_plus=n_plus,
        eigenvalues_s_minus=(0.0, -mu),
        eigenvalues_s_plus=(0.0, mu),
        unstable_direction_minus=(1.0, 0.0),
        stable_direction_plus=(1.0, 0.0),
        slope=0.0,
        w0=(s_plus - n_minus) / (2.0 * math.pi),
    )


# --- nullcline classification -----------------------------------------------

@dataclass(frozen=True)
class NullclineReport:
    kind: FlowKind
    regime: Regime
    critical_lambda: float | None = None
    E_low: float | None = None
    E_high: float | None = None
    quartic_coeffs: tuple[float, float, float, float, float] | None = None
    discriminants: dict[str, float] | None = None
    caveat: str | None = None


def E_low(a: float, gamma: float, lam: float) -> float:
    """Energy below which the radial nullcline has the pre-transition topology."""
    return (1.0 / (2.0 * a)) * (
        -lam + a + 0.5 - math.sqrt((lam + a - 0.5) ** 2 + gamma * gamma)
    )


def E_high(a: float, gamma: float, lam: float) -> float:
    """Energy above which the radial nullcline has the post-transition topology."""
    lam2 = lam * lam
    return (1.0 / (4.0 * a * a)) * (
        lam2 + 3.0 * a * a + a
        - math.sqrt((lam2 - a * a + a) ** 2 + 4.0 * a * a * gamma * gamma)
    )


def _check_paramrange(p: FlowParams) -> None:
    if not 0.0 < p.a < 0.5:
        raise RangeError(f"a = {p.a} outside (0, 1/2)")
    bound = math.sqrt(2.0 * p.a * (1.0 - 2.0 * p.a))
    # The closed forms extend continuously to gamma = -bound, so the boundary
    # is accepted here even though the guaranteed range is the open interval.
    if not -bound <= p.gamma < 0.0:
        raise RangeError(f"gamma = {p.gamma} outside (-sqrt(2a(1-2a)), 0) = (-{bound:.6g}, 0)")
    if not -1.0 - p.a <= p.lam <= -1.0 + p.a:
        raise RangeError(f"lambda = {p.lam} outside [-1-a, -1+a] = [{-1-p.a}, {-1+p.a}]")


def classify_nullclines(kind: FlowKind, p: FlowParams) -> NullclineReport:
    """Classify the nullcline topology of one flow.

    The closed forms are derived for |kappa| = 1/2; other kappa values get an
    Indeterminate report with a caveat.
    """
    if abs(abs(p.kappa) - 0.5) > 1e-12:
        return NullclineReport(
            kind=kind,
            regime=Regime.INDETERMINATE,
            caveat=f"classification formulas cover |kappa| = 1/2 only, got {p.kappa}",
        )

    if kind is FlowKind.THETA:
        lam_c = -0.5 + p.a * p.E
        if abs(p.lam) < 0.5 - p.a * p.E:
            regime = Regime.SUB_CRITICAL
        elif abs(p.lam) > 0.5 - p.a * p.E:
            regime = Regime.SUPER_CRITICAL
        else:
            regime = Regime.INDETERMINATE
        return NullclineReport(kind=kind, regime=regime, critical_lambda=lam_c)

    _check_paramrange(p)
    a, gamma, lam, E = p.a, p.gamma, p.lam, p.E
    el = E_low(a, gamma, lam)
    eh = E_high(a, gamma, lam)
    half = 0.5 - a * E
    coeffs = (
        lam * lam - half * half,                       # c0
        -2.0 * gamma * half,                           # c1
        lam * lam - gamma * gamma + a * a + 2.0 * a * half,  # c2
        2.0 * gamma * a * E,                           # c3
        a * a * (1.0 - E * E),                         # c4
    )
    disc = {
        "Delta_plus": gamma**2 - 2.0 * (1.0 - E) * (lam**2 + a**2 + a * (1.0 - 2.0 * a * E)),
        "Delta_minus": gamma**2 - 2.0 * (1.0 + E) * (lam**2 + a**2 - a * (1.0 - 2.0 * a * E)),
        "Delta_tilde_plus": gamma**2 - 2.0 * (1.0 - E) * (-2.0 * a * lam + a * (1.0 - 2.0 * a * E)),
        "Delta_tilde_minus": gamma**2 - 2.0 * (1.0 + E) * (-2.0 * a * lam - a * (1.0 - 2.0 * a * E)),
    }
    if E < el:
        regime = Regime.SUB_CRITICAL
    elif E > eh:
        regime = Regime.SUPER_CRITICAL
    else:
        regime = Regime.INDETERMINATE
    return NullclineReport(
        kind=kind,
        regime=regime,
        E_low=el,
        E_high=eh,
        quartic_coeffs=coeffs,
        discriminants=disc,
    )


# --- nullcline sampling ------------------------------------------------------

def _nullcline_quadratic(kind: FlowKind, x: np.ndarray, p: FlowParams):
    """Coefficients (A, B, C) of the half-angle quadratic A T^2 + B T + C whose
    roots T = tan(y/2) lie on the y-nullcline at column x."""
    if kind is FlowKind.THETA:
        st, ct = np.sin(x), np.cos(x)
        A = 2.0 * st * (p.lam + p.a * ct)
        B = 2.0 * (2.0 * p.a * p.E * st * st - 2.0 * p.kappa)
        C = 2.0 * st * (p.lam - p.a * ct)
    else:
        sx, cx = np.sin(x), np.cos(x)
        base = p.gamma * sx * cx + p.kappa * cx * cx - p.a * p.E
        A = base - p.a * sx
        B = 2.0 * p.lam * cx
        C = base + p.a * sx
    return A, B, C


def sample_nullclines(kind: FlowKind, p: FlowParams, grid: int = 128) -> list[np.ndarray]:
    """Sample the y-nullcline as polylines of (x, y) points.

    Solves the half-angle quadratic per column and splices the two root
    branches by nearest-neighbor continuation in y.
    """
    if grid < 16:
        raise ParameterError("grid must be at least 16 points per axis")
    if kind is FlowKind.THETA:
        xs = np.linspace(0.0, math.pi, grid)
    else:
        xs = np.linspace(-math.pi / 2.0, math.pi / 2.0, grid)

    A, B, C = _nullcline_quadratic(kind, xs, p)
    columns: list[list[float]] = []
    for Ai, Bi, Ci in zip(A, B, C):
        roots: list[float] = []
        if abs(Ai) < 1e-14:
            if abs(Bi) > 1e-14:
                roots.append(-Ci / Bi)
        else:
            disc = Bi * Bi - 4.0 * Ai * Ci
            if disc >= 0.0:
                sq = math.sqrt(disc)
                # Numerically stable pair of roots.
                q = -0.5 * (Bi + math.copysign(sq, Bi))
                roots.append(q / Ai)
                if abs(q) > 1e-300:
                    roots.append(Ci / q)
                else:
                    roots.append(0.0)
        columns.append(sorted(2.0 * math.atan(t) for t in roots))

    # Splice branches: continue each polyline to the nearest root in the next
    # column; start new polylines where branches appear.
    polylines: list[list[tuple[float, float]]] = []
    active: list[list[tuple[float, float]]] = []
    for x, ys in zip(xs, columns):
        ys = list(ys)
        next_active: list[list[tuple[float, float]]] = []
        for line in active:
            if not ys:
                polylines.append(line)
                continue
            y_prev = line[-1][1]
            j = min(range(len(ys)), key=lambda k: abs(ys[k] - y_prev))
            if abs(ys[j] - y_prev) < 0.5:
                line.append((x, ys.pop(j)))
                next_active.append(line)
            else:
                polylines.append(line)
        for y in ys:
            next_active.append([(x, y)])
        active = next_active
    polylines.extend(active)
    return [np.asarray(line) for line in polylines if len(line) >= 2]


def nullcline_g(kind: FlowKind, x, y, p: FlowParams):
    """The g-component of the chosen flow (for verifying sampled nullclines)."""
    if kind is FlowKind.THETA:
        return theta_rhs(x, y, p)[1]
    return omega_rhs(x, y, p)[1]
