"""Distinguished orbits, winding numbers, signed corridor area and mismatch.

Each cylinder flow has exactly one orbit leaving the left saddle and one
entering the right saddle.  Both are integrated on the universal cover (the
phase variable is never reduced mod 2 pi), launched from the copies of the
saddles in the fundamental domain [-pi, pi).  A connector exists exactly when
the two orbits agree, which is measured by the mismatch at the domain
midpoint (theta = pi/2, resp. r = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .flows import (
    DegenerateEquilibriaError,
    EquilibriumSet,
    FlowKind,
    FlowParams,
    angular_rhs,
    equilibria,
    omega_rhs,
    radial_rhs,
)


class IntegrationError(RuntimeError):
    """The ODE solver failed to reach the far boundary."""


@dataclass(frozen=True)
class IntegratorControls:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    launch_offset: float = 1e-6
    max_step: float = math.inf
    max_steps: int = 1_000_000
    r_max: float | None = None  # Omega-flow truncation; None -> 60/sqrt(1-E^2)

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "launch_offset", "max_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def radial_truncation(self, E: float) -> float:
        if self.r_max is not None:
            return self.r_max
        if E >= 1.0:
            raise DegenerateEquilibriaError("radial truncation undefined at E >= 1")
        return min(60.0 / math.sqrt(1.0 - E * E), 1e4)


@dataclass(frozen=True)
class Orbit:
    """A sampled distinguished orbit with unwrapped phase."""

    kind: FlowKind
    x: np.ndarray
    y: np.ndarray  # unwrapped (universal cover)
    origin: str  # "S-" or "S+"
    terminal: str  # e.g. "N+ (k=0)", "S+ (k=0)"
    cover_index: int
    launch_direction: tuple[float, float]
    interpolant: object = field(repr=False, default=None)

    def y_of(self, x):
        return self.interpolant(x)


@dataclass(frozen=True)
class ConnectorDiagnostics:
    mismatch: float
    winding_minus: float | None
    winding_plus: float | None
    signed_area: float | None
    corridor_empty: bool


def _omega_boundary_value(r: float, p: FlowParams, guess: float) -> float:
    """Root of dOmega/dr = 0 nearest ``guess``: the asymptotic launch value."""
    lo, hi = guess - 0.4 * math.pi, guess + 0.4 * math.pi
    f = lambda Om: radial_rhs(r, Om, p)
    flo, fhi = f(lo), f(hi)
    if flo * fhi < 0:
        return brentq(f, lo, hi, xtol=1e-15)
    # Fall back to Newton from the guess.
    Om = guess
    for _ in range(60):
        g = f(Om)
        h = 1e-7
        dg = (f(Om + h) - f(Om - h)) / (2 * h)
        if dg == 0:
            break
        step = g / dg
        Om -= step
        if abs(step) < 1e-14:
            break
    return Om


def _solve(rhs, x0, x1, y0, c: IntegratorControls, dense: bool):
    """Adaptive integration with a wrap-safety retry.

    If any accepted step moved the phase by pi or more (which would make the
    cover unwrap ambiguous), the integration is redone with a step cap.
    """
    max_step = c.max_step
    for _ in range(2):
        sol = solve_ivp(
            rhs,
            (x0, x1),
            np.atleast_1d(y0),
            method="DOP853",
            rtol=c.rel_tol,
            atol=c.abs_tol,
            max_step=max_step,
            dense_output=dense,
        )
        if not sol.success:
            raise IntegrationError(f"integration failed: {sol.message}")
        if np.any(~np.isfinite(sol.y)):
            raise IntegrationError("non-finite state encountered during integration")
        if sol.y.shape[1] < 2 or np.max(np.abs(np.diff(sol.y[0]))) < math.pi:
            return sol
        max_step = min(max_step, 0.05)
    raise IntegrationError("phase wrapped by >= pi per step even with capped steps")


def _launch(kind: FlowKind, p: FlowParams, which: str, c: IntegratorControls):
    """Launch point (x0, y0), far end x1, and launch direction for one orbit."""
    eq = equilibria(kind, p)
    eps = c.launch_offset
    if kind is FlowKind.THETA:
        if which == "Wminus":
            x0, x1 = eps, math.pi - eps
            y0 = eq.slope * eps
            direction = eq.unstable_direction_minus
        else:
            x0, x1 = math.pi - eps, eps
            y0 = -math.pi + eq.slope * (x0 - math.pi)
            direction = eq.stable_direction_plus
    else:
        R = c.radial_truncation(p.E)
        if which == "Wminus":
            x0, x1 = -R, R
            y0 = _omega_boundary_value(x0, p, eq.s_minus)
            direction = eq.unstable_direction_minus
        else:
            x0, x1 = R, -R
            y0 = _omega_boundary_value(x0, p, eq.s_plus)
            direction = eq.stable_direction_plus
    return eq, x0, x1, y0, direction


def _classify_terminal(kind: FlowKind, eq: EquilibriumSet, which: str, y_end: float):
    """Snap the terminal value to the nearest equilibrium copy on its boundary."""
    if which == "Wminus":
        names = [("N+", eq.n_plus), ("S+", eq.s_plus)]
    else:
        names = [("N-", eq.n_minus), ("S-", eq.s_minus)]
    best = None
    for name, base in names:
        k = round((y_end - base) / (2.0 * math.pi))
        dist = abs(y_end - base - 2.0 * math.pi * k)
        if best is None or dist < best[0]:
            best = (dist, name, k)
    _, name, k = best
    return f"{name} (k={k})", int(k)


def integrate_distinguished(
    kind: FlowKind, p: FlowParams, which: str, c: IntegratorControls | None = None
) -> Orbit:
    """Integrate one of the distinguished orbits W- / W+ on the cover.

    W- starts just off the left saddle (along the unstable, resp. center,
    direction) and runs forward; W+ starts just off the right saddle and runs
    backward.  The radial flow is integrated in r over [-R, R] with the launch
    values solved from the local nullcline, which the center manifolds hug.
    """
    if which not in ("Wminus", "Wplus"):
        raise ValueError(f"which must be 'Wminus' or 'Wplus', got {which!r}")
    if c is None:
        c = IntegratorControls()
    eq, x0, x1, y0, direction = _launch(kind, p, which, c)

    if kind is FlowKind.THETA:
        rhs = lambda x, y: np.atleast_1d(angular_rhs(x, y[0], p))
    else:
        rhs = lambda x, y: np.atleast_1d(radial_rhs(x, y[0], p))

    sol = _solve(rhs, x0, x1, y0, c, dense=True)
    x = sol.t
    y = sol.y[0]
    terminal, k = _classify_terminal(kind, eq, which, y[-1])
    origin = "S-" if which == "Wminus" else "S+"
    interp = lambda xq, _s=sol: _s.sol(np.asarray(xq))[0]
    return Orbit(
        kind=kind,
        x=x,
        y=y,
        origin=origin,
        terminal=terminal,
        cover_index=k,
        launch_direction=direction,
        interpolant=interp,
    )


def winding_number(orbit: Orbit, eq: EquilibriumSet) -> float:
    """w0 - (net unwrapped phase change)/(2 pi) along the orbit.

    The orbit samples run from launch to termination; for the backward-
    integrated W+ the stored samples start at S+, so the net change is taken
    between the alpha- and omega-limit ends in flow time.
    """
    if orbit.origin == "S-":
        y_start, y_end = orbit.y[0], orbit.y[-1]
    else:
        y_start, y_end = orbit.y[-1], orbit.y[0]
    return eq.w0 - (y_end - y_start) / (2.0 * math.pi)


def mismatch_value(kind: FlowKind, p: FlowParams, c: IntegratorControls | None = None) -> float:
    """The connector mismatch y+(mid) - y-(mid); cheap path without diagnostics."""
    if c is None:
        c = IntegratorControls()
    x_mid = math.pi / 2.0 if kind is FlowKind.THETA else 0.0
    _, x0m, _, y0m, _ = _launch(kind, p, "Wminus", c)
    _, x0p, _, y0p, _ = _launch(kind, p, "Wplus", c)
    if kind is FlowKind.THETA:
        rhs = lambda x, y: np.atleast_1d(angular_rhs(x, y[0], p))
    else:
        rhs = lambda x, y: np.atleast_1d(radial_rhs(x, y[0], p))
    sol_m = _solve(rhs, x0m, x_mid, y0m, c, dense=False)
    sol_p = _solve(rhs, x0p, x_mid, y0p, c, dense=False)
    return float(sol_p.y[0][-1] - sol_m.y[0][-1])


def signed_area(w_minus: Orbit, w_plus: Orbit, n_grid: int = 2048) -> float:
    """Signed area between the two lifted distinguished orbits, trapezoid rule."""
    lo = max(w_minus.x.min(), w_plus.x.min())
    hi = min(w_minus.x.max(), w_plus.x.max())
    xs = np.linspace(lo, hi, n_grid)
    diff = w_plus.y_of(xs) - w_minus.y_of(xs)
    return float(np.trapezoid(diff, xs))


def mismatch(
    kind: FlowKind, p: FlowParams, c: IntegratorControls | None = None,
    connector_tol: float = 1e-8,
) -> ConnectorDiagnostics:
    """Full connector diagnostics: mismatch, winding numbers, signed area."""
    if c is None:
        c = IntegratorControls()
    eq = equilibria(kind, p)
    w_minus = integrate_distinguished(kind, p, "Wminus", c)
    w_plus = integrate_distinguished(kind, p, "Wplus", c)
    x_mid = math.pi / 2.0 if kind is FlowKind.THETA else 0.0
    phi = float(w_plus.y_of(x_mid) - w_minus.y_of(x_mid))
    empty = abs(phi) < connector_tol
    area = signed_area(w_minus, w_plus)
    if empty:
        k_plus = k_minus = None
    else:
        k_plus = winding_number(w_minus, eq)
        k_minus = winding_number(w_plus, eq)
    return ConnectorDiagnostics(
        mismatch=phi,
        winding_minus=k_plus,
        winding_plus=k_minus,
        signed_area=area,
        corridor_empty=empty,
    )


def integrate_omega_in_tau(
    p: FlowParams, which: str, c: IntegratorControls | None = None, r_span: float = 30.0
):
    """Radial flow in slow time (xi, Omega), for cross-checking the r-time path.

    Covers |r| <= r_span; returns (xi array, Omega array).
    """
    if c is None:
        c = IntegratorControls()
    eq = equilibria(FlowKind.OMEGA, p)
    a = p.a
    tau_span = r_span / a
    if which == "Wminus":
        t0, t1 = -tau_span, tau_span
        y0 = _omega_boundary_value(-r_span, p, eq.s_minus)
    else:
        t0, t1 = tau_span, -tau_span
        y0 = _omega_boundary_value(r_span, p, eq.s_plus)
    xi0 = math.atan2(t0, 1.0)

    def rhs(t, state):
        xi, Om = state
        return omega_rhs(xi, Om, p)

    sol = solve_ivp(
        rhs, (t0, t1), [xi0, y0], method="DOP853",
        rtol=c.rel_tol, atol=c.abs_tol, dense_output=True,
    )
    if not sol.success:
        raise IntegrationError(f"tau-time integration failed: {sol.message}")
    return sol.y[0], sol.y[1]
