"""The two scalar eigenvalue maps and their sensitivity formulas.

``lambda_of_E`` finds the angular separation constant at which the angular
flow has a saddles connector; ``energy_of_lambda`` does the same in energy
for the radial flow.  Both are roots of the corresponding mismatch function,
certified by a sign-change bracket.  The derivative of each map follows from
a linear variational ODE along the connector, evaluated by quadrature with a
propagator weight computed alongside the connector itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .flows import E_high, E_low, FlowKind, FlowParams
from .model import NormalizedParams, ParameterError
from .orbits import IntegrationError, IntegratorControls, _launch, mismatch_value


class NoSignChangeError(RuntimeError):
    """The mismatch has the same sign at both bracket ends."""

    def __init__(self, lo, hi, phi_lo, phi_hi):
        super().__init__(
            f"no sign change: Phi({lo:.6g}) = {phi_lo:.6g}, Phi({hi:.6g}) = {phi_hi:.6g}"
        )
        self.bracket = RootBracket(lo, hi, phi_lo, phi_hi)


class DegenerateTopError(RuntimeError):
    """The energy bracket ran into the E = 1 wall."""


class NotAConnectorError(ValueError):
    """Sensitivity quadrature was handed a non-converged (E, lambda) pair."""


@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float
    phi_lo: float
    phi_hi: float

    @property
    def has_sign_change(self) -> bool:
        return self.phi_lo * self.phi_hi < 0.0


@dataclass(frozen=True)
class RootCertificate:
    """Evidence attached to every returned root."""

    root: float
    residual: float
    bracket: RootBracket


@dataclass(frozen=True)
class SensitivityKernel:
    """Propagator samples U(0, tau) along a connector, on the native x-grid."""

    kind: FlowKind
    x: np.ndarray
    y: np.ndarray
    P: np.ndarray  # d g / d y along the connector, in slow time
    U: np.ndarray  # exp(-int_0^tau P), anchored at the domain midpoint

    def U_between(self, i: int, j: int) -> float:
        """U(tau_i, tau_j), from the cocycle property."""
        return self.U[j] / self.U[i]


def _theta_params(p: NormalizedParams, E: float, lam: float) -> FlowParams:
    return FlowParams(a=p.a, kappa=abs(p.kappa), E=E, lam=lam, gamma=p.gamma)


def _refine_root(phi, lo, hi, phi_lo, phi_hi, phi_tol, bisect_width=1e-3, max_iter=200):
    """Safeguarded bisection/secant on a certified sign-change bracket."""
    if phi_lo == 0.0:
        return lo, 0.0, RootBracket(lo, hi, phi_lo, phi_hi)
    if phi_hi == 0.0:
        return hi, 0.0, RootBracket(lo, hi, phi_lo, phi_hi)
    if phi_lo * phi_hi > 0:
        raise NoSignChangeError(lo, hi, phi_lo, phi_hi)

    x_best, f_best = (lo, phi_lo) if abs(phi_lo) < abs(phi_hi) else (hi, phi_hi)
    for _ in range(max_iter):
        if abs(f_best) < phi_tol:
            return x_best, f_best, RootBracket(lo, hi, phi_lo, phi_hi)
        if hi - lo > bisect_width:
            x = 0.5 * (lo + hi)
        else:
            # Secant step from the bracket ends, safeguarded to the interior.
            x = lo - phi_lo * (hi - lo) / (phi_hi - phi_lo)
            margin = 0.01 * (hi - lo)
            if not lo + margin <= x <= hi - margin:
                x = 0.5 * (lo + hi)
        f = phi(x)
        if abs(f) < abs(f_best):
            x_best, f_best = x, f
        if f == 0.0:
            return x, 0.0, RootBracket(lo, hi, phi_lo, phi_hi)
        if phi_lo * f < 0:
            hi, phi_hi = x, f
        else:
            lo, phi_lo = x, f
        if hi - lo < 1e-15 * max(1.0, abs(lo)):
            return x_best, f_best, RootBracket(lo, hi, phi_lo, phi_hi)
    return x_best, f_best, RootBracket(lo, hi, phi_lo, phi_hi)


def lambda_of_E(
    p: NormalizedParams,
    E: float,
    c: IntegratorControls | None = None,
    phi_tol: float = 1e-10,
    with_certificate: bool = False,
):
    """The angular eigenvalue map: the unique lambda in [-1-a, -1+a] at which
    the angular flow has a saddles connector at energy E.

    Negative kappa is handled by the mirror symmetry (E -> -E, lambda ->
    -lambda); in that case E may lie in [-1, 0].
    """
    if c is None:
        c = IntegratorControls()
    if abs(abs(p.kappa) - 0.5) > 1e-12:
        raise ParameterError("lambda_of_E covers the guaranteed regime |kappa| = 1/2")
    if p.kappa < 0:
        mirrored = NormalizedParams(a=p.a, gamma=p.gamma, kappa=-p.kappa, E_scale=p.E_scale)
        res = lambda_of_E(mirrored, -E, c, phi_tol, with_certificate)
        if with_certificate:
            lam, cert = res
            return -lam, cert
        return -res
    if not 0.0 <= E <= 1.0:
        raise ParameterError(f"E must lie in [0, 1], got {E}")
    if not 0.0 < p.a < 0.5:
        raise ParameterError(f"a must lie in (0, 1/2), got {p.a}")

    a = p.a
    if E == 1.0:
        # Explicit connector Theta = -theta at lambda = -1 + a.
        lam = -1.0 + a
        if with_certificate:
            return lam, RootCertificate(lam, 0.0, RootBracket(lam, lam, 0.0, 0.0))
        return lam

    def phi(lam):
        return mismatch_value(FlowKind.THETA, _theta_params(p, E, lam), c)

    lo, hi = -1.0 - a, -1.0 + a
    phi_lo, phi_hi = phi(lo), phi(hi)
    lam, residual, bracket = _refine_root(phi, lo, hi, phi_lo, phi_hi, phi_tol)
    if with_certificate:
        return lam, RootCertificate(lam, residual, bracket)
    return lam


def energy_bracket(p: NormalizedParams, lam: float) -> tuple[float, float]:
    """Initial energy bracket from the nullcline-transition window, clamped."""
    try:
        lo = E_low(p.a, p.gamma, lam)
        hi = E_high(p.a, p.gamma, lam)
    except ValueError:
        lo, hi = 0.05, 0.95
    if not (0.0 < lo < hi < 1.0):
        lo, hi = 0.05, 0.95
    return lo, hi


def energy_of_lambda(
    p: NormalizedParams,
    lam: float,
    c: IntegratorControls | None = None,
    phi_tol: float = 1e-10,
    with_certificate: bool = False,
    wall: float = 1.0 - 1e-9,
    growth: float = 1.2,
):
    """The radial eigenvalue map: the unique E in (0, 1) at which the radial
    flow has a saddles connector at separation constant lambda.

    The bracket starts at the nullcline-transition window [E_low, E_high] and
    grows outward geometrically until the mismatch changes sign, with hard
    walls at 0 and just below 1.
    """
    if c is None:
        c = IntegratorControls()
    if abs(abs(p.kappa) - 0.5) > 1e-12:
        raise ParameterError("energy_of_lambda covers the guaranteed regime |kappa| = 1/2")

    def phi(E):
        return mismatch_value(FlowKind.OMEGA, _theta_params(p, E, lam), c)

    lo, hi = energy_bracket(p, lam)
    phi_lo, phi_hi = phi(lo), phi(hi)
    floor = 1e-9
    for _ in range(60):
        if phi_lo * phi_hi < 0 or phi_lo == 0.0 or phi_hi == 0.0:
            break
        if lo <= floor and hi >= wall:
            if phi_hi < 0:
                raise DegenerateTopError(
                    f"mismatch still negative at E = {hi}: connector pushed against E = 1"
                )
            raise NoSignChangeError(lo, hi, phi_lo, phi_hi)
        width = hi - lo
        new_lo = max(floor, lo - (growth - 1.0) * width)
        new_hi = min(wall, hi + (growth - 1.0) * width)
        if new_lo < lo:
            lo, phi_lo = new_lo, phi(new_lo)
        if new_hi > hi:
            hi, phi_hi = new_hi, phi(new_hi)
    else:
        raise NoSignChangeError(lo, hi, phi_lo, phi_hi)

    E_star, residual, bracket = _refine_root(phi, lo, hi, phi_lo, phi_hi, phi_tol)
    if with_certificate:
        return E_star, RootCertificate(E_star, residual, bracket)
    return E_star


# --- sensitivity (derivative) formulas ---------------------------------------


def _connector_with_kernel(
    kind: FlowKind, fp: FlowParams, c: IntegratorControls, n_grid: int
) -> SensitivityKernel:
    """Integrate the connector together with the running integral of P.

    The phase ODE is augmented with z' = P / f (so that z is the slow-time
    integral of P), which removes interpolation error from the exponent of
    the propagator U(0, tau) = exp(-(z - z_mid)).

    Each half of the connector is integrated from its own saddle toward the
    midpoint: the forward orbit is unstable past the midpoint (any residual
    sends it to the far node and the propagator weight explodes), while each
    half is stable in its own integration direction.
    """
    _, x0m, _, y0m, _ = _launch(kind, fp, "Wminus", c)
    _, x0p, _, y0p, _ = _launch(kind, fp, "Wplus", c)

    if kind is FlowKind.THETA:
        def rhs(x, state):
            y, _ = state
            st, ct = math.sin(x), math.cos(x)
            sy, cy = math.sin(y), math.cos(y)
            dy = (-2.0 * fp.a * ct * cy
                  + 2.0 * (fp.a * fp.E * st - fp.kappa / st) * sy
                  + 2.0 * fp.lam)
            P = (2.0 * fp.a * st * ct * sy
                 + (2.0 * fp.a * fp.E * st * st - 2.0 * fp.kappa) * cy)
            return (dy, P / st)
        x_mid = math.pi / 2.0
    else:
        a2 = fp.a * fp.a

        def rhs(x, state):
            y, _ = state
            varpi = math.sqrt(x * x + a2)
            sy, cy = math.sin(y), math.cos(y)
            dy = (2.0 * x / varpi * cy + 2.0 * fp.lam / varpi * sy
                  + 2.0 * (fp.a * fp.kappa + fp.gamma * x) / (x * x + a2)
                  - 2.0 * fp.E)
            dz = -2.0 * x / varpi * sy + 2.0 * fp.lam / varpi * cy
            return (dy, dz)
        x_mid = 0.0

    n_half = n_grid // 2 + 1
    halves = []
    for x0, y0, xs in (
        (x0m, y0m, np.linspace(x0m, x_mid, n_half)),
        (x0p, y0p, np.linspace(x0p, x_mid, n_half)),
    ):
        sol = solve_ivp(
            rhs, (x0, x_mid), [y0, 0.0], method="DOP853",
            rtol=c.rel_tol, atol=c.abs_tol, dense_output=True,
        )
        if not sol.success:
            raise IntegrationError(f"connector integration failed: {sol.message}")
        vals = sol.sol(xs)
        # Anchor the running integral at the midpoint so that the two halves
        # share the same propagator normalization U(0, tau) = exp(-z).
        vals[1] -= vals[1, -1]
        halves.append((xs, vals[0], vals[1]))

    (xs_m, y_m, z_m), (xs_p, y_p, z_p) = halves
    xs = np.concatenate([xs_m, xs_p[::-1][1:]])
    y = np.concatenate([y_m, y_p[::-1][1:]])
    z = np.concatenate([z_m, z_p[::-1][1:]])
    U = np.exp(-z)
    if kind is FlowKind.THETA:
        st = np.sin(xs)
        sy, cy = np.sin(y), np.cos(y)
        P = (2.0 * fp.a * st * np.cos(xs) * sy
             + (2.0 * fp.a * fp.E * st * st - 2.0 * fp.kappa) * cy)
    else:
        varpi = np.sqrt(xs * xs + fp.a * fp.a)
        # slow-time P = a * (dz/dr)
        P = fp.a * (-2.0 * xs / varpi * np.sin(y) + 2.0 * fp.lam / varpi * np.cos(y))
    return SensitivityKernel(kind=kind, x=xs, y=y, P=P, U=U)


def _require_connector(kind: FlowKind, fp: FlowParams, c: IntegratorControls, tol: float):
    phi = mismatch_value(kind, fp, c)
    if abs(phi) > tol:
        raise NotAConnectorError(
            f"(E, lambda) = ({fp.E}, {fp.lam}) is not a connector: |Phi| = {abs(phi):.3g}"
        )


def dLambda_dE(
    p: NormalizedParams, E: float, lam: float,
    c: IntegratorControls | None = None,
    connector_tol: float = 1e-6,
    n_grid: int = 4001,
) -> float:
    """Derivative of the angular map along its connector; lies in [0, a)."""
    if c is None:
        c = IntegratorControls()
    fp = _theta_params(p, E, lam)
    _require_connector(FlowKind.THETA, fp, c, connector_tol)
    ker = _connector_with_kernel(FlowKind.THETA, fp, c, n_grid)
    st = np.sin(ker.x)
    # d tau = d theta / sin theta cancels one sine in each integrand.
    num = np.trapezoid(ker.U * st * (-np.sin(ker.y)), ker.x)
    den = np.trapezoid(ker.U, ker.x)
    return float(p.a * num / den)


def dE_dlambda(
    p: NormalizedParams, E: float, lam: float,
    c: IntegratorControls | None = None,
    connector_tol: float = 1e-6,
    n_grid: int = 8001,
) -> float:
    """Derivative of the radial map along its connector; magnitude below 1/a."""
    if c is None:
        c = IntegratorControls()
    fp = _theta_params(p, E, lam)
    _require_connector(FlowKind.OMEGA, fp, c, connector_tol)
    ker = _connector_with_kernel(FlowKind.OMEGA, fp, c, n_grid)
    varpi = np.sqrt(ker.x**2 + p.a**2)
    num = np.trapezoid(ker.U * np.sin(ker.y) / varpi, ker.x)
    den = np.trapezoid(ker.U, ker.x)
    return float(num / den)
