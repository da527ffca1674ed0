"""Joint eigenvalue solver: the fixed-point iteration coupling the two maps.

Starting from lambda_0 = -1 + a, alternate E_n = energy_of_lambda(lambda_{n-1})
and lambda_n = lambda_of_E(E_n).  The composition is a contraction on the
admissible parameter range, so the iteration converges geometrically to the
unique connector pair (E*, lambda*).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .eigenmaps import energy_of_lambda, lambda_of_E
from .flows import FlowKind, FlowParams, equilibria
from .model import ModelParams, NormalizedParams, ParameterError
from .orbits import IntegratorControls, integrate_distinguished, mismatch_value


class ConvergenceError(RuntimeError):
    """Fixed-point iteration did not meet fix_tol within max_iter steps."""


class AdmissibilityError(ParameterError):
    """Parameters fail one of the solver's admissibility conditions."""


@dataclass(frozen=True)
class EigenResult:
    """A converged connector pair, with convergence and residual evidence."""

    E_star: float
    lambda_star: float
    kappa: float
    iterations: int
    residuals: tuple[float, float]  # (|Phi_Theta|, |Phi_Omega|)
    contraction_estimates: tuple[float, ...]
    connector_windings: tuple[float, float]
    params_echo: NormalizedParams
    converged: bool = True


@dataclass(frozen=True)
class SpectrumSummary:
    gap: tuple[float, float]
    continuous_spectrum: tuple[tuple[float, float], tuple[float, float]]
    eigenvalues: list[tuple[float, float]] = field(default_factory=list)  # (E_physical, kappa)


def _connector_windings(
    p: NormalizedParams, E: float, lam: float, c: IntegratorControls
) -> tuple[float, float]:
    """Winding numbers of the two connectors at a converged pair.

    Each connector is approximated by its forward distinguished orbit; at a
    true connector the terminal saddle is reached up to the root residual.
    """
    out = []
    for kind in (FlowKind.THETA, FlowKind.OMEGA):
        fp = FlowParams(a=p.a, kappa=abs(p.kappa), E=E, lam=lam, gamma=p.gamma)
        eq = equilibria(kind, fp)
        orb = integrate_distinguished(kind, fp, "Wminus", c)
        # Snap the far end to the saddle copy it converged to, so truncation
        # of the slow tail does not bias the winding.
        k = round((orb.y[-1] - eq.s_plus) / (2.0 * math.pi))
        y_end = eq.s_plus + 2.0 * math.pi * k
        w = eq.w0 - (y_end - orb.y[0]) / (2.0 * math.pi)
        out.append(float(w))
    return tuple(out)


def solve_ground_pair(
    p: NormalizedParams,
    c: IntegratorControls | None = None,
    max_iter: int = 50,
    fix_tol: float = 1e-10,
    lambda0: float | None = None,
    force: bool = False,
) -> EigenResult:
    """Solve for the lowest connector pair at |kappa| = 1/2.

    ``lambda0`` overrides the default seed -1 + a (used to confirm that the
    fixed point does not depend on the seed).  ``force`` skips the coupling
    admissibility check for exploratory runs outside the guaranteed range.
    """
    if c is None:
        c = IntegratorControls()
    if abs(abs(p.kappa) - 0.5) > 1e-12:
        raise ParameterError("solve_ground_pair covers kappa = +/- 1/2")
    if p.kappa < 0:
        pos = replace(p, kappa=-p.kappa)
        res = solve_ground_pair(pos, c, max_iter, fix_tol, lambda0, force)
        return mirror_eigenvalue(res, c=c)

    if not 0.0 < p.a < 0.5:
        raise AdmissibilityError(f"require 0 < a < 1/2 in mass units, got a = {p.a}")
    bound = math.sqrt(2.0 * p.a * (1.0 - 2.0 * p.a))
    if not force and not -bound < p.gamma < 0.0:
        raise AdmissibilityError(
            f"gamma = {p.gamma} outside the guaranteed range (-{bound:.6g}, 0); "
            "pass force=True to attempt anyway"
        )

    lam = -1.0 + p.a if lambda0 is None else lambda0
    E_prev: float | None = None
    steps: list[float] = []
    ratios: list[float] = []
    E = math.nan
    it = 0
    for it in range(1, max_iter + 1):
        E = energy_of_lambda(p, lam, c)
        lam = lambda_of_E(p, E, c)
        if E_prev is not None:
            step = abs(E - E_prev)
            if steps and steps[-1] > 0:
                ratios.append(step / steps[-1])
            steps.append(step)
            if step < fix_tol:
                break
        E_prev = E
    else:
        raise ConvergenceError(
            f"fixed point not reached in {max_iter} iterations; last step {steps[-1] if steps else math.nan:.3g}"
        )

    fp = FlowParams(a=p.a, kappa=p.kappa, E=E, lam=lam, gamma=p.gamma)
    res_theta = abs(mismatch_value(FlowKind.THETA, fp, c))
    res_omega = abs(mismatch_value(FlowKind.OMEGA, fp, c))
    windings = _connector_windings(p, E, lam, c)
    return EigenResult(
        E_star=E,
        lambda_star=lam,
        kappa=p.kappa,
        iterations=it,
        residuals=(res_theta, res_omega),
        contraction_estimates=tuple(ratios),
        connector_windings=windings,
        params_echo=p,
    )


def mirror_eigenvalue(
    res: EigenResult,
    verify: bool = False,
    c: IntegratorControls | None = None,
    verify_tol: float | None = None,
) -> EigenResult:
    """The spectral mirror (E, lambda, kappa) -> (-E, -lambda, -kappa).

    With ``verify=True`` both mismatch functions are re-evaluated at the
    mirrored parameters (after mapping back to the kappa > 0 chart, where the
    flows are identical) and must stay within 10x the original residuals.
    """
    if c is None:
        c = IntegratorControls()
    mirrored_params = replace(res.params_echo, kappa=-res.params_echo.kappa)
    out = EigenResult(
        E_star=-res.E_star,
        lambda_star=-res.lambda_star,
        kappa=-res.kappa,
        iterations=res.iterations,
        residuals=res.residuals,
        contraction_estimates=res.contraction_estimates,
        connector_windings=res.connector_windings,
        params_echo=mirrored_params,
        converged=res.converged,
    )
    if verify:
        tol = verify_tol if verify_tol is not None else 10.0 * max(max(res.residuals), 1e-10)
        # The flows are implemented in the kappa > 0 chart; a record with
        # kappa < 0 is verified through the mirror map (E, lambda, kappa) ->
        # (-E, -lambda, -kappa), which leaves both mismatches invariant.
        sign = 1.0 if out.kappa > 0 else -1.0
        chart = FlowParams(
            a=mirrored_params.a, kappa=abs(out.kappa), E=sign * out.E_star,
            lam=sign * out.lambda_star, gamma=mirrored_params.gamma,
        )
        for kind in (FlowKind.THETA, FlowKind.OMEGA):
            phi = abs(mismatch_value(kind, chart, c))
            if phi > tol:
                raise RuntimeError(
                    f"mirror verification failed: |Phi_{kind.value}| = {phi:.3g} > {tol:.3g}"
                )
    return out


def spectrum_summary(p: ModelParams, results: list[EigenResult]) -> SpectrumSummary:
    """Aggregate converged results in physical units with spectral metadata."""
    m = p.m
    pairs: set[tuple[float, float]] = set()
    for r in results:
        E_phys = r.E_star * r.params_echo.E_scale
        pairs.add((E_phys, r.kappa))
        pairs.add((-E_phys, -r.kappa))
    return SpectrumSummary(
        gap=(-m, m),
        continuous_spectrum=((-math.inf, -m), (m, math.inf)),
        eigenvalues=sorted(pairs),
    )


@dataclass(frozen=True)
class RootCandidate:
    """A sign-change cell from the explore scan; existence not guaranteed."""

    E: float
    lam: float
    residual_theta: float
    residual_omega: float
    guaranteed: bool = False


def explore(
    p: NormalizedParams,
    E_range: tuple[float, float] = (0.05, 0.99),
    lam_range: tuple[float, float] | None = None,
    grid: int = 24,
    c: IntegratorControls | None = None,
) -> list[RootCandidate]:
    """Scan both mismatch sign fields over an (E, lambda) grid and report the
    cells where both change sign: candidate connector pairs beyond the
    guaranteed lowest one.  Candidates carry no convergence certificate.
    """
    import numpy as np

    if c is None:
        c = IntegratorControls(rel_tol=1e-7, abs_tol=1e-9)
    if lam_range is None:
        lam_range = (-1.0 - p.a, -1.0 + p.a)
    Es = np.linspace(E_range[0], E_range[1], grid)
    lams = np.linspace(lam_range[0], lam_range[1], grid)
    phi_t = np.empty((grid, grid))
    phi_o = np.empty((grid, grid))
    for i, E in enumerate(Es):
        for j, lam in enumerate(lams):
            fp = FlowParams(a=p.a, kappa=abs(p.kappa), E=float(E), lam=float(lam), gamma=p.gamma)
            phi_t[i, j] = mismatch_value(FlowKind.THETA, fp, c)
            phi_o[i, j] = mismatch_value(FlowKind.OMEGA, fp, c)

    out: list[RootCandidate] = []
    for i in range(grid - 1):
        for j in range(grid - 1):
            st = phi_t[i:i + 2, j:j + 2]
            so = phi_o[i:i + 2, j:j + 2]
            if st.min() < 0 < st.max() and so.min() < 0 < so.max():
                out.append(
                    RootCandidate(
                        E=float(0.5 * (Es[i] + Es[i + 1])),
                        lam=float(0.5 * (lams[j] + lams[j + 1])),
                        residual_theta=float(np.abs(st).min()),
                        residual_omega=float(np.abs(so).min()),
                    )
                )
    return out
