import math

import numpy as np
import pytest

from zgkn.flows import FlowKind, FlowParams, equilibria
from zgkn.orbits import (
    IntegratorControls,
    integrate_distinguished,
    integrate_omega_in_tau,
    mismatch,
    mismatch_value,
    signed_area,
    winding_number,
    Orbit,
)

GENERIC = FlowParams(a=0.1, kappa=0.5, E=0.95, lam=-0.9, gamma=-0.2)


def _explicit(a):
    # Theta = -theta is an exact connector at E = 1, lam = -1 + a, kappa = 1/2.
    return FlowParams(a=a, kappa=0.5, E=1.0, lam=-1.0 + a)


class TestDistinguishedOrbits:
    @pytest.mark.parametrize("a", [0.1, 0.2, 0.4])
    def test_exact_angular_connector(self, a):
        orb = integrate_distinguished(FlowKind.THETA, _explicit(a), "Wminus")
        assert np.max(np.abs(orb.y + orb.x)) < 1e-6

    def test_small_ring_limit(self):
        # lam = -1 sits within O(a) of the true connector value, so the orbit
        # tracks the a = 0 solution Theta = -theta on the stable half; past
        # the midpoint the O(a) offset is amplified by the saddle instability.
        p = FlowParams(a=1e-8, kappa=0.5, E=0.5, lam=-1.0)
        orb = integrate_distinguished(FlowKind.THETA, p, "Wminus")
        half = orb.x <= math.pi / 2
        assert np.max(np.abs(orb.y[half] + orb.x[half])) < 1e-5

    def test_zero_energy_radial_launch(self):
        p = FlowParams(a=0.1, kappa=0.5, E=0.0, lam=-0.95, gamma=-0.2)
        orb = integrate_distinguished(FlowKind.OMEGA, p, "Wminus")
        assert orb.y[0] == pytest.approx(-math.pi / 2, abs=0.1)

    def test_x_samples_monotone(self):
        for which, sign in (("Wminus", 1.0), ("Wplus", -1.0)):
            orb = integrate_distinguished(FlowKind.OMEGA, GENERIC, which)
            assert np.all(sign * np.diff(orb.x) > 0)

    def test_unwrap_safety(self):
        for kind in (FlowKind.THETA, FlowKind.OMEGA):
            orb = integrate_distinguished(kind, GENERIC, "Wminus")
            assert np.max(np.abs(np.diff(orb.y))) < math.pi

    def test_invalid_branch_name(self):
        with pytest.raises(ValueError):
            integrate_distinguished(FlowKind.THETA, GENERIC, "both")


class TestWindingNumbers:
    def test_connector_winding_is_minus_half(self):
        p = _explicit(0.2)
        eq = equilibria(FlowKind.THETA, p)
        orb = integrate_distinguished(FlowKind.THETA, p, "Wminus")
        assert winding_number(orb, eq) == pytest.approx(-0.5, abs=1e-3)

    def test_node_terminated_windings_are_matching_integers(self):
        # Below the admissible band both distinguished orbits fall to nodes;
        # their winding numbers snap to the same integer and the forward orbit
        # wraps a full extra turn past the connector's saddle copy.
        p = FlowParams(a=0.1, kappa=0.5, E=0.5, lam=-1.2)
        eq = equilibria(FlowKind.THETA, p)
        wm = integrate_distinguished(FlowKind.THETA, p, "Wminus")
        wp = integrate_distinguished(FlowKind.THETA, p, "Wplus")
        for orb in (wm, wp):
            w = winding_number(orb, eq)
            assert abs(w - round(w)) < 1e-3
            assert orb.terminal.startswith("N")
        assert winding_number(wm, eq) == pytest.approx(winding_number(wp, eq), abs=1e-3)
        assert wm.cover_index == -1

    def test_constant_orbit_recovers_base_offset(self):
        eq = equilibria(FlowKind.THETA, GENERIC)
        x = np.linspace(0.1, math.pi - 0.1, 10)
        orb = Orbit(kind=FlowKind.THETA, x=x, y=np.zeros(10), origin="S-",
                    terminal="N+ (k=0)", cover_index=0,
                    launch_direction=(1.0, 0.0), interpolant=None)
        assert winding_number(orb, eq) == pytest.approx(eq.w0)


class TestMismatch:
    def test_zero_at_the_exact_connector(self):
        diag = mismatch(FlowKind.THETA, _explicit(0.2))
        assert abs(diag.mismatch) < 1e-8
        assert diag.corridor_empty

    def test_sign_change_across_the_admissible_band(self):
        a = 0.1
        phis = [
            mismatch_value(FlowKind.THETA,
                           FlowParams(a=a, kappa=0.5, E=0.5, lam=lam))
            for lam in (-1.0 - a, -1.0 + a)
        ]
        assert phis[0] * phis[1] < 0

    def test_signed_area_and_mismatch_agree_in_sign(self):
        for lam in (-1.05, -0.92):
            p = FlowParams(a=0.1, kappa=0.5, E=0.5, lam=lam)
            diag = mismatch(FlowKind.THETA, p)
            assert not diag.corridor_empty
            assert diag.signed_area * diag.mismatch > 0

    def test_node_terminated_pair_shares_a_winding_number(self):
        p = FlowParams(a=0.1, kappa=0.5, E=0.95, lam=-0.8, gamma=-0.2)
        diag = mismatch(FlowKind.OMEGA, p)
        assert not diag.corridor_empty
        assert diag.winding_minus == pytest.approx(diag.winding_plus, abs=2e-2)

    def test_continuity_in_lambda(self):
        base = mismatch_value(FlowKind.THETA, GENERIC)
        deltas = []
        for h in (1e-2, 1e-3, 1e-4):
            p = FlowParams(a=0.1, kappa=0.5, E=0.95, lam=-0.9 + h, gamma=-0.2)
            deltas.append(abs(mismatch_value(FlowKind.THETA, p) - base))
        assert deltas[0] > deltas[1] > deltas[2]
        assert deltas[2] < 0.02

    def test_refinement_convergence(self):
        coarse = IntegratorControls(rel_tol=1e-9, abs_tol=1e-11)
        fine = IntegratorControls(rel_tol=5e-10, abs_tol=1e-11)
        for kind in (FlowKind.THETA, FlowKind.OMEGA):
            d = abs(mismatch_value(kind, GENERIC, fine)
                    - mismatch_value(kind, GENERIC, coarse))
            assert d < 1e-8

    def test_launch_offset_insensitivity(self):
        base = IntegratorControls()
        tight = IntegratorControls(launch_offset=1e-7)
        d = abs(mismatch_value(FlowKind.THETA, GENERIC, tight)
                - mismatch_value(FlowKind.THETA, GENERIC, base))
        assert d < 1e-5


class TestRadialReparametrization:
    def test_slow_time_and_radius_time_paths_agree(self):
        p = GENERIC
        xi, Om = integrate_omega_in_tau(p, "Wminus", r_span=30.0)
        orb = integrate_distinguished(FlowKind.OMEGA, p, "Wminus")
        r = p.a * np.tan(xi)
        # Compare away from the slow-time launch (its seed converges only
        # algebraically in tau) and inside both integration windows.
        mask = (r > -10.0) & (r < 29.0)
        dev = np.max(np.abs(Om[mask] - orb.y_of(r[mask])))
        assert dev < 1e-8

    def test_monotone_midpoint_response_to_energy(self):
        lam = -0.95
        ys_minus, ys_plus = [], []
        for E in (0.3, 0.5, 0.7):
            p = FlowParams(a=0.1, kappa=0.5, E=E, lam=lam, gamma=-0.2)
            wm = integrate_distinguished(FlowKind.OMEGA, p, "Wminus")
            wp = integrate_distinguished(FlowKind.OMEGA, p, "Wplus")
            ys_minus.append(float(wm.y_of(0.0)))
            ys_plus.append(float(wp.y_of(0.0)))
        assert ys_minus[0] > ys_minus[1] > ys_minus[2]
        assert ys_plus[0] < ys_plus[1] < ys_plus[2]
