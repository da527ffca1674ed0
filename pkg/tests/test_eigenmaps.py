import math

import numpy as np
import pytest

from zgkn.eigenmaps import (
    NotAConnectorError,
    dE_dlambda,
    dLambda_dE,
    energy_bracket,
    energy_of_lambda,
    lambda_of_E,
    _connector_with_kernel,
)
from zgkn.flows import FlowKind, FlowParams
from zgkn.model import NormalizedParams, ParameterError
from zgkn.orbits import IntegratorControls


def _np(a=0.1, gamma=-0.2, kappa=0.5):
    return NormalizedParams(a=a, gamma=gamma, kappa=kappa, E_scale=1.0)


class TestAngularMap:
    def test_unit_energy_closed_form(self):
        lam, cert = lambda_of_E(_np(), 1.0, with_certificate=True)
        assert lam == pytest.approx(-0.9, abs=1e-9)
        assert cert.residual == 0.0

    def test_monotone_with_bounded_secants(self):
        p = _np()
        Es = np.linspace(0.0, 1.0, 9)
        lams = [lambda_of_E(p, float(E)) for E in Es]
        for lam in lams:
            assert -1.1 <= lam <= -0.9
        slopes = np.diff(lams) / np.diff(Es)
        assert np.all(slopes >= -1e-9)
        assert np.all(slopes < p.a)

    def test_small_ring_limit(self):
        p = _np(a=1e-6, gamma=-1e-7)
        for E in (0.0, 0.5, 0.9):
            assert lambda_of_E(p, E) == pytest.approx(-1.0, abs=1e-5)

    def test_root_certificate(self):
        lam, cert = lambda_of_E(_np(), 0.7, with_certificate=True)
        assert abs(cert.residual) < 1e-10
        assert cert.bracket.phi_lo * cert.bracket.phi_hi < 0
        assert cert.bracket.lo <= lam <= cert.bracket.hi

    def test_mirror_consistency(self):
        p = _np()
        q = _np(kappa=-0.5)
        for E in (0.2, 0.6, 0.95):
            assert lambda_of_E(q, -E) == pytest.approx(-lambda_of_E(p, E), abs=1e-8)

    def test_energy_domain_enforced(self):
        with pytest.raises(ParameterError):
            lambda_of_E(_np(), 1.5)

    def test_generic_kappa_rejected(self):
        with pytest.raises(ParameterError):
            lambda_of_E(_np(kappa=1.5), 0.5)


class TestRadialMap:
    def test_root_in_gap_with_certificate(self):
        E, cert = energy_of_lambda(_np(), -0.9, with_certificate=True)
        assert 0.0 < E < 1.0
        assert abs(cert.residual) < 1e-10
        assert cert.bracket.phi_lo * cert.bracket.phi_hi < 0

    def test_roots_across_the_band(self):
        p = _np()
        for lam in (-1.08, -1.0, -0.92):
            E = energy_of_lambda(p, lam)
            assert 0.0 < E < 1.0

    def test_initial_bracket_is_interior(self):
        lo, hi = energy_bracket(_np(), -0.9)
        assert 0.0 < lo < hi < 1.0

    def test_weak_coupling_pushes_toward_the_gap_edge(self):
        E = energy_of_lambda(_np(gamma=-1e-6), -0.9)
        assert 1.0 - E < 1e-4


class TestSensitivities:
    def test_angular_derivative_bounds_and_finite_differences(self, params_a01):
        p = params_a01
        h = 1e-4
        for E in (0.3, 0.6, 0.9):
            lam = lambda_of_E(p, E)
            der = dLambda_dE(p, E, lam)
            assert 0.0 <= der < p.a
            fd = (lambda_of_E(p, E + h) - lambda_of_E(p, E - h)) / (2 * h)
            assert der == pytest.approx(fd, rel=1e-4, abs=1e-7)

    def test_radial_derivative_bounds_and_finite_differences(self, params_a01):
        p = params_a01
        h = 1e-4
        for lam in (-1.05, -0.95, -0.9):
            E = energy_of_lambda(p, lam)
            der = dE_dlambda(p, E, lam)
            assert abs(der) < 1.0 / p.a
            fd = (energy_of_lambda(p, lam + h) - energy_of_lambda(p, lam - h)) / (2 * h)
            assert der == pytest.approx(fd, rel=1e-4, abs=1e-7)

    def test_non_connector_input_rejected(self, params_a01):
        with pytest.raises(NotAConnectorError):
            dLambda_dE(params_a01, 0.5, -0.99)
        with pytest.raises(NotAConnectorError):
            dE_dlambda(params_a01, 0.5, -0.9)

    def test_kernel_cocycle_and_decay_limits(self, params_a01):
        p = params_a01
        c = IntegratorControls()
        E = 0.6
        lam = lambda_of_E(p, E)
        fp = FlowParams(a=p.a, kappa=p.kappa, E=E, lam=lam, gamma=p.gamma)
        ker = _connector_with_kernel(FlowKind.THETA, fp, c, 4001)
        # Cocycle: U(0, t1) U(t1, t2) = U(0, t2).
        rng = np.random.default_rng(5)
        for _ in range(20):
            i, j = sorted(rng.integers(0, len(ker.U), 2))
            assert ker.U[i] * ker.U_between(i, j) == pytest.approx(ker.U[j], rel=1e-9)
        # The linearization P tends to -2 kappa at the left saddle and +2 kappa
        # at the right one.
        assert ker.P[0] == pytest.approx(-2 * p.kappa, abs=1e-4)
        assert ker.P[-1] == pytest.approx(2 * p.kappa, abs=1e-4)

        E_rad = energy_of_lambda(p, -0.95)
        fpo = FlowParams(a=p.a, kappa=p.kappa, E=E_rad, lam=-0.95, gamma=p.gamma)
        kero = _connector_with_kernel(FlowKind.OMEGA, fpo, c, 4001)
        mu = 2 * p.a * math.sqrt(1 - E_rad**2)
        # The 2a lam cos(Omega)/varpi contribution decays only like 1/r, so
        # the asymptotic value carries an O(1/R) offset at finite truncation.
        R = c.radial_truncation(E_rad)
        tol = 4 * p.a * abs(fpo.lam) / R
        assert kero.P[0] == pytest.approx(-mu, abs=tol)
        assert kero.P[-1] == pytest.approx(mu, abs=tol)

    def test_contraction_at_the_joint_fixed_point(self, params_a01, ground_a01):
        p = params_a01
        res = ground_a01
        prod = abs(dLambda_dE(p, res.E_star, res.lambda_star)
                   * dE_dlambda(p, res.E_star, res.lambda_star))
        assert prod < 1.0
