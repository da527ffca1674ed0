import math

import numpy as np
import pytest

from zgkn.eigenmaps import energy_of_lambda, lambda_of_E
from zgkn.model import ModelParams, NormalizedParams, ParameterError
from zgkn.orbits import IntegratorControls
from zgkn.spectrum import (
    AdmissibilityError,
    explore,
    mirror_eigenvalue,
    solve_ground_pair,
    spectrum_summary,
)


class TestFixedPoint:
    def test_ground_pair_certificates(self, params_a01, ground_a01):
        res = ground_a01
        assert res.converged
        assert 0.0 < res.E_star < 1.0
        assert -1.1 <= res.lambda_star <= -0.9
        assert res.residuals[0] < 1e-8
        assert res.residuals[1] < 1e-8
        if res.contraction_estimates:
            assert res.contraction_estimates[-1] < 1.0
        # Half-integer connector windings, radial one shifted by the
        # boundary-saddle offset acos(E)/pi from the truncated tails.
        w_theta, w_omega = res.connector_windings
        assert w_theta == pytest.approx(-0.5, abs=1e-2)
        assert w_omega == pytest.approx(-1.0 + math.acos(res.E_star) / math.pi, abs=1e-2)

    def test_seed_independence(self, params_a01, ground_a01):
        res = solve_ground_pair(params_a01, lambda0=-1.0 - params_a01.a)
        assert res.E_star == pytest.approx(ground_a01.E_star, abs=1e-8)
        assert res.lambda_star == pytest.approx(ground_a01.lambda_star, abs=1e-8)

    def test_fixed_point_certificate(self, params_a01, ground_a01):
        c = IntegratorControls(rel_tol=1e-11, abs_tol=1e-13)
        E_back = energy_of_lambda(
            params_a01, lambda_of_E(params_a01, ground_a01.E_star, c, phi_tol=1e-11),
            c, phi_tol=1e-11,
        )
        assert abs(E_back - ground_a01.E_star) < 1e-9

    def test_geometric_convergence(self, ground_a01):
        ratios = np.asarray(ground_a01.contraction_estimates)
        if len(ratios) >= 2:
            # Least-squares slope of the log step sizes is the decay rate.
            logs = np.cumsum(np.log(ratios))
            n = np.arange(1, len(logs) + 1)
            rho = math.exp(np.polyfit(n, logs, 1)[0])
            assert rho < 1.0

    def test_second_parameter_point(self):
        p = NormalizedParams(a=0.2, gamma=-0.3, kappa=0.5, E_scale=1.0)
        res = solve_ground_pair(p)
        assert res.converged
        assert 0.0 < res.E_star < 1.0
        assert -1.2 <= res.lambda_star <= -0.8
        assert max(res.residuals) < 1e-8

    def test_overcoupled_parameters_rejected_before_iteration(self):
        p = NormalizedParams(a=0.1, gamma=-0.5, kappa=0.5, E_scale=1.0)
        with pytest.raises(AdmissibilityError):
            solve_ground_pair(p)

    def test_large_ring_rejected(self):
        p = NormalizedParams(a=0.6, gamma=-0.2, kappa=0.5, E_scale=1.0)
        with pytest.raises(AdmissibilityError):
            solve_ground_pair(p)

    def test_generic_kappa_rejected(self):
        p = NormalizedParams(a=0.1, gamma=-0.2, kappa=1.5, E_scale=1.0)
        with pytest.raises(ParameterError):
            solve_ground_pair(p)


class TestMirror:
    def test_mirror_record(self, ground_a01):
        mir = mirror_eigenvalue(ground_a01)
        assert mir.E_star == -ground_a01.E_star
        assert mir.lambda_star == -ground_a01.lambda_star
        assert mir.kappa == -ground_a01.kappa

    def test_double_mirror_is_identity(self, ground_a01):
        back = mirror_eigenvalue(mirror_eigenvalue(ground_a01))
        assert back.E_star == ground_a01.E_star
        assert back.lambda_star == ground_a01.lambda_star
        assert back.kappa == ground_a01.kappa

    def test_mirror_verification(self, ground_a01):
        mirror_eigenvalue(ground_a01, verify=True, verify_tol=1e-7)

    def test_negative_kappa_solve_routes_through_the_mirror(self, ground_a01):
        p = NormalizedParams(a=0.1, gamma=-0.2, kappa=-0.5, E_scale=1.0)
        res = solve_ground_pair(p)
        assert res.E_star == pytest.approx(-ground_a01.E_star, abs=1e-9)
        assert res.lambda_star == pytest.approx(-ground_a01.lambda_star, abs=1e-9)
        assert res.kappa == -0.5


class TestSummary:
    def test_empty_results(self):
        mp = ModelParams(a=0.1, m=1.0, e=1.0, Q=0.2, I=0.2 / (math.pi * 0.1), kappa=0.5)
        s = spectrum_summary(mp, [])
        assert s.gap == (-1.0, 1.0)
        assert s.continuous_spectrum == ((-math.inf, -1.0), (1.0, math.inf))
        assert s.eigenvalues == []

    def test_denormalization_and_symmetric_closure(self, ground_a01):
        from dataclasses import replace
        mp = ModelParams(a=0.05, m=2.0, e=1.0, Q=0.2, I=0.2 / (math.pi * 0.05), kappa=0.5)
        res = replace(ground_a01,
                      params_echo=replace(ground_a01.params_echo, E_scale=2.0))
        s = spectrum_summary(mp, [res])
        energies = {E for E, _ in s.eigenvalues}
        assert 2.0 * ground_a01.E_star in energies
        assert -2.0 * ground_a01.E_star in energies
        assert energies == {-E for E in energies}
        assert all(abs(E) < mp.m for E in energies)
        assert s.gap == (-2.0, 2.0)


class TestExplore:
    def test_scan_brackets_the_known_root(self, params_a01, ground_a01):
        cands = explore(params_a01, E_range=(0.9, 0.999),
                        lam_range=(-0.95, -0.85), grid=10)
        assert cands
        assert not any(c.guaranteed for c in cands)
        dE = (0.999 - 0.9) / 9
        dl = 0.1 / 9
        best = min(cands, key=lambda c: abs(c.E - ground_a01.E_star))
        assert abs(best.E - ground_a01.E_star) <= dE
        assert abs(best.lam - ground_a01.lambda_star) <= dl
