import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypuio.decoupling import compute_gains, decoupled_pair
from hypuio.errors import CertificateError, InfeasibleError, PreconditionError, ValidationError
from hypuio.errors import VerificationError
from hypuio.lmi import (DETECTABLE, NONDETECTABLE, LmiProblem, StabilityCertificate,
                        assemble_big_lmi_nondetectable, assemble_F_block, assemble_Pi_positivity,
                        assemble_Q_matrix, assemble_Xi, build_vertex_set, default_epsilon,
                        diag_bounds, matrix_D, matrix_Phi, matrix_Pi, solve_detectable,
                        solve_nondetectable, verify_certificate)
from hypuio.lmi.vertices import exp_weight


def _spd(rng, n, shift=1.0):
    A = rng.normal(size=(n, n))
    return A @ A.T + shift * np.eye(n)


class TestVertices:
    def test_example1_bounds(self, plant1):
        b = diag_bounds(plant1.Lambda)
        # 1/(1+z^2) spans [1/2, 1] and e^{z} spans [1, e]
        np.testing.assert_allclose(b.lower, [0.5, 1.0], rtol=1e-12)
        np.testing.assert_allclose(b.upper, [1.0, np.e], rtol=1e-12)
        vs = build_vertex_set(b)
        assert len(vs) == 4
        corners = sorted(tuple(np.diag(D)) for D in vs)
        np.testing.assert_allclose(corners, [(0.5, 1.0), (0.5, np.e), (1.0, 1.0), (1.0, np.e)],
                                   rtol=1e-12)

    def test_constant_speeds_single_vertex(self, plant2):
        vs = build_vertex_set(diag_bounds(plant2.Lambda))
        assert len(vs) == 1
        np.testing.assert_allclose(vs.matrices[0], np.diag([1 / np.sqrt(2), 0.5]))

    def test_weighted_bounds(self, plant2):
        mu = 1.0
        b = diag_bounds(plant2.Lambda, exp_weight(mu))
        np.testing.assert_allclose(b.lower, [1 / np.sqrt(2), 0.5])
        np.testing.assert_allclose(b.upper, [np.e / np.sqrt(2), np.e / 2])
        assert len(build_vertex_set(b)) == 4

    def test_bad_bounds(self):
        with pytest.raises(ValidationError):
            build_vertex_set([1.0, 2.0], [0.5, 3.0])
        with pytest.raises(ValidationError):
            build_vertex_set([0.0], [1.0])


class TestAssembly:
    def test_Q_matrix_matches_pointwise_form(self, plant1, rng):
        P = np.diag(rng.uniform(1, 3, 2))
        for z in (0.0, 0.37, 1.0):
            lam_inv = np.diag(plant1.Lambda.inverse_diag([z])[0])
            np.testing.assert_allclose(assemble_Q_matrix(lam_inv, P, 1.7, 0.3, plant1),
                                       matrix_D(z, P, 1.7, 0.3, plant1), atol=1e-12)

    def test_Q_matrix_affine_in_D(self, plant1, rng):
        P = np.diag(rng.uniform(1, 3, 2))
        D1, D2 = np.diag(rng.uniform(0.5, 2, 2)), np.diag(rng.uniform(0.5, 2, 2))
        a = 0.3
        mix = assemble_Q_matrix(a * D1 + (1 - a) * D2, P, 2.0, 0.1, plant1)
        comb = (a * assemble_Q_matrix(D1, P, 2.0, 0.1, plant1)
                + (1 - a) * assemble_Q_matrix(D2, P, 2.0, 0.1, plant1))
        np.testing.assert_allclose(mix, comb, atol=1e-12)

    def test_F_block_design_equals_analysis(self, plant1, rng):
        P = np.diag(rng.uniform(1, 3, 2))
        Q = _spd(rng, 3)
        K1 = rng.normal(size=(3, 1))
        L = rng.normal(size=(3, 2))
        g = compute_gains(plant1, K1=K1, L=L)
        RA, _ = decoupled_pair(plant1)
        design = assemble_F_block(P, Q, 0.2, plant1, RA=RA, X=Q @ K1, J=Q @ L)
        analysis = assemble_F_block(P, Q, 0.2, plant1, F=g.F, L=L)
        np.testing.assert_allclose(design, analysis, atol=1e-12)
        np.testing.assert_allclose(design, design.T, atol=1e-12)

    def test_big_lmi_symmetric(self, plant2, rng):
        P = np.diag(rng.uniform(1, 3, 2))
        Q = _spd(rng, 3)
        Y = rng.normal(size=(3, 2))
        J = rng.normal(size=(3, 2))
        F = compute_gains(plant2).F
        D = np.diag([0.7, 0.5])
        big = assemble_big_lmi_nondetectable(0.5, D, P, Q, Y, J, 1.3, 0.8, 1.0, plant2, F)
        assert big.shape == (2 * 2 + 3 + 1 + 3 + 3,) * 2
        np.testing.assert_allclose(big, big.T, atol=1e-12)

    def test_Phi_is_Xi_plus_output_cross_term(self, plant2, rng):
        P = np.diag(rng.uniform(1, 3, 2))
        Q = _spd(rng, 3)
        Y = rng.normal(size=(3, 2))
        L = rng.normal(size=(3, 2))
        F = compute_gains(plant2).F
        mu, kappa, z = 0.8, 1.1, 0.4
        lam_inv = np.diag(plant2.Lambda.inverse_diag([z])[0])
        xi = assemble_Xi(np.exp(-mu * z), lam_inv, P, Q, Y, Q @ L, kappa, mu, plant2, F)
        phi = matrix_Phi(z, P, Q, Y, L, kappa, mu, plant2, F)
        diff = phi - xi
        cross = -lam_inv @ Y.T @ L @ plant2.N
        np.testing.assert_allclose(diff[:2, 2:4], cross, atol=1e-12)
        diff[:2, 2:4] = 0
        diff[2:4, :2] = 0
        np.testing.assert_allclose(diff, 0, atol=1e-12)

    def test_Pi_vertex_form_is_congruent(self, plant1, rng):
        P = np.diag(rng.uniform(1, 3, 2))
        Q = _spd(rng, 3)
        Y = rng.normal(size=(3, 2))
        mu, z = 0.6, 0.3
        Dhat = np.exp(mu * z) * np.diag(plant1.Lambda.inverse_diag([z])[0])
        S = np.diag([np.exp(-mu * z)] * 2 + [1.0] * 3)
        np.testing.assert_allclose(S @ assemble_Pi_positivity(Dhat, P, Q, Y) @ S,
                                   matrix_Pi(z, P, Q, Y, mu, plant1), atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.1, 10.0), st.integers(0, 10**6))
    def test_homogeneity(self, s, seed):
        from hypuio.datasets import example1
        plant = example1()
        r = np.random.default_rng(seed)
        P = np.diag(r.uniform(1, 3, 2))
        D = np.diag(r.uniform(0.5, 2, 2))
        np.testing.assert_allclose(assemble_Q_matrix(D, s * P, s * 1.5, 0.2, plant),
                                   s * assemble_Q_matrix(D, P, 1.5, 0.2, plant),
                                   rtol=1e-12, atol=1e-12)


class TestLmiProblem:
    def test_audit_passes_for_design_problem(self, plant1):
        from hypuio.lmi.solve import detectable_problem
        RA, _ = decoupled_pair(plant1)
        verts = build_vertex_set(diag_bounds(plant1.Lambda))
        prob = detectable_problem(plant1, 0.1, 1e-6, verts, RA, False)
        assert prob.audit_affine()

    def test_audit_rejects_product(self):
        prob = LmiProblem()
        P = prob.add_variable("P", (2, 2), "symmetric-positive")
        Q = prob.add_variable("Q", (2, 2), "symmetric-positive")
        prob.add_lmi("bad", P @ Q, "<<", 1e-6)
        with pytest.raises(ValidationError, match="not affine"):
            prob.audit_affine()

    def test_diagonal_variable(self):
        prob = LmiProblem()
        P = prob.add_variable("P", (3, 3), "diagonal-positive")
        assert P.shape == (3, 3)
        prob.add_lmi("pos", P, ">>", 1.0)
        sol = prob.solve()
        assert sol.feasible
        assert np.all(np.diag(sol.values["P"]) >= 1.0 - 1e-6)

    def test_unknown_tag(self):
        with pytest.raises(ValidationError):
            LmiProblem().add_variable("P", (2, 2), "weird")


class TestCertificate:
    def test_negative_P_rejected(self, design1):
        bad = dataclasses.replace(design1.certificate, P=np.diag([-1.0, 2.0]))
        with pytest.raises(CertificateError, match="P"):
            bad.check()

    def test_verify_checks_invariants_first(self, plant1, design1):
        bad = dataclasses.replace(design1.certificate, P=np.diag([-1.0, 2.0]))
        with pytest.raises(CertificateError):
            verify_certificate(plant1, design1.gains, bad)

    def test_missing_theta(self, design2):
        with pytest.raises(CertificateError, match="theta"):
            dataclasses.replace(design2.certificate, theta=None).check()

    def test_scaled(self, design1):
        c = design1.certificate.scaled(3.0)
        np.testing.assert_allclose(c.P, 3 * design1.certificate.P)
        assert c.kappa == pytest.approx(3 * design1.certificate.kappa)


class TestSolveDetectable:
    def test_feasible_and_verified(self, plant1, design1):
        cert, gains = design1
        assert cert.mode == DETECTABLE and cert.mu == pytest.approx(0.1)
        rep = verify_certificate(plant1, gains, cert)
        assert rep.passed and rep.margin >= 1e-8
        np.testing.assert_allclose(gains.K1, np.linalg.solve(cert.Q, cert.X), atol=1e-10)
        # normalization
        assert np.diag(cert.P).min() >= 1 - 1e-6

    def test_force_L_zero(self, plant1):
        cert, gains = solve_detectable(plant1, [0.1], force_L_zero=True)
        assert np.abs(gains.L).max() <= 1e-9

    def test_precondition_on_undetectable_pair(self, plant2):
        with pytest.raises(PreconditionError, match="PBH"):
            solve_detectable(plant2, [0.1])

    def test_infeasible_grid_reports_trail(self, plant1):
        with pytest.raises(InfeasibleError) as info:
            solve_detectable(plant1, [1e-3, 2e-3])
        assert [gp.mu for gp in info.value.log] == [1e-3, 2e-3]
        assert all(gp.status != "verified" for gp in info.value.log)

    def test_default_epsilon(self, plant1):
        assert default_epsilon(plant1) == pytest.approx(4e-6)

    def test_max_margin_selection(self, plant1):
        d = solve_detectable(plant1, [0.1, 1.0], selection="max_margin")
        assert len(d.log) == 2
        assert all(gp.status == "verified" for gp in d.log)

    def test_workers_match_sequential(self, plant1):
        a = solve_detectable(plant1, [0.05, 0.1, 1.0], selection="max_margin", workers=3)
        b = solve_detectable(plant1, [0.05, 0.1, 1.0], selection="max_margin")
        assert a.certificate.mu == b.certificate.mu
        assert [gp.status for gp in a.log] == [gp.status for gp in b.log]


class TestSolveNondetectable:
    def test_feasible_at_unit_pair(self, plant2, design2):
        cert, gains = design2
        assert cert.mode == NONDETECTABLE and (cert.mu, cert.theta) == (1.0, 1.0)
        rep = verify_certificate(plant2, gains, cert)
        assert rep.passed and rep.margin >= 1e-8
        assert rep.positivity.min() > 0 and rep.pointwise.max() < 0
        np.testing.assert_array_equal(gains.K1, 0)
        RA, _ = decoupled_pair(plant2)
        np.testing.assert_allclose(gains.F, RA, atol=1e-12)

    def test_gain_close_to_reference(self, design2):
        # the certificate is not unique; the reference gain is a sanity anchor only
        L_ref = np.array([[-0.01306, -0.02304], [0.008322, 0.279], [0.1568, -0.3331]])
        assert np.abs(design2.gains.L - L_ref).max() < 0.1


class TestVerify:
    def test_doubling_mu_breaks_cross_term_certificate(self, plant2, design2):
        bad = dataclasses.replace(design2.certificate, mu=2.0)
        rep = verify_certificate(plant2, design2.gains, bad)
        assert not rep.passed
        assert rep.first_violation_z is not None
        assert "FAIL" in rep.summary()

    def test_mode_mismatch(self, plant2, design1, design2):
        with pytest.raises(VerificationError, match="mode mismatch"):
            verify_certificate(plant2, design1.gains, design2.certificate)

    def test_margin_recorded(self, plant1, design1):
        rep = verify_certificate(plant1, design1.gains, design1.certificate, z_points=101)
        assert design1.certificate.verified_margin == rep.margin
        assert rep.z.size == 101

    def test_dense_grid_agrees_with_vertices(self, plant1, design1):
        # vertex feasibility implies negativity at every sampled position
        rep = verify_certificate(plant1, design1.gains, design1.certificate, z_points=5001)
        assert rep.pointwise.max() < 0
