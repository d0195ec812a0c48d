import cmath
import math

import numpy as np
import pytest

from mathieuspec import (MathieuPotential, SimplenessError, assemble,
                         count_roots, discriminant, discriminant_derivative,
                         dn_via_wronskian, eig, eigenvalues_at,
                         find_critical_points, fundamental_solutions,
                         predict_double)

TWO_PI = 2.0 * math.pi
PI = math.pi
FREE = MathieuPotential(0, 0)


class TestFundamentalSolutions:
    @pytest.mark.parametrize("lam", [4 * PI ** 2, 7.3, 150.0, 2.0 + 5.0j])
    def test_free_closed_form(self, lam):
        mu = cmath.sqrt(lam)
        fd = fundamental_solutions(FREE, lam)
        assert fd.theta1 == pytest.approx(cmath.cos(mu), abs=1e-11)
        assert fd.phi1 == pytest.approx(cmath.sin(mu) / mu, abs=1e-11)
        assert fd.dphi1 == pytest.approx(cmath.cos(mu), abs=1e-11)
        assert fd.dtheta1 == pytest.approx(-mu * cmath.sin(mu), abs=1e-10)

    @pytest.mark.parametrize("pot,lam", [
        (MathieuPotential(1, 1), 55.5 + 3j),
        (MathieuPotential(2, -0.5j), -4.0),
        (MathieuPotential(1, 2), 700.0),
    ])
    def test_wronskian_certificate(self, pot, lam):
        fd = fundamental_solutions(pot, lam)
        assert fd.wronskian_defect <= 1e-10
        assert fd.est_error <= 1e-10 * (1.0 + abs(lam))

    def test_large_lambda_asymptote(self):
        # F approaches 2 cos(sqrt(lambda)) at the |mu|^-3 rate
        pot = MathieuPotential(1, 1)
        for lam in (100.0, 400.0, 2500.0, 10000.0):
            mu = math.sqrt(lam)
            gap = abs(discriminant(pot, lam) - 2.0 * math.cos(mu))
            assert gap <= 10.0 * lam ** -1.5

    def test_envelope_guard(self):
        from mathieuspec import ValidationError
        with pytest.raises(ValidationError):
            fundamental_solutions(FREE, 1e9)


class TestDiscriminantDerivative:
    def test_free_chain_rule(self):
        for lam in (7.0, 80.0, 350.0):
            mu = math.sqrt(lam)
            fp = discriminant_derivative(FREE, lam)
            assert fp == pytest.approx(-math.sin(mu) / mu, abs=1e-11)

    def test_finite_difference_oracle(self):
        pot = MathieuPotential(1, 2)
        for lam in (33.0, 151.7):
            h = 1e-5 * (1 + abs(lam))
            fdiff = (discriminant(pot, lam + h)
                     - discriminant(pot, lam - h)) / (2 * h)
            fp = discriminant_derivative(pot, lam)
            assert abs(fp - fdiff) <= 1e-6 * abs(fdiff)

    def test_cauchy_riemann(self):
        # F is entire: d/d(Re) F = -i d/d(Im) F on a grid
        pot = MathieuPotential(0.7, 1.3j)
        h = 1e-5
        for lam in (20.0 + 1j, 95.0 - 2j):
            dre = (discriminant(pot, lam + h)
                   - discriminant(pot, lam - h)) / (2 * h)
            dim = (discriminant(pot, lam + 1j * h)
                   - discriminant(pot, lam - 1j * h)) / (2j * h)
            assert abs(dre - dim) <= 1e-6 * (1 + abs(dre))


class TestEigenvaluesAt:
    def test_free_simple_root(self):
        roots = eigenvalues_at(FREE, 1.0, (0.5, 2.0))
        assert len(roots) == 1
        assert roots[0].lam == pytest.approx(1.0, abs=1e-9)
        assert roots[0].f_residual <= 1e-10

    def test_cross_module_lowest(self):
        pot = MathieuPotential(1, 1)
        sol = eig(assemble(pot, 0.0, 20))
        lam0 = sol.lambdas[np.argmin(sol.lambdas.real)]
        roots = eigenvalues_at(pot, 0.0, (lam0.real - 2, lam0.real + 2))
        assert min(abs(r.lam - lam0) for r in roots) <= 1e-8 * (1 + abs(lam0))

    def test_double_root_flagged(self):
        roots = eigenvalues_at(MathieuPotential(0, 1), 0.0,
                               ((TWO_PI) ** 2 - 3, (TWO_PI) ** 2 + 3))
        assert len(roots) == 1
        assert roots[0].lam == pytest.approx((TWO_PI) ** 2, abs=1e-7)
        assert roots[0].is_critical

    def test_count_matches_matrix(self):
        pot = MathieuPotential(1, 2)
        t = 0.9
        window = (0.0, 180.0)
        sol = eig(assemble(pot, t, 24))
        n_matrix = int(np.sum((sol.lambdas.real >= window[0])
                              & (sol.lambdas.real <= window[1])
                              & (np.abs(sol.lambdas.imag) < 6.0)))
        assert count_roots(pot, window, t=t) == n_matrix


class TestCriticalPoints:
    def test_free_band_edges(self):
        cps = find_critical_points(FREE, (1.0, 200.0), im_halfwidth=4.0)
        got = sorted(c.lambda_star.real for c in cps)
        want = [(PI * k) ** 2 for k in range(1, 5)]
        assert got == pytest.approx(want, abs=1e-6)
        for c in cps:
            assert c.is_two_periodic
            assert abs(abs(c.f_value) - 2.0) <= 1e-9

    def test_interior_degeneracy_location(self):
        # the antiperiodic collision of (1,-1) predicted near 9 pi^2
        pred = predict_double(MathieuPotential(1, -1), 1, "antiperiodic")
        offset = pred.t_value()
        cps = find_critical_points(MathieuPotential(1, -1), (80.0, 95.0),
                                   im_halfwidth=3.0)
        assert len(cps) == 1
        c = cps[0]
        assert abs(c.t_star.real - PI) == pytest.approx(offset, rel=0.05)
        assert abs(c.t_star.imag) <= 1e-9
        assert not c.is_two_periodic and c.family == "interior"

    def test_all_endpoint_eigenvalues_simple_small_product(self):
        # |ab| = 1 < 16/9: every gap extremum overshoots |F| = 2, i.e. its
        # quasimomentum is genuinely complex.  Beyond the third gap the
        # overshoot falls below double precision (the gap width decays
        # factorially), so the measurable window stops at 100.
        cps = find_critical_points(MathieuPotential(1, 1), (0.5, 100.0),
                                   im_halfwidth=5.0)
        assert len(cps) >= 3
        for c in cps:
            assert abs(c.f_value) > 2.0 + 1e-12 or abs(c.t_star.imag) > 1e-7

    def test_invariant_fprime_small(self):
        cps = find_critical_points(MathieuPotential(0, 1), (30.0, 100.0),
                                   im_halfwidth=4.0)
        for c in cps:
            fd = fundamental_solutions(MathieuPotential(0, 1), c.lambda_star)
            assert abs(fd.f_prime) <= 1e-9 * (1.0 + abs(fd.f_second))


class TestPairingIdentity:
    @pytest.mark.parametrize("pot,t", [
        (MathieuPotential(1, 2), 0.7),
        (MathieuPotential(1, -1), 2.1),
        (MathieuPotential(1 + 0.5j, 1 - 0.5j), 1.3),
    ])
    def test_boundary_identity(self, pot, t):
        # (e^{it} - theta)(e^{-it} - theta) = -phi theta' at eigenvalues
        roots = eigenvalues_at(pot, t, (0.0, 120.0))
        assert roots
        for r in roots:
            fd = fundamental_solutions(pot, r.lam)
            lhs = (cmath.exp(1j * t) - fd.theta1) * (cmath.exp(-1j * t)
                                                     - fd.theta1)
            assert abs(lhs + fd.phi1 * fd.dtheta1) <= 1e-8


class TestWronskianProjection:
    def test_free_unit(self):
        for (n, t) in ((1, 0.8), (3, 2.0), (0, 1.1)):
            d = dn_via_wronskian(FREE, n, t, (TWO_PI * n + t) ** 2)
            assert d == pytest.approx(1.0, abs=1e-10)

    def test_self_adjoint_unit(self, solvers):
        solver = solvers("sa")
        for (n, t) in ((1, 0.4), (3, 1.1), (5, 2.8)):
            lam = solver.curves.value(n, t)
            d = dn_via_wronskian(solver.pot, n, t, lam)
            assert d == pytest.approx(1.0, abs=1e-6)

    def test_dual_method_consistency(self, solvers):
        solver = solvers("asym")
        for (n, t) in ((6, 0.35), (4, 1.2), (2, 2.5)):
            lam, v, w, status = solver.band(t, n)
            assert status == "simple"
            d_vec = abs(np.vdot(w, v))
            d_wr = dn_via_wronskian(solver.pot, n, t, lam)
            assert abs(d_vec - d_wr) <= 0.05 * d_wr

    def test_two_periodic_asym_rejected(self):
        # at t = 0 the pair splitting of (1,2) band 6 sits far below the
        # reachable |F'| resolution; the closed formula must refuse
        with pytest.raises(SimplenessError):
            dn_via_wronskian(MathieuPotential(1, 2), 6, 0.0,
                             (TWO_PI * 6) ** 2)
