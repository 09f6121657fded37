import cmath
import math

import numpy as np
import pytest

from fixtures import const_model, linear_model
from riccatube import (CustomModel, ExactApproximant, HypothesisViolation,
                       containment_audit)
from riccatube.quadrature import cumulative_quad
from riccatube.t_method import (beta_R_from_T, concave_integral_bound,
                                e_terms, t_tube, t_tube_via_E,
                                wkb_t_estimate, wkb_t_estimate_negIm)


def exact_const_approximant(m, ytilde):
    # constant ytilde solves y' = Vt - y^2 with Vt = ytilde^2
    return ExactApproximant(m, lambda u: ytilde, lambda u: ytilde ** 2,
                            lambda u: 0.0)


class TestTTube:
    def test_zero_rhs_T_constant(self):
        # Im V = 0 and D = 0: T stays at T0 and beta, R follow the formulas
        c = -4.0
        m = const_model(c + 0j)
        ap = exact_const_approximant(m, 1j * math.sqrt(-c))
        tube = t_tube(m, ap, (0.0, 2.0), T0=1.5, n_grid=51)
        Ts = [f.extra["T"] for f in tube.frames]
        assert max(Ts) == pytest.approx(1.5, rel=1e-10)
        assert min(Ts) == pytest.approx(1.5, rel=1e-10)
        f = tube.frames[-1]
        b, r = beta_R_from_T(f.U, 1.5)
        assert f.disk.beta == pytest.approx(b, rel=1e-12)
        assert f.disk.radius == pytest.approx(r, rel=1e-12)

    def test_degenerate_T_one(self):
        c = -4.0
        m = const_model(c + 0j)
        ap = exact_const_approximant(m, 1j * 2.0)
        tube = t_tube(m, ap, (0.0, 1.0), T0=1.0, n_grid=21)
        f = tube.frames[-1]
        assert f.extra["T"] == pytest.approx(1.0, abs=1e-9)
        assert f.disk.radius <= 1e-8
        assert f.disk.beta == pytest.approx(math.sqrt(abs(f.U)), rel=1e-8)

    def test_U_positive_rejected(self):
        m = const_model(4.0 + 1.0j)  # Re V > 0, Vt = V: U = -bt^2 needs bt != 0
        ap = exact_const_approximant(m, 2.0 + 0.0j)  # bt = 0 -> U = 0
        with pytest.raises(HypothesisViolation):
            t_tube(m, ap, (0.0, 1.0))

    def test_containment_constant_potential(self):
        zeta = 1.0 + 0.8j
        m = const_model(zeta ** 2)
        ap = exact_const_approximant(m, zeta)
        tube = t_tube(m, ap, (0.0, 10.0), T0=1.3, n_grid=201)
        rep = containment_audit(tube, n_starts=100, seed=5)
        assert rep.verdict == "PASS"


class TestViaE:
    def test_identity_approximant_gives_T_one(self):
        zeta = 1.0 + 0.8j
        m = const_model(zeta ** 2)
        ap = exact_const_approximant(m, zeta)
        tube = t_tube_via_E(m, ap, (0.0, 3.0), n_grid=61)
        assert max(f.extra["T"] for f in tube.frames) == pytest.approx(1.0)
        E = e_terms(m, ap, 1.0, 0.0)
        assert all(abs(x) < 1e-14 for x in E)

    def test_ode_and_E_routes_agree(self):
        # sign-definite determinator fixture: E1+E2+E3 > 0 pointwise, so the
        # T differential equation integrates to exactly int E with the
        # boundary choice g = -(T-1)/T
        yt = -1.0 + 0.5j

        def delta(u):
            return -0.4 * (1 + 0.1 * u * u) + 2.0j * (1 + 0.2 * u)

        def delta_prime(u):
            return -0.08 * u + 0.4j

        m = CustomModel(lambda u, order: (
            [yt ** 2 + delta(u), delta_prime(u)] + [0.0] * (order + 1))[:order + 1])
        ap = ExactApproximant(m, lambda u: yt,
                              lambda u: yt ** 2, delta_prime)
        us = np.linspace(0.0, 2.0, 241)
        # check sign-definiteness of the error combination
        for u in us:
            E1, E2, E3, _ = e_terms(m, ap, u, 0.0)
            assert E1 + E2 + E3 > 0
            assert m.value(u).imag > 0
        tube = t_tube(m, ap, (0.0, 2.0), T0=1.0, grid=us)
        T_ode = np.array([f.extra["T"] for f in tube.frames])

        from scipy.interpolate import CubicSpline
        logT_spline = CubicSpline(us, np.log(T_ode))

        def g_fn(u):
            T = math.exp(float(logT_spline(u)))
            return -(T - 1.0) / T

        logT_E = cumulative_quad(
            lambda u: abs(sum(e_terms(m, ap, u, 0.0)[:3]))
            + m.value(u).imag * g_fn(u) / math.sqrt(abs(ap.U(u))), us)
        assert np.max(np.abs(logT_E - np.log(T_ode))) <= 1e-7 * max(
            1.0, float(np.max(np.log(T_ode))))

    def test_monotonicity_in_g(self):
        # enlarging g pointwise never decreases T
        m = const_model(-9.0 + 2.0j)
        ap = exact_const_approximant(m, 1j * 3.0)
        t_small = t_tube_via_E(m, ap, (0.0, 1.0), g_fn=lambda u: 0.1,
                               n_grid=41)
        t_big = t_tube_via_E(m, ap, (0.0, 1.0), g_fn=lambda u: 0.3,
                             n_grid=41)
        Ts = np.array([f.extra["T"] for f in t_small.frames])
        Tb = np.array([f.extra["T"] for f in t_big.frames])
        assert np.all(Tb >= Ts - 1e-14)
        Rs = np.array([f.disk.radius for f in t_small.frames])
        Rb = np.array([f.disk.radius for f in t_big.frames])
        assert np.all(Rb >= Rs - 1e-14)

    def test_T_at_least_one_and_beta_ge_R(self):
        m = linear_model(-100.0 + 5.0j, 0.1)
        tube, _, _ = wkb_t_estimate(m, (0.0, 2.0), epsilon=0.02, n_grid=81)
        for f in tube.frames:
            assert f.extra["T"] >= 1.0
            assert f.disk.beta >= f.disk.radius >= 0.0


class TestWkbEstimate:
    def test_bound_dominance_and_proof_constants(self):
        m = linear_model(-100.0 + 5.0j, 0.1)
        tube, bound, diag = wkb_t_estimate(m, (0.0, 2.0), epsilon=0.02,
                                           n_grid=121)
        logT = tube.meta["logT"]
        assert np.all(logT[1:] - logT[0] <= bound[1:])
        assert diag["margin_E12_le_40"] > 0
        assert diag["margin_E3_le_24"] > 0
        assert diag["margin_U_offset_3eps"] > 0
        assert diag["margin_U_below_quarter"] > 0

    def test_epsilon_cap(self):
        m = linear_model(-100.0 + 5.0j, 0.1)
        with pytest.raises(HypothesisViolation):
            wkb_t_estimate(m, (0.0, 2.0), epsilon=0.2)

    def test_sector_violation(self):
        # Re V > 0 region violates Im sqrt(V) > Re sqrt(V)
        m = linear_model(100.0 + 5.0j, 0.1)
        with pytest.raises(HypothesisViolation):
            wkb_t_estimate(m, (0.0, 2.0), epsilon=0.02)


class TestConcaveBound:
    def test_constant_profile(self):
        m = const_model(-3.0 + 0.0j)
        bound, quadrature, margin = concave_integral_bound(m, 0.0, 1.0)
        assert bound == pytest.approx(2.0 / 3.0 ** 1.5, rel=1e-12)
        assert quadrature == pytest.approx(3.0 ** -1.5, rel=1e-9)
        assert bound >= quadrature

    def test_linear_profile(self):
        m = CustomModel(lambda u, order: (
            [-(4.0 - 3.0 * u) + 0j, 3.0 + 0j] + [0.0] * (order + 1))[:order + 1])
        bound, quadrature, _ = concave_integral_bound(m, 0.0, 1.0)
        assert quadrature == pytest.approx(1.0 / 3.0, rel=1e-9)
        assert bound == pytest.approx(0.5, rel=1e-12)
        assert bound >= quadrature

    def test_dip_rejected(self):
        m = CustomModel(lambda u, order: (
            [-(4.0 - 8.0 * u * (1 - u)) + 0j, 0.0] + [0.0] * (order + 1))[:order + 1])
        with pytest.raises(HypothesisViolation):
            concave_integral_bound(m, 0.0, 1.0)


class TestNegIm:
    def _model(self, theta_deg=183.0):
        th = math.radians(theta_deg)
        def fn(u, order):
            out = [(100.0 + 2.0 * u) * cmath.exp(1j * th),
                   2.0 * cmath.exp(1j * th)]
            return (out + [0.0] * (order + 1))[:order + 1]
        return CustomModel(fn)

    def test_negative_im_tube(self):
        m = self._model()
        tube, bound, diag = wkb_t_estimate_negIm(m, (0.0, 0.05), (0.0, 0.05),
                                                 epsilon=0.02, n_grid=81)
        # the chord margin on an exactly-linear |V| profile is float noise
        for name, v in diag["margins"].items():
            tol = 1e-11 * 110.0 if name == "chord" else 0.0
            assert v >= -tol, name
        logT = tube.meta["logT"]
        assert np.all(logT[1:] - logT[0] <= bound[1:])
        assert diag["T_minus_1_cap_margin"] > 0
        rep = containment_audit(tube, n_starts=40, seed=3)
        assert rep.verdict == "PASS"

    def test_reduces_to_positive_im_with_slacker_constant(self):
        # Im V >= 0 fixture passes through the same path; the closed-form
        # cap is the 100/64 slack of the corrected route
        m = self._model(178.0)  # arg V just below 180: Im V > 0
        tube, bound, diag = wkb_t_estimate_negIm(m, (0.0, 0.05), (0.0, 0.05),
                                                 epsilon=0.02, n_grid=81)
        tube2, bound2, diag2 = wkb_t_estimate(m, (0.0, 0.05), epsilon=0.02,
                                              n_grid=81)
        assert bound[-1] == pytest.approx(bound2[-1] * 100.0 / 64.0, rel=1e-9)

    def test_hypotheses_rejected(self):
        m = self._model()
        # interval too long for the smallness hypothesis
        with pytest.raises(HypothesisViolation):
            wkb_t_estimate_negIm(m, (0.0, 1.0), (0.0, 1.0), epsilon=0.02)
