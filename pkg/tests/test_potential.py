import math
from fractions import Fraction

import numpy as np
import pytest

from riccatube import (DomainError, QuadraticModel, SingularModel,
                       TeukolskyModel, eval_model, eval_teukolsky,
                       model_from_json, model_to_json, pole_expansion)

OM = 2.0 + 0.0j


def make_model(omega=OM, k=Fraction(3, 2), s=Fraction(1, 2), lam=3.0 + 0.0j):
    return TeukolskyModel(omega, k, s, lam)


class TestTeukolsky:
    def test_collapse_at_half_pi(self):
        # cos u = 0 kills every cos term; the mu substitution leaves
        # (Omega + k)^2 - lambda - 1/2.
        m = make_model()
        v = m.value(math.pi / 2)
        expected = (2.0 + 1.5) ** 2 - 3.0 - 0.5
        assert v == pytest.approx(expected, rel=1e-14)

    def test_mirror_symmetry_grid(self):
        m = make_model(omega=1.3 + 0.4j, k=Fraction(2), s=Fraction(1),
                       lam=5.0 - 2.0j)
        mm = m.mirror()
        us = np.linspace(1e-3, math.pi - 1e-3, 1000)
        v1 = np.array([m.value(math.pi - u) for u in us])
        v2 = np.array([mm.value(u) for u in us])
        assert np.max(np.abs(v1 - v2) / np.abs(v1)) <= 1e-12

    def test_pole_limit(self):
        m = make_model(omega=7.0 + 1.0j)
        target = (float(m.k - m.s)) ** 2 - 0.25
        for e in range(2, 7):
            u = 10.0 ** -e
            val = u * u * m.value(u)
            assert abs(val - target) <= 10.0 * abs(m.omega) ** 2 * u * u + 1e-12

    def test_domain_error(self):
        m = make_model()
        for u in (0.0, -0.5, math.pi, 4.0):
            with pytest.raises(DomainError):
                m.eval(u, 0)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            TeukolskyModel(1.0, Fraction(1), Fraction(1, 2), 0.0)  # k-s not integer
        with pytest.raises(ValueError):
            TeukolskyModel(1.0, Fraction(1), Fraction(-1), 0.0)    # s < 0
        m = TeukolskyModel(1.0, Fraction(-3, 2), Fraction(1, 2), 0.0)
        assert m.pole_order_left == 2

    def test_mu_identity(self):
        m = make_model(omega=3.0 + 0.25j, lam=1.0 + 2.0j)
        s = float(m.s)
        assert m.mu == m.lam - 2.0 * m.omega * float(m.k) + s * s + 0.25

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_derivatives_match_finite_differences(self, order):
        m = make_model(omega=5.0 + 0.5j, k=Fraction(2), s=Fraction(1),
                       lam=12.0 + 1.0j)
        rng = np.random.default_rng(7)
        for u in rng.uniform(0.2, math.pi - 0.2, 25):
            h = 1e-6 * max(1.0, abs(u))
            lo = m.eval(u - h, order)[order - 1]
            hi = m.eval(u + h, order)[order - 1]
            fd = (hi - lo) / (2.0 * h)
            an = m.eval(u, order)[order]
            assert abs(an - fd) <= 1e-5 * max(1.0, abs(an))


class TestOtherModels:
    def test_quadratic_eval(self):
        m = QuadraticModel(1.0, 4.0, 0.0)
        out = m.eval(2.0, 3)
        assert out[0] == 1.0 + 4.0  # p + (q/4) u^2
        assert out[1] == 4.0
        assert out[2] == 2.0
        assert out[3] == 0.0

    def test_quadratic_derived(self):
        m = QuadraticModel(2.0 + 1.0j, -3.0 + 4.0j, 0.5j)
        assert abs(m.sqrt_q ** 2 - m.q) <= 1e-12 * abs(m.q)
        assert abs(m.a - m.p / m.sqrt_q) == 0.0
        assert abs(m.b + 4.0 * (m.a - 0.5)) == 0.0
        assert abs(m.z(1.0) - m.quartic_root_q * (1.0 - m.r)) == 0.0
        # non-principal branch is representable and consistent
        m2 = QuadraticModel(m.p, m.q, m.r, sqrt_q=-m.sqrt_q)
        assert abs(m2.a + m.a) == 0.0

    def test_singular_eval(self):
        m = SingularModel(1.0j, 1)
        assert m.value(1.0) == pytest.approx(0.75 - 1.0, abs=1e-15)
        with pytest.raises(DomainError):
            m.value(-1.0)
        with pytest.raises(DomainError):
            SingularModel(2.0, 1)  # positive real axis excluded for L > 0

    def test_dispatch_identity(self):
        m = make_model()
        u = 0.9
        assert np.array_equal(eval_model(m, u, 3), eval_teukolsky(m, u, 3))

    def test_model_derivative_fd_property(self):
        models = [QuadraticModel(1.0 + 1.0j, 2.0 - 1.0j, 0.3),
                  SingularModel(1.0 + 2.0j, 2)]
        for m in models:
            for u in (0.7, 1.3, 2.9):
                h = 1e-6 * max(1.0, abs(u))
                fd = (m.eval(u + h, 0)[0] - m.eval(u - h, 0)[0]) / (2 * h)
                an = m.eval(u, 1)[1]
                assert abs(an - fd) <= 1e-5 * max(1.0, abs(an))


class TestPoleExpansion:
    def test_oscale_slopes(self):
        # c0 = -2 s Omega - mu + O(1): the Omega-linear part of c0 + mu + 2 s Omega
        # vanishes, so |c0 - (-2 s Omega - mu)| is O(1) while |c0| grows ~ |Omega|.
        s, k = Fraction(1), Fraction(2)
        for om in (1e2, 1e3, 1e4):
            m = TeukolskyModel(om, k, s, lam=0.0)
            exp = pole_expansion(m)
            assert abs(exp.c0 - (-2.0 * float(s) * om - m.mu)) <= 5.0
            assert abs(exp.c2 - om * om) <= 5.0 * om
        # fitted slopes over the sweep
        oms = np.array([1e2, 1e3, 1e4])
        c0s, c2s = [], []
        for om in oms:
            m = TeukolskyModel(om, k, s, lam=0.0)
            # remove the lambda/mu offset so c0 scales with Omega itself
            c0s.append(abs(pole_expansion(m).c0 - (-m.mu)))
            c2s.append(abs(pole_expansion(m).c2))
        p0 = np.polyfit(np.log(oms), np.log(c0s), 1)[0]
        p2 = np.polyfit(np.log(oms), np.log(c2s), 1)[0]
        assert abs(p0 - 1.0) <= 0.05
        assert abs(p2 - 2.0) <= 0.05

    def test_L0_pole_coefficient(self):
        m = TeukolskyModel(1.0, Fraction(0), Fraction(0), 0.5)
        exp = pole_expansion(m)
        assert exp.L == 0
        u = 1e-3
        assert u * u * m.value(u) == pytest.approx(-0.25, abs=1e-5)

    def test_remainder_bound_dominates(self):
        for om, k, s, lam in [(2.0, Fraction(3, 2), Fraction(1, 2), 3.0),
                              (50.0 + 1.0j, Fraction(2), Fraction(2), 100.0 + 5.0j),
                              (200.0 + 0.5j, Fraction(1), Fraction(2), -40.0)]:
            m = TeukolskyModel(om, k, s, lam)
            exp = pole_expansion(m)
            pole = (exp.L ** 2 - 0.25)
            for u in np.geomspace(1e-4, 1.0, 60):
                rem = abs(m.value(u) - (pole / u**2 + exp.c0 + exp.c2 * u * u))
                assert rem <= exp.remainder_bound(u), f"u={u}"


class TestJsonRoundTrip:
    def test_teukolsky_roundtrip_exact(self):
        m = make_model(omega=1.234567890123456 + 0.1j, lam=-7.5 + 0.25j)
        m2 = model_from_json(model_to_json(m))
        assert m2 == m

    def test_other_variants(self):
        for m in (QuadraticModel(1.0 + 2.0j, 3.0 - 1.0j, 0.25),
                  SingularModel(1.0 + 1.0j, 3, c0=2.0 + 0.0j, c3=1.5)):
            m2 = model_from_json(model_to_json(m))
            assert model_to_json(m2) == model_to_json(m)

    def test_half_integer_strings(self):
        text = ('{"type":"teukolsky","omega":[2.0,0.0],"k":"3/2","s":"1/2",'
                '"lambda":[3.0,0.0]}')
        m = model_from_json(text)
        assert m.k == Fraction(3, 2) and m.s == Fraction(1, 2)
