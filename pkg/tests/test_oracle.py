import math
from fractions import Fraction

import numpy as np
import pytest

from riccatube import (CustomModel, SingularModel, TeukolskyModel,
                       frobenius_start, frobenius_start_model,
                       integrate_riccati, integrate_sl, pole_expansion)
from riccatube.quadrature import cumulative_quad


def const_model(c):
    return CustomModel(lambda u, order: [c] + [0.0] * order,
                       domain=(-math.inf, math.inf), label=f"V={c}")


class TestSturmLiouville:
    def test_free_particle(self):
        tr = integrate_sl(const_model(0.0), (0.0, 3.0), 0.0, 1.0,
                          grid=np.linspace(0, 3, 31))
        assert np.max(np.abs(tr.phi - tr.u)) <= 1e-12

    def test_sinh(self):
        tr = integrate_sl(const_model(1.0), (0.0, 5.0), 0.0, 1.0,
                          grid=np.linspace(0, 5, 26))
        assert abs(tr.phi[-1] - math.sinh(5.0)) <= 1e-11 * math.sinh(5.0)

    def test_wronskian_drift(self):
        # oscillatory run (Re V < 0) so |phi| stays O(1) and the Wronskian
        # difference is not hit by exponential-growth cancellation
        m = TeukolskyModel(5.0 + 0.5j, Fraction(2), Fraction(1), 80.0 + 1.0j)
        grid = np.linspace(0.6, math.pi - 0.6, 50)
        t1 = integrate_sl(m, (grid[0], grid[-1]), 1.0, 0.0, grid=grid)
        t2 = integrate_sl(m, (grid[0], grid[-1]), 0.0, 1.0, grid=grid)
        w = t1.phi * t2.dphi - t1.dphi * t2.phi
        assert np.max(np.abs(w - w[0])) <= 1e-9 * abs(w[0])

    def test_energy_identity(self):
        # d/du (|phi|^2 Im y) = Im V |phi|^2, integrated at solver accuracy
        m = TeukolskyModel(3.0 + 0.3j, Fraction(1), Fraction(0), 14.0 + 1.0j)
        grid = np.linspace(0.4, 2.6, 80)
        tr = integrate_sl(m, (grid[0], grid[-1]), 1.0, 0.5 + 0.2j, grid=grid,
                          with_energy=True)
        lhs = (np.conjugate(tr.phi) * tr.dphi).imag
        rhs = tr.events[-1]["values"]
        scale = np.max(np.abs(lhs))
        assert np.max(np.abs((lhs - lhs[0]) - rhs)) <= 1e-8 * scale

    def test_self_convergence(self):
        m = TeukolskyModel(10.0 + 1.0j, Fraction(1), Fraction(1), 30.0)
        a, b = 0.5, 2.0
        t1 = integrate_sl(m, (a, b), 1.0, 1.0j, grid=[a, b], rtol=1e-11)
        t2 = integrate_sl(m, (a, b), 1.0, 1.0j, grid=[a, b], rtol=0.5e-11)
        scale = abs(t1.phi[-1])
        assert abs(t1.phi[-1] - t2.phi[-1]) <= 10 * 1e-11 * scale


class TestRiccati:
    def test_fixed_point(self):
        zeta = 1.0 + 0.5j
        tr = integrate_riccati(const_model(zeta ** 2), (0.0, 4.0), zeta,
                               grid=np.linspace(0, 4, 21))
        assert np.max(np.abs(tr.y - zeta)) <= 1e-10

    def test_pole_transparency_tan(self):
        # V = -1: y(u) = -tan(u) from y(0) = 0 blows up at pi/2 and continues
        tr = integrate_riccati(const_model(-1.0), (0.0, 3.0), 0.0,
                               grid=np.array([0.0, 0.7, 1.4, 1.8, 2.5, 3.0]))
        expected = -np.tan(tr.u)
        assert np.max(np.abs(tr.y - expected)) <= 1e-9 * np.max(np.abs(expected) + 1)
        assert any(e["event"] == "pole_proximity" for e in tr.events)

    def test_imaginary_part_preserved(self):
        # Im V > 0 and Im y0 > 0 imply Im y stays positive
        m = const_model(1.0 + 2.0j)
        tr = integrate_riccati(m, (0.0, 5.0), 0.3 + 0.1j,
                               grid=np.linspace(0, 5, 200))
        assert np.all(tr.y.imag > 0)

    def test_sl_riccati_consistency(self):
        m = TeukolskyModel(4.0 + 0.5j, Fraction(1), Fraction(0), 7.0)
        grid = np.linspace(0.5, 2.0, 40)
        y0 = 0.8 + 0.9j
        tr_r = integrate_riccati(m, (0.5, 2.0), y0, grid=grid)
        tr_s = integrate_sl(m, (0.5, 2.0), 1.0, y0, grid=grid)
        y_s = tr_s.dphi / tr_s.phi
        assert np.max(np.abs(tr_r.y - y_s) / np.abs(y_s)) <= 1e-8

    def test_backward_integration(self):
        zeta = 1.0 + 1.0j
        tr = integrate_riccati(const_model(zeta ** 2), (3.0, 0.5), zeta,
                               grid=np.linspace(3.0, 0.5, 11))
        assert np.max(np.abs(tr.y - zeta)) <= 1e-9


class TestFrobenius:
    def test_recessive_exponent(self):
        for L in (0, 1, 2, 3):
            rec, dom = frobenius_start(L, [1.0 + 1.0j], 1e-3)
            u = 1e-4
            assert abs(u * rec.dphi(u) / rec.phi(u) - (0.5 + L)) <= 1e-6

    def test_L0_log_structure(self):
        rec, dom = frobenius_start(0, [0.5j], 1e-3)
        u = 1e-4
        # dominant branch ~ sqrt(u) log(u): ratio to sqrt(u) grows like log u
        ratio = dom.phi(u) / math.sqrt(u)
        assert abs(ratio - math.log(u)) <= 0.1 * abs(math.log(u))

    def test_series_satisfies_ode(self):
        zeta = 0.7 + 1.1j
        m = SingularModel(zeta, 2)
        rec, dom = frobenius_start_model(m, 1e-3)
        for br in (rec, dom):
            for u in (2e-4, 5e-4, 1e-3):
                res = br.d2phi(u) - m.value(u) * br.phi(u)
                assert abs(res) <= 1e-9 * abs(m.value(u) * br.phi(u))

    def test_seeded_oracle_consistency(self):
        # integrate the recessive branch away from the pole and compare
        # against an independently seeded run at a different start
        m = SingularModel(0.3 + 1.2j, 1)
        rec, _ = frobenius_start_model(m, 1e-3)
        u0, u1 = 1e-3, 0.5
        tr = integrate_sl(m, (u0, u1), rec.phi(u0), rec.dphi(u0),
                          grid=[u0, 0.25e0, u1])
        u0b = 5e-4
        trb = integrate_sl(m, (u0b, u1), rec.phi(u0b), rec.dphi(u0b),
                           grid=[u0b, u1])
        assert abs(tr.phi[-1] - trb.phi[-1]) <= 1e-8 * abs(tr.phi[-1])

    def test_teukolsky_frobenius(self):
        m = TeukolskyModel(5.0 + 0.5j, Fraction(2), Fraction(1), 20.0)
        rec, dom = frobenius_start_model(m, 1e-3)
        exp = pole_expansion(m)
        assert rec.rho == exp.L + 0.5
        u = 1e-3
        res = rec.d2phi(u) - m.value(u) * rec.phi(u)
        assert abs(res) <= 1e-8 * abs(m.value(u) * rec.phi(u))
