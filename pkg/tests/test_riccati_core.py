import math

import numpy as np
import pytest

from riccatube import (CustomCenter, CustomModel, Disk, ExactApproximant,
                       HypothesisViolation, containment_audit, determinator,
                       determinator_approx, determinator_kappa,
                       gronwall_lower_bound, im_y_lower_bounds,
                       integrate_riccati, integrate_sl, invariant_disk_tube,
                       sigma_integral, wronskian)


def const_model(c):
    return CustomModel(lambda u, order: [c] + [0.0] * order, label=f"V={c}")


class TestWronskian:
    def test_antisymmetry(self):
        s = (1.2 + 0.5j, -0.3 + 1.0j)
        assert wronskian(s, s) == 0.0

    def test_free_solutions(self):
        for u in (0.0, 0.7, 2.0):
            assert wronskian((1.0, 0.0), (u, 1.0)) == 1.0

    def test_oracle_pair_drift(self):
        m = const_model(-4.0 + 1.0j)  # oscillatory, bounded solutions
        grid = np.linspace(0.0, 3.0, 50)
        t1 = integrate_sl(m, (0, 3), 1.0, 0.0, grid=grid)
        t2 = integrate_sl(m, (0, 3), 0.0, 1.0, grid=grid)
        w = [wronskian((t1.phi[i], t1.dphi[i]), (t2.phi[i], t2.dphi[i]))
             for i in range(len(grid))]
        w = np.array(w)
        assert np.max(np.abs(w - w[0])) <= 1e-9 * abs(w[0])


class TestSigma:
    def test_constant_alpha(self):
        val = sigma_integral(lambda u: 1.0, 0.0, 1.0)
        assert val == pytest.approx(math.e ** 2, rel=1e-12)

    def test_matches_phi_squared(self):
        # alpha = Re(phi'/phi) for explicit phi => sigma = |phi(u)|^2/|phi(u0)|^2
        phi = lambda u: np.exp((0.3 + 2.0j) * u + 0.1 * u * u)
        alpha = lambda u: 0.3 + 0.2 * u
        u0, u1 = 0.2, 1.7
        expected = abs(phi(u1)) ** 2 / abs(phi(u0)) ** 2
        assert sigma_integral(alpha, u0, u1) == pytest.approx(expected, rel=1e-10)

    def test_cocycle(self):
        alpha = lambda u: math.sin(3 * u) - 0.2
        s02 = sigma_integral(alpha, 0.0, 2.0)
        s01 = sigma_integral(alpha, 0.0, 1.1)
        s12 = sigma_integral(alpha, 1.1, 2.0)
        assert s02 == pytest.approx(s01 * s12, rel=1e-10)


def random_consistent_inputs(rng):
    """Random data satisfying the exact-approximant chain rules."""
    alpha = rng.normal()
    beta_tilde = rng.normal()
    im_Vt = rng.normal()
    delta = complex(rng.normal(), rng.normal())
    delta_prime = complex(rng.normal(), rng.normal())
    kappa = rng.normal()
    R = abs(rng.normal())
    case_sign = rng.choice([+1.0, -1.0])  # +: case A, -: case B
    U = delta.real - beta_tilde ** 2
    U_prime = delta_prime.real + 4 * alpha * beta_tilde ** 2 - 2 * beta_tilde * im_Vt
    im_V = im_Vt + delta.imag
    beta = beta_tilde + kappa + case_sign * R
    kappa_pm_R = kappa + case_sign * R
    return dict(alpha=alpha, beta_tilde=beta_tilde, im_Vt=im_Vt, delta=delta,
                delta_prime=delta_prime, U=U, U_prime=U_prime, im_V=im_V,
                beta=beta, kappa_pm_R=kappa_pm_R)


class TestDeterminator:
    def test_trivial_reductions(self):
        assert determinator(2.0, 3.0, 0.0, 5.0, 0.0) == 12.0
        # Vt = V: form 3 reduces to (kappa +- R) Im V
        d = determinator_kappa(1.7, 0.0, 0.0, 0.4, 2.5, 3.0)
        assert d == 2.5 * 3.0

    def test_forms_agree_randomized(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            x = random_consistent_inputs(rng)
            d1 = determinator(x["alpha"], x["U"], x["U_prime"], x["beta"],
                              x["im_V"])
            d2 = determinator_approx(x["alpha"], x["delta"], x["delta_prime"],
                                     x["beta_tilde"], x["im_Vt"], x["beta"],
                                     x["im_V"])
            d3 = determinator_kappa(x["alpha"], x["delta"], x["delta_prime"],
                                    x["beta_tilde"], x["kappa_pm_R"],
                                    x["im_V"])
            scale = max(abs(d1), abs(d2), abs(d3), 1e-12)
            assert abs(d1 - d2) <= 1e-9 * scale
            assert abs(d1 - d3) <= 1e-9 * scale


class TestComputeU:
    def test_real_trivial(self):
        assert determinator is not None
        from riccatube import compute_U, compute_U_from_approximant
        assert compute_U(5.0 + 0.0j, 0.0, 0.0) == 5.0
        assert compute_U_from_approximant(3.0 + 1.0j, 3.0 + 1.0j, 1.5) == -2.25

    def test_two_forms_agree_on_exact_approximant(self):
        from riccatube import compute_U, compute_U_from_approximant
        # ytilde = exact Riccati solution of Vt = zeta^2 (constant):
        zeta = 0.9 + 1.3j
        m = const_model(zeta ** 2 + 0.7 - 0.2j)  # V differs from Vt
        yt = lambda u: zeta  # y' = 0 = Vt - y^2
        for u in (0.0, 0.8):
            V = m.value(u)
            alpha, bt = zeta.real, zeta.imag
            # alpha' = Re Vt - alpha^2 + bt^2
            alpha_prime = (zeta ** 2).real - alpha ** 2 + bt ** 2
            u1 = compute_U(V, alpha, alpha_prime)
            u2 = compute_U_from_approximant(V, zeta ** 2, bt)
            assert abs(u1 - u2) <= 1e-9 * max(1.0, abs(u1))


class TestInvariantDiskTube:
    def test_constant_potential_containment(self):
        # V = zeta^2 with Im zeta^2 > 0; alpha = Re zeta; oracle audit.
        # The flow contracts onto the fixed point zeta where the sign
        # condition degenerates, so the two-case tube is run on a short
        # interval with strict margins (the [0,10] version of this fixture
        # lives in the T-method tests, which need no sign condition).
        zeta = 1.0 + 0.8j
        m = const_model(zeta ** 2)
        center = CustomCenter(alpha=lambda u: zeta.real,
                              alpha_prime=lambda u: 0.0,
                              alpha_second=lambda u: 0.0)
        tube = invariant_disk_tube(m, center, "B", (0.0, 1.2),
                                   grid=np.linspace(0, 1.2, 201), y0=zeta)
        assert tube.violation is None
        assert tube.all_hypotheses_pass
        rep = containment_audit(tube, n_starts=100, seed=11)
        assert rep.verdict == "PASS"
        assert rep.max_excursion <= 1e-6

    def test_negative_control(self):
        zeta = 1.0 + 0.8j
        m = const_model(zeta ** 2)
        center = CustomCenter(lambda u: zeta.real, lambda u: 0.0, lambda u: 0.0)
        tube = invariant_disk_tube(m, center, "B", (0.0, 1.2),
                                   grid=np.linspace(0, 1.2, 201), y0=zeta)
        rep = containment_audit(tube.scaled(0.5), n_starts=40, seed=3)
        assert rep.verdict == "FAIL"
        assert rep.max_excursion > 0

    def test_real_potential_degenerate_constant(self):
        # Im V = 0 and anchor constant 0: R -+ beta collapses to 0 and the
        # no-zeros hypothesis cannot hold; construction stops and reports.
        m = const_model(-1.0 + 0.0j)
        center = CustomCenter(lambda u: 0.0, lambda u: 0.0, lambda u: 0.0)
        tube = invariant_disk_tube(m, center, "A", (0.0, 1.0), constant=0.0)
        assert tube.violation is not None

    def test_real_potential_const_over_sigma(self):
        # Im V = 0: R - beta = -C/sigma exactly (case A)
        m = const_model(0.25 + 0.0j)
        a0 = 0.5
        center = CustomCenter(lambda u: a0, lambda u: 0.0, lambda u: 0.0)
        C = -0.3
        tube = invariant_disk_tube(m, center, "A", (0.0, 2.0),
                                   grid=np.linspace(0, 2, 41), constant=C)
        for f in tube.frames:
            expected = -C / f.sigma
            combo = f.extra["combo"]
            assert combo == pytest.approx(expected, rel=1e-8)

    def test_case_b_works(self):
        # Im V < 0: case B integral is positive with suitable anchor
        zeta = 1.0 - 0.8j
        m = const_model(zeta ** 2)
        center = CustomCenter(lambda u: zeta.real, lambda u: 0.0, lambda u: 0.0)
        tube = invariant_disk_tube(m, center, "B", (0.0, 6.0),
                                   grid=np.linspace(0, 6, 201), y0=zeta)
        if tube.violation is None:
            rep = containment_audit(tube, n_starts=60, seed=5)
            assert rep.verdict == "PASS"


def synthetic_tube(model, interval, alpha, radius, n=50):
    """Frame-only enclosure stub for exercising the Im-y bound formulas."""
    from riccatube import EnclosureTube, FlowFrame
    us = np.linspace(*interval, n)
    frames = [FlowFrame(u, Disk(alpha, 0.0, radius), 1.0, -1.0, 0.0)
              for u in us]
    return EnclosureTube(frames, "caseB", [], "forward", model)


class TestImYBounds:
    def _tube(self, zeta, interval):
        m = const_model(zeta ** 2)
        center = CustomCenter(lambda u: zeta.real, lambda u: 0.0, lambda u: 0.0)
        return m, invariant_disk_tube(m, center, "B", interval,
                                      grid=np.linspace(*interval, 201), y0=zeta)

    def test_bound1_certified(self):
        zeta = 0.6 + 0.9j  # Im zeta^2 = 2*0.6*0.9 > 0
        m, tube = self._tube(zeta, (0.0, 2.0))
        b1, b2 = im_y_lower_bounds(m, zeta, (0.0, 2.0), tube)
        tr = integrate_riccati(m, (0.0, 2.0), zeta, grid=np.linspace(0, 2, 100))
        for u, y in zip(tr.u, tr.y):
            assert y.imag >= b1(u) - 1e-10

    def test_v_equals_i_bound1(self):
        # V = i constant, y0 = i: oracle Im y stays above bound1 on [0, 5]
        m = const_model(1.0j)
        tube = synthetic_tube(m, (0.0, 5.0), alpha=0.9, radius=0.0)
        b1, _ = im_y_lower_bounds(m, 1.0j, (0.0, 5.0), tube)
        tr = integrate_riccati(m, (0.0, 5.0), 1.0j, grid=np.linspace(0, 5, 120))
        assert np.all(tr.y.real <= 0.9)  # the synthetic worst case is valid
        for u, y in zip(tr.u, tr.y):
            assert y.imag >= b1(u) - 1e-10

    def test_bound2_vacuous_when_re_nonpositive(self):
        m = const_model(1.0j)
        tube = synthetic_tube(m, (0.0, 2.0), alpha=-1.0, radius=0.5)
        b1, b2 = im_y_lower_bounds(m, 1.0j, (0.0, 2.0), tube)
        assert b2(1.0) == -math.inf

    def test_precondition_rejection(self):
        m = const_model(1.0j)
        tube = synthetic_tube(m, (0.0, 1.0), alpha=0.5, radius=0.1)
        with pytest.raises(HypothesisViolation):
            im_y_lower_bounds(m, 1.0 + 0.0j, (0.0, 1.0), tube)

    def test_imv_positive_required(self):
        m = const_model(1.0 - 0.5j)
        tube = synthetic_tube(m, (0.0, 1.0), alpha=0.5, radius=0.1)
        with pytest.raises(HypothesisViolation):
            im_y_lower_bounds(m, 1.0j, (0.0, 1.0), tube)


class TestGronwall:
    def test_nonnegative_imv_reduces(self):
        m = const_model(1.0 + 0.5j)
        bound, rec = gronwall_lower_bound(m, (0.0, 0.5), 2.0, c=1.0)
        C = math.exp(1.0) ** 2
        assert bound(0.5) == pytest.approx(2.0 / C, rel=1e-12)
        assert rec.status == "pass"

    def test_zero_length_degenerate(self):
        m = const_model(4.0 + 0.0j)
        bound, _ = gronwall_lower_bound(m, (1.0, 1.0), 1.3, c=0.0)
        assert bound(1.0) == pytest.approx(1.3, rel=1e-12)

    def test_hypothesis_violation(self):
        m = const_model(100.0 + 0.0j)
        with pytest.raises(HypothesisViolation):
            gronwall_lower_bound(m, (0.0, 5.0), 1.0, c=1.0)

    def test_oracle_respects_bound(self):
        # Im V < 0: bound still certified for the true flow
        m = const_model(1.0 - 0.3j)
        c = 1.2
        bound, _ = gronwall_lower_bound(m, (0.0, 1.0), 0.8, c=c)
        tr = integrate_riccati(m, (0.0, 1.0), 0.5 + 0.8j,
                               grid=np.linspace(0, 1, 50))
        for u, y in zip(tr.u, tr.y):
            assert y.imag >= bound(u) - 1e-9
