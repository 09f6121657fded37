"""Shared tube fixtures for the unit and acceptance suites.

Each builder returns (tube, context) where context notes what the fixture
exercises.  The collection spans both invariant-disk cases, the T- and
kappa-methods, the lens, and the near-pole estimates (forward L = 0 and
backward L >= 1), as the containment suite requires.
"""

import cmath
import math
from fractions import Fraction

import numpy as np

from riccatube import (CustomCenter, CustomModel, ExactApproximant,
                       SingularModel, TeukolskyModel, invariant_disk_tube)
from riccatube.kappa_method import kappa_tube, lens_tube
from riccatube.special.pole import (LogBranchApproximant, pole_estimate_L0,
                                    pole_estimate_Lpos, prop71_tube)
from riccatube.t_method import (t_tube, t_tube_via_E, wkb_t_estimate,
                                wkb_t_estimate_negIm)
from riccatube.wkb import WkbApproximant


def const_model(c):
    return CustomModel(lambda u, order: [c] + [0.0] * order, label=f"V={c}")


def linear_model(base, slope_coeff):
    def fn(u, order):
        out = [base * (1 + slope_coeff * u), base * slope_coeff]
        return (out + [0.0] * (order + 1))[:order + 1]
    return CustomModel(fn)


def flagship_config(**overrides):
    from riccatube.config import PipelineConfig
    return PipelineConfig(**overrides)


def flagship_model():
    om = 200.0 + 0.5j
    return TeukolskyModel(om, Fraction(2), Fraction(2),
                          (om + 2) ** 2 - (20008.0 + 210.0j))


# -- Theorem-3.1 cases -------------------------------------------------------

def tube_case_A():
    zeta = 1.0 + 0.05j
    m = const_model(zeta ** 2)
    center = CustomCenter(lambda u: 1.01, lambda u: 0.0, lambda u: 0.0)
    tube = invariant_disk_tube(m, center, "A", (0.0, 3.0),
                               grid=np.linspace(0, 3, 201), constant=0.03,
                               tube_id="fixture-caseA")
    return tube, "invariant disk case A, constant potential"


def tube_case_B():
    zeta = 1.0 + 0.8j
    m = const_model(zeta ** 2)
    center = CustomCenter(lambda u: zeta.real, lambda u: 0.0, lambda u: 0.0)
    tube = invariant_disk_tube(m, center, "B", (0.0, 1.2),
                               grid=np.linspace(0, 1.2, 201), y0=zeta,
                               tube_id="fixture-caseB")
    return tube, "invariant disk case B, constant potential"


# -- T-method -----------------------------------------------------------------

def tube_t_ode():
    zeta = 1.0 + 0.8j
    m = const_model(zeta ** 2)
    ap = ExactApproximant(m, lambda u: zeta, lambda u: zeta ** 2,
                          lambda u: 0.0)
    tube = t_tube(m, ap, (0.0, 10.0), T0=1.3, n_grid=201)
    tube.tube_id = "fixture-t-ode"
    return tube, "T differential inequality, constant potential, Im V > 0"


def tube_t_wkb():
    m = linear_model(-100.0 + 5.0j, 0.1)
    tube, bound, diag = wkb_t_estimate(m, (0.0, 2.0), epsilon=0.02,
                                       n_grid=151)
    tube.tube_id = "fixture-t-wkb"
    return tube, "zero-correction WKB tube, evanescent sector"


def tube_t_negim():
    th = math.radians(183.0)
    def fn(u, order):
        out = [(100.0 + 2.0 * u) * cmath.exp(1j * th),
               2.0 * cmath.exp(1j * th)]
        return (out + [0.0] * (order + 1))[:order + 1]
    m = CustomModel(fn)
    tube, bound, diag = wkb_t_estimate_negIm(m, (0.0, 0.05), (0.0, 0.05),
                                             epsilon=0.02, n_grid=101)
    tube.tube_id = "fixture-t-negim"
    return tube, "corrected WKB tube with Im V < 0"


# -- kappa-method and lens -----------------------------------------------------

def tube_kappa():
    m = linear_model((10.0 + 0.5j) ** 2, 0.01)
    ap = WkbApproximant(m, (0.0, 2.0), 0.0, driven=False,
                        branch_seed="re_positive")
    tube = kappa_tube(m, ap, (0.0, 2.0), g_sigma_coeff=2.0,
                      certificate="lemma36", n_grid=201,
                      tube_id="fixture-kappa")
    return tube, "case-B kappa tube, oscillatory potential with Im V > 0"


def tube_lens():
    m = linear_model((10.0 + 0.02j) ** 2, 0.01)
    tube = lens_tube(m, (0.0, 2.0), epsilon=0.005, nu=0.06, n_grid=201,
                     tube_id="fixture-lens")
    return tube, "lens region, driven ansatz, strict ladder"


# -- near-pole estimates --------------------------------------------------------

def tube_prop71():
    zeta = cmath.exp(1j * math.radians(50.0))
    tube, _ = prop71_tube(zeta, n_grid=151)
    tube.tube_id = "fixture-prop71"
    return tube, "inner log-branch tube for the L = 0 singular model"


def tube_singular_L0():
    zeta = 2.0 + 1.5j
    m = SingularModel(zeta, 0)
    ap = LogBranchApproximant(m, zeta)
    u_hi = 0.5 / abs(zeta)
    us = np.geomspace(1e-4 * u_hi, u_hi, 151)
    tube = t_tube_via_E(m, ap, (us[0], us[-1]), grid=us,
                        tube_id="fixture-singular-L0")
    return tube, "singular model L = 0, T-method, Im zeta^2 > 0"


def tube_pole_L0():
    model = flagship_model()
    u_hand = 2.2 / math.sqrt(abs(model.omega))
    tube, diag = pole_estimate_L0(model, u_hand, n_grid=121)
    tube.tube_id = "fixture-pole-L0"
    return tube, "Teukolsky L = 0 pole estimate (forward)"


def tube_pole_Lpos():
    model = flagship_model().mirror()
    tube, diag = pole_estimate_Lpos(model, cscr=1.0, n_grid=121)
    tube.tube_id = "fixture-pole-Lpos"
    return tube, "Teukolsky L = 4 pole estimate (backward kappa)"


# -- flagship section tubes ------------------------------------------------------

def tube_flagship_evanescent():
    model = flagship_model()
    from riccatube.pipeline import wkb_start_auto
    from riccatube.wkb import segment_regions
    cfg = flagship_config()
    rt = segment_regions(model, cfg.alpha_exp, cfg.C, C2=cfg.C2)
    eps = cfg.epsilon_evanescent()
    start = wkb_start_auto(model, rt.u_max, eps)
    tube, bound, diag = wkb_t_estimate(model, (start, rt.u_max), eps,
                                       n_grid=121)
    tube.tube_id = "fixture-flagship-evanescent"
    return tube, "Teukolsky evanescent WKB region"


def tube_flagship_turning():
    model = flagship_model()
    from riccatube.special.parabolic import quadratic_fit
    from riccatube.t_method import turning_point_t_estimate
    from riccatube.wkb import segment_regions
    cfg = flagship_config()
    rt = segment_regions(model, cfg.alpha_exp, cfg.C, C2=cfg.C2)
    quad, _ = quadratic_fit(model, (rt.u_max, rt.u_plus))
    tube, C_fit, diag = turning_point_t_estimate(
        model, quad, (rt.u_max, rt.u_minus), rt.u_plus, n_grid=121)
    tube.tube_id = "fixture-flagship-turning"
    return tube, "Teukolsky turning band, double-conjugated approximant"


def tube_flagship_lens():
    model = flagship_model()
    from riccatube.wkb import segment_regions
    cfg = flagship_config()
    rt = segment_regions(model, cfg.alpha_exp, cfg.C, C2=cfg.C2)
    tube = lens_tube(model, (rt.u_min, 0.5 * math.pi), cfg.epsilon_lens(),
                     cfg.nu_lens(), n_grid=121, ladder="measured",
                     tube_id="fixture-flagship-lens")
    return tube, "Teukolsky oscillatory lens region (measured gating)"


ALL_TUBE_FIXTURES = [
    tube_case_A, tube_case_B, tube_t_ode, tube_t_wkb, tube_t_negim,
    tube_kappa, tube_lens, tube_prop71, tube_singular_L0, tube_pole_L0,
    tube_pole_Lpos, tube_flagship_evanescent, tube_flagship_turning,
    tube_flagship_lens,
]
