"""Near-pole enclosures: the log-branch and Bessel-combo approximants for
the L = 0 pole, the K_L approximant and backward kappa-tube for L >= 1,
and the constant-selection rule for the shift parameter.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from ..errors import HypothesisViolation, RootNotFound, ZetaSelectionFailure
from ..kappa_method import kappa_tube
from ..potential import SingularModel, TeukolskyModel, pole_expansion
from ..riccati_core import (Approximant, EnclosureTube, FlippedApproximant,
                            FlippedModel, HypothesisRecord, _classify,
                            map_backward_tube)
from ..t_method import t_tube_via_E
from .bessel import (BesselSolution, arg_in_arcs, cone_arcs,
                     log_branch_alpha_beta, log_branch_y)


class LogBranchApproximant(Approximant):
    """Exact solution of the pure-pole potential -1/(4 u^2): the branch
    sqrt(u)(log|zeta u| - i), whose Riccati solution has positive imaginary
    part (required by the upper-half-plane disk machinery)."""

    def __init__(self, model, zeta: complex):
        self.model = model
        self.zeta = complex(zeta)

    def y_tilde(self, u: float) -> complex:
        return log_branch_y(self.zeta, u)

    def V_tilde(self, u: float) -> complex:
        return -0.25 / (u * u)

    def delta(self, u: float) -> complex:
        return self.model.value(u) + 0.25 / (u * u)

    def delta_prime(self, u: float) -> complex:
        return self.model.eval(u, 1)[1] - 0.5 / u ** 3


class L0ComboApproximant(Approximant):
    """Bessel-combo solution of Vt = -1/(4u^2) + zeta^2 (full L = 0 model)."""

    def __init__(self, model, zeta: complex):
        self.model = model
        self.zeta = complex(zeta)
        self.solution = BesselSolution.l0_combo(self.zeta)

    def y_tilde(self, u: float) -> complex:
        return self.solution.y(u)

    def V_tilde(self, u: float) -> complex:
        return -0.25 / (u * u) + self.zeta ** 2

    def delta(self, u: float) -> complex:
        return self.model.value(u) + 0.25 / (u * u) - self.zeta ** 2

    def delta_prime(self, u: float) -> complex:
        return self.model.eval(u, 1)[1] - 0.5 / u ** 3


class KLApproximant(Approximant):
    """K_L Bessel solution of Vt = (L^2 - 1/4)/u^2 + zeta^2, L >= 1."""

    def __init__(self, model, zeta: complex, L: int):
        self.model = model
        self.zeta = complex(zeta)
        self.L = int(L)
        self.solution = BesselSolution.kl(self.zeta, self.L)

    def y_tilde(self, u: float) -> complex:
        return self.solution.y(u)

    def V_tilde(self, u: float) -> complex:
        return (self.L ** 2 - 0.25) / (u * u) + self.zeta ** 2

    def delta(self, u: float) -> complex:
        return (self.model.value(u) - (self.L ** 2 - 0.25) / (u * u)
                - self.zeta ** 2)

    def delta_prime(self, u: float) -> complex:
        return self.model.eval(u, 1)[1] + 2.0 * (self.L ** 2 - 0.25) / u ** 3


# ---------------------------------------------------------------------------
# The L = 0 estimates
# ---------------------------------------------------------------------------

def prop71_tube(zeta: complex, n_grid: int = 300, u_lo_factor: float = 1e-6):
    """Uniformly bounded T-tube for the L = 0 singular model on the inner
    interval (0, 1/(2|zeta|)], with the log-branch approximant.

    Returns (tube, max_logT).
    """
    zeta = complex(zeta)
    if not 0.0 < cmath.phase(zeta) <= 0.5 * math.pi + 1e-12:
        raise HypothesisViolation(0.0, "arg_zeta_range",
                                  cmath.phase(zeta))
    model = SingularModel(zeta, 0)
    u_hi = 0.5 / abs(zeta)
    us = np.geomspace(u_lo_factor * u_hi, u_hi, n_grid)
    approx = LogBranchApproximant(model, zeta)
    tube = t_tube_via_E(model, approx, (us[0], us[-1]), grid=us,
                        tube_id=f"prop71-{zeta:.3g}")
    return tube, float(np.max(tube.meta["logT"]))


def l0_outer_bounds(zeta: complex, n_grid: int = 200, u_factor: float = 40.0):
    """Measured constants of the outer-region estimates for the combo
    solution: C with |Re y| <= C|zeta| and Im y >= |zeta|/C on
    (1/(2|zeta|), u_factor/|zeta|]."""
    sol = BesselSolution.l0_combo(zeta)
    us = np.geomspace(0.5 / abs(zeta) * 1.0001, u_factor / abs(zeta), n_grid)
    ys = np.array([sol.y(float(u)) for u in us])
    im_min = float(np.min(ys.imag))
    if im_min <= 0.0:
        raise HypothesisViolation(float(us[int(np.argmin(ys.imag))]),
                                  "im_y_positive_outer", im_min)
    C = max(float(np.max(np.abs(ys.real))) / abs(zeta),
            abs(zeta) / im_min)
    return C


def pole_estimate_L0(model: TeukolskyModel, u_max: float, n_grid: int = 300,
                     u_lo_factor: float = 1e-4):
    """T-tube for the Teukolsky potential near the L = 0 pole.

    The shift constant is chosen with Im zeta^2 = Im c0 and Re zeta^2 the
    grid maximum of Re(V - pole), making Re(V - Vt) <= 0 by construction,
    so U <= -beta_tilde^2 < 0 and the zero-correction route applies.
    Returns (tube, diagnostics).
    """
    if model.pole_order_left != 0:
        raise ValueError("pole_estimate_L0 requires k = s (L = 0)")
    exp = pole_expansion(model)
    om = abs(model.omega)
    us = np.geomspace(u_lo_factor * u_max, u_max, n_grid)
    reg = np.array([model.value(u) + 0.25 / u ** 2 for u in us])
    im_c0 = exp.c0.imag
    if im_c0 <= 0.0:
        raise HypothesisViolation(0.0, "im_zeta2_positive", im_c0)
    re_max = float(np.max(reg.real))
    zeta2 = complex(re_max + 1e-6 * (abs(re_max) + 1.0), im_c0)
    zeta = cmath.sqrt(zeta2)
    approx = L0ComboApproximant(model, zeta)
    tube = t_tube_via_E(model, approx, (us[0], us[-1]), grid=us,
                        tube_id="pole-L0")
    logT = tube.meta["logT"]
    # hypothesis records and fitted constants
    re_margin = float(np.min([-approx.delta(u).real for u in us]))
    tube.hypothesis_log.append(HypothesisRecord(
        "re_V_minus_Vt_nonpos", _classify(re_margin / abs(zeta2), 1.0),
        re_margin / abs(zeta2)))
    u_scale_ratio = u_max * math.sqrt(om)
    envelope = om * u_max ** 2 * (1.0 + np.log(np.abs(zeta) * us) ** 4)
    C_fit = float(np.max(logT / envelope))
    im_delta_fit = float(np.max([abs(approx.delta(u).imag) / (om * u * u)
                                 for u in us]))
    regime = "numerical" if u_max <= 0.5 / abs(zeta) else "arg-dependent"
    diag = {"zeta": zeta, "C_fit": C_fit, "regime": regime,
            "u_max_scale_ratio": u_scale_ratio,
            "im_delta_over_om_u2": im_delta_fit,
            "max_logT": float(np.max(logT))}
    return tube, diag


# ---------------------------------------------------------------------------
# The L >= 1 backward estimate
# ---------------------------------------------------------------------------

def find_u0_stationary(model, u_hi: float = None, n_scan: int = 4000) -> float:
    """First zero of Re V' near the pole (the stationary point u0)."""
    om = abs(model.omega)
    u_hi = u_hi if u_hi is not None else min(0.5, 20.0 / math.sqrt(om))
    us = np.geomspace(1e-4 / math.sqrt(om), u_hi, n_scan)
    vals = np.array([model.eval(u, 1)[1].real for u in us])
    idx = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
    if len(idx) == 0:
        raise RootNotFound("u0_stationary",
                           scan_table=list(zip(us[::200], vals[::200])))
    lo, hi = us[idx[0]], us[idx[0] + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if model.eval(mid, 1)[1].real * model.eval(lo, 1)[1].real <= 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-14 * max(1.0, mid):
            break
    return 0.5 * (lo + hi)


def select_zeta(model: TeukolskyModel, c_min: float = 1.0,
                c_max: float = 50.0, c4: float = 1.0,
                eps_zeta_deg: float = 15.0):
    """Two-case selection of the shift constant for the L >= 1 estimate.

    zeta^2 = c0 - (1 + 2i) Cscr^2 |Omega|, with Cscr = c_min when |c0|
    dominates |Omega| (then arg zeta^2 is near 0 or pi) and c_max
    otherwise; the resulting arg zeta must fall in the admissible arcs
    (checked with half-width eps_zeta_deg).  Both cases are tried before
    giving up.
    """
    exp = pole_expansion(model)
    om = abs(model.omega)
    arcs = cone_arcs(eps_zeta_deg)
    order = (c_min, c_max) if abs(exp.c0) > c4 * om else (c_max, c_min)
    tried = []
    for cscr in order:
        zeta2 = exp.c0 - (1.0 + 2.0j) * cscr ** 2 * om
        zeta = cmath.sqrt(zeta2)
        for cand in (zeta, -zeta):
            theta = math.degrees(cmath.phase(cand))
            tried.append((cscr, theta))
            if arg_in_arcs(theta, arcs):
                return cand, cscr, exp
    raise ZetaSelectionFailure(
        f"no admissible zeta: tried {tried} against arcs {arcs}")


def pole_estimate_Lpos(model: TeukolskyModel, cscr: float = None,
                       c_min: float = 1.0, c_max: float = 50.0,
                       c4: float = 1.0, eps_zeta_deg: float = 15.0,
                       n_grid: int = 300, u_stop_factor: float = 0.05,
                       entry_constant: float = 0.0):
    """Backward kappa-tube on (0, u0] for an L >= 1 pole.

    Constructed in the flipped frame v = -u with the K_L approximant,
    g = Cscr^2 |Omega|^(1/2) sigma, and the positivity of the determinator
    checked along the tube; mapped back to decreasing-u frames.
    Returns (tube, diagnostics).
    """
    L = model.pole_order_left
    if L < 1:
        raise ValueError("pole_estimate_Lpos requires |k - s| >= 1")
    om = abs(model.omega)
    exp = pole_expansion(model)
    if cscr is None:
        zeta, cscr, exp = select_zeta(model, c_min, c_max, c4, eps_zeta_deg)
    else:
        zeta2 = exp.c0 - (1.0 + 2.0j) * cscr ** 2 * om
        zeta = cmath.sqrt(zeta2)
        if zeta.real > 0 and zeta.imag == 0:
            zeta = -zeta
    u0 = find_u0_stationary(model)
    c3 = float(max(abs(model.value(u) - (L * L - 0.25) / u ** 2 - zeta ** 2
                       + (1.0 + 2.0j) * cscr ** 2 * om) / om
                   for u in np.geomspace(1e-3 * u0, u0, 200)))

    approx = KLApproximant(model, zeta, L)
    # sigma in the flipped frame is non-decreasing only while Re ytilde <= 0;
    # shorten the entry to the largest prefix (0, u_start] with that sign,
    # which has the same |Omega|^(-1/2) scale as u0 itself
    scan = np.geomspace(1e-3 * u0, u0, 400)
    re_yt = np.array([approx.y_tilde(u).real for u in scan])
    bad = np.nonzero(re_yt > 0.0)[0]
    u_start = u0 if len(bad) == 0 else 0.98 * float(scan[bad[0] - 1]) \
        if bad[0] > 0 else float("nan")
    if not math.isfinite(u_start):
        raise HypothesisViolation(float(scan[0]), "sigma_monotone_range",
                                  -float(re_yt[0]),
                                  "Re ytilde > 0 from the pole outward")
    fmodel = FlippedModel(model)
    fapprox = FlippedApproximant(approx, fmodel)
    vs = -np.geomspace(u_start, u_stop_factor * u0, n_grid)  # increasing v < 0
    imv_min = float(min(model.value(-v).imag for v in vs))
    certificate = "lemma36" if imv_min > 0.0 else "gronwall"
    tube_v = kappa_tube(fmodel, fapprox, (vs[0], vs[-1]), grid=vs,
                        g_sigma_coeff=cscr ** 2 * math.sqrt(om),
                        entry_constant=entry_constant,
                        certificate=certificate, tube_id="pole-Lpos-v")
    # quantitative checks in the flipped frame
    yts = np.array([fapprox.y_tilde(v) for v in vs])
    args = np.degrees(np.angle(yts))
    arg_margin = float(min(np.min(args + 30.0), np.min(120.0 - args)))
    mod_margin = float(np.min(np.abs(yts) - 0.25 * cscr * math.sqrt(om)))
    trig_margin = float(np.min(yts.real + yts.imag - np.abs(yts) / 3.0))
    kappas = np.array([f.extra["kappa"] for f in tube_v.frames])
    sand_lo = float(np.min(kappas - 0.5 * cscr ** 2 * math.sqrt(om)))
    sand_hi = float(np.min(2.0 * cscr ** 2 * math.sqrt(om) - kappas))
    for name, mg, scale in (("arg_ytilde_sector", arg_margin, 30.0),
                            ("ytilde_modulus", mod_margin, cscr * math.sqrt(om)),
                            ("trig_alpha_plus_beta", trig_margin, 1.0),
                            ("kappa_sandwich_lower", sand_lo, 1.0),
                            ("kappa_sandwich_upper", sand_hi, 1.0)):
        tube_v.hypothesis_log.append(
            HypothesisRecord(name, _classify(mg / max(scale, 1e-300), 1.0),
                             mg / max(scale, 1e-300)))
    tube = map_backward_tube(tube_v, model, tube_id="pole-Lpos")
    diag = {"zeta": zeta, "Cscr": cscr, "u0": u0, "u_start": u_start,
            "c3": c3, "im_c0_over_om": exp.c0.imag / om,
            "arg_zeta_deg": math.degrees(cmath.phase(zeta)),
            "certificate": certificate,
            "arg_margin": arg_margin, "mod_margin": mod_margin}
    return tube, diag
