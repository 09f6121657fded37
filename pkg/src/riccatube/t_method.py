"""Invariant tubes parameterized by a scalar function T >= 1, valid when
U < 0 regardless of the determinator's sign.

Two construction routes: the direct differential inequality for T, and the
error-term route log T = int (|E1+E2+E3| + E4) with an a-posteriori check
of the slack condition on the correction function g.  The disk is
recovered from T via beta = sqrt(|U|) (T + 1/T)/2, R = sqrt(|U|)(T - 1/T)/2,
so beta >= R >= 0 always.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import GConditionViolation, HypothesisViolation, StepFailure
from .quadrature import adaptive_quad, cumulative_quad
from .riccati_core import (Disk, EnclosureTube, FlowFrame, HypothesisRecord,
                           _classify)

DEFAULT_SLACK = 1e-12


@dataclass
class TState:
    """Last-evaluation snapshot of the T-machinery (diagnostic record)."""

    T: float
    logT: float
    E_terms: tuple = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if not math.isclose(self.T, math.exp(self.logT), rel_tol=1e-12):
            raise ValueError("T and logT inconsistent")


def beta_R_from_T(U: float, T: float):
    s = math.sqrt(abs(U))
    return 0.5 * s * (T + 1.0 / T), 0.5 * s * (T - 1.0 / T)


def _require_U_negative(approximant, us):
    U = np.array([approximant.U(u) for u in us])
    if np.any(U >= 0.0):
        i = int(np.argmax(U))
        raise HypothesisViolation(float(us[i]), "U_negative", float(-U[i]))
    return U


def _frames_from_T(model, approximant, us, U, T, det_fn, extra_fn=None):
    log_sigma = 2.0 * cumulative_quad(approximant.alpha, us)
    frames = []
    for i, u in enumerate(us):
        beta, R = beta_R_from_T(U[i], T[i])
        alpha = approximant.alpha(u)
        det = det_fn(u, beta)
        extra = {"T": T[i]}
        if extra_fn is not None:
            extra.update(extra_fn(i, u))
        with np.errstate(over="ignore"):
            sig = math.exp(log_sigma[i]) if log_sigma[i] < 709 else math.inf
        frames.append(FlowFrame(u, Disk(alpha, beta, R), sig, U[i], det,
                                beta_tilde=approximant.beta_tilde(u),
                                extra=extra))
    return frames


def t_tube(model, approximant, interval, T0: float = 1.0, n_grid: int = 400,
           grid=None, slack: float = DEFAULT_SLACK,
           tube_id: str = "tmethod") -> EnclosureTube:
    """Direct integration of the T differential inequality.

    T'/T = |D/U| - (Im V / sqrt|U|) (T^2-1)/(2T), integrated as an equality
    plus non-negative slack (relative ``slack`` on the right side; growing T
    only enlarges the disks, so validity is preserved).
    """
    if T0 < 1.0:
        raise ValueError("T0 must be >= 1")
    a, b = float(interval[0]), float(interval[1])
    us = np.asarray(grid, dtype=float) if grid is not None else np.linspace(a, b, n_grid)
    U = _require_U_negative(approximant, us)

    def rhs(u, w):
        T = max(w[0], 1.0)
        Uu = approximant.U(u)
        beta, _ = beta_R_from_T(Uu, T)
        det = approximant.det_form2(u, beta)
        imv = model.value(u).imag
        val = abs(det / Uu) - imv / math.sqrt(abs(Uu)) * (T * T - 1.0) / (2.0 * T)
        val = val + slack * abs(val)
        return [T * val]

    sol = solve_ivp(rhs, (us[0], us[-1]), [float(T0)], method="DOP853",
                    t_eval=us, rtol=1e-12, atol=1e-14)
    if not sol.success:
        raise StepFailure(f"T integration failed: {sol.message}")
    T = np.maximum(sol.y[0], 1.0)
    frames = _frames_from_T(model, approximant, us, U, T,
                            approximant.det_form2)
    hyp = [HypothesisRecord("U_negative", "pass", float(np.min(-U)) /
                            max(float(np.max(np.abs(U))), 1e-300)),
           HypothesisRecord("T_at_least_one", "pass", float(np.min(T) - 1.0))]
    return EnclosureTube(frames, "tmethod", hyp, "forward", model,
                         approximant, None, tube_id,
                         meta={"T0": T0, "slack": slack, "route": "ode"})


def e_terms(model, approximant, u: float, g: float):
    """(E1, E2, E3, E4) of the error-term route at the point u."""
    d = approximant.delta(u)
    dp = approximant.delta_prime(u)
    alpha = approximant.alpha(u)
    bt = approximant.beta_tilde(u)
    U = approximant.U(u)
    absU = abs(U)
    imv = model.value(u).imag
    E1 = (4.0 * alpha * d.real + dp.real) / (2.0 * absU)
    E2 = bt * d.imag / absU
    E3 = -imv * d.real / (absU * (math.sqrt(absU) + bt))
    E4 = abs(imv) * g / math.sqrt(absU)
    return E1, E2, E3, E4


def t_tube_via_E(model, approximant, interval, g_fn=None, T0: float = 1.0,
                 n_grid: int = 400, grid=None, slack: float = DEFAULT_SLACK,
                 tube_id: str = "tmethod-E", g_rounds: int = 0,
                 check_g: bool = True) -> EnclosureTube:
    """Error-term route: log T(u) = log T0 + int (|E1+E2+E3| + E4).

    The slack condition on g is checked a posteriori at every frame
    (g >= -(T-1)/T where Im V >= 0, g >= T-1 where Im V < 0).  When
    ``g_rounds`` > 0 and the check fails, g is enlarged from the latest T
    and the tube rebuilt (at most g_rounds times) before raising.
    """
    if T0 < 1.0:
        raise ValueError("T0 must be >= 1")
    a, b = float(interval[0]), float(interval[1])
    us = np.asarray(grid, dtype=float) if grid is not None else np.linspace(a, b, n_grid)
    if g_fn is None:
        g_fn = lambda u: 0.0
    U = _require_U_negative(approximant, us)
    imv = np.array([model.value(u).imag for u in us])

    g_vals = np.array([float(g_fn(u)) for u in us])
    if np.any(g_vals < 0.0) and np.any(imv < 0.0):
        pass  # allowed; the a-posteriori check below decides

    for round_idx in range(max(g_rounds, 0) + 1):
        def E(u, gv=None):
            gv = float(g_fn(u)) if gv is None else gv
            E1, E2, E3, E4 = e_terms(model, approximant, u, gv)
            return abs(E1 + E2 + E3) + E4

        logT = math.log(T0) + (1.0 + slack) * cumulative_quad(
            lambda u: E(u), us, epsrel=3e-10)
        T = np.exp(logT)
        # slack condition
        margins = np.where(imv >= 0.0, g_vals + (T - 1.0) / T,
                           g_vals - (T - 1.0))
        if np.all(margins >= 0.0) or not check_g:
            break
        if round_idx == max(g_rounds, 0):
            i = int(np.argmin(margins))
            raise GConditionViolation(float(us[i]), float(margins[i]))
        g_new = np.maximum(g_vals, 1.05 * (T - 1.0))
        g_table = dict(zip(us, g_new))
        g_fn = lambda u, _t=g_table: _t.get(u, np.interp(u, us, g_new))
        g_vals = g_new

    e_last = [e_terms(model, approximant, u, float(g_fn(u))) for u in us]
    frames = _frames_from_T(model, approximant, us, U, T,
                            approximant.det_form2,
                            extra_fn=lambda i, u: {"E1": e_last[i][0],
                                                   "E2": e_last[i][1],
                                                   "E3": e_last[i][2],
                                                   "E4": e_last[i][3],
                                                   "g": g_vals[i]})
    gmin = float(np.min(margins)) if len(us) else math.inf
    # The slack condition is a non-strict inequality evaluated exactly
    # (g >= -(T-1)/T holds identically for g >= 0 when Im V >= 0), so a
    # zero margin is a pass, not a borderline sign crossing.
    hyp = [HypothesisRecord("U_negative", "pass", float(np.min(-U)) /
                            max(float(np.max(np.abs(U))), 1e-300)),
           HypothesisRecord("g_condition",
                            "pass" if gmin >= 0.0 else "fail", gmin)]
    return EnclosureTube(frames, "tmethod", hyp, "forward", model,
                         approximant, None, tube_id,
                         meta={"T0": T0, "slack": slack, "route": "E",
                               "logT": logT})


# ---------------------------------------------------------------------------
# WKB specializations
# ---------------------------------------------------------------------------

def _inf_abs_V(model, us, safety: float = 0.99) -> float:
    return safety * float(min(abs(model.value(u)) for u in us))


def wkb_t_estimate(model, interval, epsilon: float, n_grid: int = 300,
                   branch_seed: str = "im_positive", check_grid: int = 400,
                   T0: float = 1.0):
    """Zero-correction WKB tube for the sector Im sqrt(V) > Re sqrt(V) >= 0.

    Returns (tube, bound_fn_values, diagnostics); asserts the computed
    log T stays below 64 eps^2 inf|V|^2 int |V|^(-3/2) at every frame and
    records the proof-level pointwise constants.
    """
    from .wkb import WkbApproximant, semiclassical_check
    a, b = float(interval[0]), float(interval[1])
    if epsilon >= 0.125:
        raise HypothesisViolation(a, "epsilon_below_eighth", 0.125 - epsilon)
    approx = WkbApproximant(model, (a, b), epsilon, driven=False,
                            branch_seed=branch_seed)
    chk = np.linspace(a, b, check_grid)
    sc = semiclassical_check(model, (a, b), epsilon, n=check_grid)
    if not sc["pass"]:
        worst = min(sc[f"margin_V{k}"] for k in (1, 2, 3))
        raise HypothesisViolation(a, "semiclassical", worst)
    sector = [(approx.sqrt_V(u).imag - approx.sqrt_V(u).real,
               approx.sqrt_V(u).real) for u in chk]
    worst_sector = min(min(s) for s in sector)
    if worst_sector < 0.0:
        raise HypothesisViolation(a, "im_gt_re_sqrtV", worst_sector)

    us = np.linspace(a, b, n_grid)
    tube = t_tube_via_E(model, approx, (a, b), g_fn=None, grid=us,
                        T0=T0, tube_id="wkb-t")
    inf_v = _inf_abs_V(model, chk)
    integral = cumulative_quad(lambda u: abs(model.value(u)) ** -1.5, us)
    bound = 64.0 * epsilon ** 2 * inf_v ** 2 * integral
    logT = tube.meta["logT"]
    # the closed form bounds the growth from the entry (T(u0) = 1 there);
    # both sides vanish exactly at the entry frame, so dominance is graded
    # over the interior and by sign (it is an inequality between computed
    # values, not a sign condition at a crossing)
    dominance = float(np.min(bound[1:] - (logT[1:] - logT[0])))
    tube.hypothesis_log.append(
        HypothesisRecord("logT_below_closed_form",
                         "pass" if dominance >= 0.0 else "fail", dominance))
    # proof-level constants, pointwise
    diag = {"inf_V": inf_v, "epsilon": epsilon, "bound": bound,
            "logT": logT, "semiclassical": sc}
    e12_m, e3_m, u_off_m, u_quarter_m = math.inf, math.inf, math.inf, math.inf
    for u in chk:
        E1, E2, E3, _ = e_terms(model, approx, u, 0.0)
        av = abs(model.value(u))
        cap = epsilon ** 2 * inf_v ** 2 / av ** 1.5
        e12_m = min(e12_m, 40.0 * cap - abs(E1 + E2))
        e3_m = min(e3_m, 24.0 * cap - abs(E3))
        sq = approx.sqrt_V(u)
        Uu = approx.U(u)
        u_off_m = min(u_off_m, 3.0 * epsilon * av - abs(Uu + sq.imag ** 2))
        u_quarter_m = min(u_quarter_m, -Uu - 0.25 * av)
    diag["margin_E12_le_40"] = e12_m
    diag["margin_E3_le_24"] = e3_m
    diag["margin_U_offset_3eps"] = u_off_m
    diag["margin_U_below_quarter"] = u_quarter_m
    return tube, bound, diag


def concave_integral_bound(model, u0: float, u: float, n_check: int = 200):
    """Closed-form bound for int |V|^(-3/2) under the chord inequality.

    Verifies |V(tau)| >= chord of |V| between u0 and u on the sample grid,
    then returns (bound, quadrature_value, chord_margin).
    """
    us = np.linspace(u0, u, n_check)
    av = np.array([abs(model.value(x)) for x in us])
    lam = (us - u0) / (u - u0)
    chord = (1.0 - lam) * av[0] + lam * av[-1]
    margin = float(np.min(av - chord))
    if margin < -1e-12 * float(np.max(av)):
        raise HypothesisViolation(float(us[int(np.argmin(av - chord))]),
                                  "chord_inequality", margin)
    bound = 2.0 * (u - u0) / (math.sqrt(av[-1]) * av[0])
    quadrature = adaptive_quad(lambda x: abs(model.value(x)) ** -1.5, u0, u,
                               epsrel=1e-10)
    return bound, quadrature, margin


def wkb_t_estimate_negIm(model, interval_I, interval_J, epsilon: float,
                         n_grid: int = 300, branch_seed: str = "im_positive",
                         check_grid: int = 400):
    """WKB tube on J = [u0, u1] subset I allowing Im V < 0.

    Hypotheses: the sector inequality, the lower bound on sqrt|V|, the
    smallness of |J| |Im V| sqrt|V|, and the chord inequality; the
    correction g = 18 eps^2 inf_I |V|^2/(|V| |Im V|) from the negative-sign
    branch, with the slack condition closed by fixed-point iteration.
    Returns (tube, bound_values, diagnostics).
    """
    from .wkb import WkbApproximant, semiclassical_check
    aI, bI = float(interval_I[0]), float(interval_I[1])
    a, b = float(interval_J[0]), float(interval_J[1])
    if epsilon >= 0.125:
        raise HypothesisViolation(a, "epsilon_below_eighth", 0.125 - epsilon)
    sc = semiclassical_check(model, (aI, bI), epsilon, n=check_grid)
    if not sc["pass"]:
        raise HypothesisViolation(aI, "semiclassical",
                                  min(sc[f"margin_V{k}"] for k in (1, 2, 3)))
    approx = WkbApproximant(model, (aI, bI), epsilon, driven=False,
                            branch_seed=branch_seed)
    chkI = np.linspace(aI, bI, check_grid)
    inf_I = _inf_abs_V(model, chkI)
    chk = np.linspace(a, b, check_grid)
    J_len = b - a
    v_u0 = abs(model.value(a))
    margins = {}
    # the sector hypothesis in the form the estimate actually consumes:
    # Im sqrt(V) > |Re sqrt(V)| (so Im^2 sqrt(V) >= |V|/2); demanding
    # Re sqrt(V) >= 0 as well would force Im V >= 0 identically and void
    # the negative-Im case this routine exists for
    margins["im_gt_abs_re_sqrtV"] = min(
        approx.sqrt_V(u).imag - abs(approx.sqrt_V(u).real) for u in chk)
    margins["sqrtV_lower"] = min(
        math.sqrt(abs(model.value(u)))
        - 200.0 * epsilon ** 2 * J_len * inf_I ** 2 / v_u0 for u in chk)
    margins["J_imV_small"] = min(
        v_u0 / 30.0 - J_len * abs(model.value(u).imag)
        * math.sqrt(abs(model.value(u))) for u in chk)
    av = np.array([abs(model.value(x)) for x in chk])
    lam = (chk - a) / (b - a)
    margins["chord"] = float(np.min(av - ((1 - lam) * av[0] + lam * av[-1])))
    tol = {"chord": -1e-12 * float(np.max(av))}
    for name, mg in margins.items():
        if mg < tol.get(name, 0.0):
            raise HypothesisViolation(a, name, float(mg))

    def g_fn(u):
        v = model.value(u)
        return (18.0 * epsilon ** 2 * inf_I ** 2
                / (abs(v) * max(abs(v.imag), 1e-300)))

    us = np.linspace(a, b, n_grid)
    tube = t_tube_via_E(model, approx, (a, b), g_fn=g_fn, grid=us,
                        g_rounds=5, tube_id="wkb-t-negim")
    integral = cumulative_quad(lambda u: abs(model.value(u)) ** -1.5, us)
    bound = 100.0 * epsilon ** 2 * inf_I ** 2 * integral
    logT = tube.meta["logT"]
    dominance = float(np.min(bound[1:] - (logT[1:] - logT[0])))
    tube.hypothesis_log.append(
        HypothesisRecord("logT_below_closed_form",
                         "pass" if dominance >= 0.0 else "fail", dominance))
    T = np.exp(logT)
    mean_value_cap = [math.e * 200.0 * epsilon ** 2 * inf_I ** 2 * J_len
                      / (math.sqrt(abs(model.value(u))) * v_u0) for u in us]
    diag = {"margins": margins, "bound": bound, "logT": logT,
            "inf_I": inf_I,
            "T_minus_1_cap_margin": float(np.min(np.array(mean_value_cap)
                                                 - (T - 1.0)))}
    return tube, bound, diag


def turning_point_t_estimate(model, quad_model, interval, u_plus: float,
                             n_grid: int = 300, tube_id: str = "turning",
                             T0: float = 1.0):
    """T-tube with the double-conjugated parabolic-cylinder approximant on
    the approach to a turning point.

    Verifies the concavity inequality Re(V - Vtilde) <= 0, the resulting
    U <= -beta_tilde^2, and Im V >= 0 up to u_plus; the tube uses the
    zero-correction route.  Returns (tube, C_fit, diagnostics) with C_fit
    the fitted growth constant max (log T(u) - log T(u_min))/(u - u_min).
    """
    from .special.parabolic import PCApproximant
    a, b = float(interval[0]), float(interval[1])
    approx = PCApproximant(model, quad_model, conjugated=True)
    chk = np.linspace(a, max(b, u_plus), 200)
    conc = min((quad_model.value(u) - model.value(u)).real for u in chk)
    if conc < -1e-9 * abs(quad_model.p):
        raise HypothesisViolation(a, "re_V_minus_Vt_nonpos", conc)
    imv_min = min(model.value(u).imag for u in chk)
    if imv_min < 0.0:
        raise HypothesisViolation(a, "im_V_nonneg", imv_min)
    us = np.linspace(a, b, n_grid)
    ub2 = min(-approx.U(u) - approx.beta_tilde(u) ** 2 for u in us)
    tube = t_tube_via_E(model, approx, (a, b), g_fn=None, grid=us,
                        T0=T0, tube_id=tube_id)
    logT = tube.meta["logT"]
    with np.errstate(divide="ignore", invalid="ignore"):
        rates = np.where(us > a, (logT - logT[0]) / np.maximum(us - a, 1e-300),
                         0.0)
    C_fit = float(np.max(rates[1:])) if len(us) > 1 else 0.0
    diag = {"U_le_minus_bt2_margin": float(ub2),
            "concavity_margin": float(conc),
            "imV_min": float(imv_min), "C_fit": C_fit}
    return tube, C_fit, diag
