"""kappa-calculus invariant tubes: the integral quantity kappa, the
kappa +- R identity, case-B disks with an increasing correction g, the
driven-WKB two-sided estimates, and the lens-shaped region.

All cumulative combinations (1/sigma) ( int sigma f + C ) are evaluated as
solutions of J' = f - 2 alpha J (overflow-safe; sigma itself can exceed
double range on long oscillatory stretches).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateDenominator, HypothesisViolation,
                     MonotonicityViolation)
from .quadrature import cumulative_quad
from .riccati_core import (Disk, EnclosureTube, FlowFrame, HypothesisRecord,
                           _classify, _weighted_cumulative,
                           determinator_kappa)


@dataclass
class KappaState:
    """Snapshot of the kappa-machinery at a point (diagnostic record)."""

    kappa: float
    case: str = "B"
    nu: float = math.nan
    driving_sign: int = +1


def kappa_fn(model, approximant, u0: float, u, constant: float = None,
             g_fn=None, n_grid: int = 600):
    """kappa per the constant form (1/sigma)(int sigma Im(V - Vt) + C) or
    the increasing-correction form g/sigma + (1/sigma) int sigma Im(V - Vt).

    Evaluates on [u0, max u]; returns a scalar for scalar u, else an array.
    The correction g must be non-decreasing on the evaluation grid.
    """
    if (constant is None) == (g_fn is None):
        raise ValueError("supply exactly one of constant / g_fn")
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    hi = float(np.max(u_arr))
    us = np.unique(np.concatenate([np.linspace(u0, hi, n_grid), u_arr]))

    def im_delta(x):
        return approximant.delta(x).imag

    if constant is not None:
        J = _weighted_cumulative(approximant.alpha, im_delta, us, c0=constant)
        vals = J
    else:
        J = _weighted_cumulative(approximant.alpha, im_delta, us, c0=0.0)
        log_sigma = 2.0 * cumulative_quad(approximant.alpha, us)
        g_vals = np.array([float(g_fn(x)) for x in us])
        if np.any(np.diff(g_vals) < -1e-12 * np.maximum(np.abs(g_vals[:-1]), 1.0)):
            i = int(np.argmin(np.diff(g_vals)))
            raise MonotonicityViolation(
                f"g decreases near u={us[i]:.6g}")
        vals = g_vals * np.exp(-log_sigma) + J
    out = np.interp(u_arr, us, vals)
    return float(out[0]) if np.isscalar(u) else out


def kappa_pm_R(kappa: float, beta_tilde: float, V: complex,
               Vt: complex) -> float:
    """The identity (kappa^2 - Re(V - Vt)) / (2 (beta_tilde + kappa)).

    The same expression covers both case signs of kappa +- R.
    """
    denom = beta_tilde + kappa
    scale = abs(kappa) + abs(beta_tilde) + math.sqrt(abs(V)) + 1e-300
    if abs(denom) < 1e-12 * scale:
        raise DegenerateDenominator(
            f"|beta_tilde + kappa| = {abs(denom):.3e} below threshold")
    return (kappa * kappa - (V - Vt).real) / (2.0 * denom)


def _case_b_disks(beta_tilde, kappa, U):
    with np.errstate(divide="ignore", invalid="ignore"):
        rp = beta_tilde + kappa          # R + beta
        rm = U / rp                      # R - beta
        R = 0.5 * (rp + rm)
        beta = 0.5 * (rp - rm)
    return beta, R, rp


def kappa_tube(model, approximant, interval, g_fn=None, grid=None,
               n_grid: int = 400, entry_constant: float = 0.0,
               g_sigma_coeff: float = None, certificate: str = "assumed",
               tube_id: str = "kappa") -> EnclosureTube:
    """Case-B invariant tube with kappa = g/sigma + (1/sigma) int sigma
    Im(V - Vt) (+ entry_constant/sigma for glue enlargement).

    ``g_fn`` gives g directly; alternatively ``g_sigma_coeff`` requests
    g = coeff * sigma (so g/sigma is the constant coeff), the overflow-safe
    form for corrections proportional to sigma.  Requires a positive
    determinator along the tube and an upper-half-plane certificate for the
    enclosed solution; ``certificate`` records which lower-bound lemma (or
    assumption) discharges Im y > 0.
    """
    if (g_fn is None) == (g_sigma_coeff is None):
        raise ValueError("supply exactly one of g_fn / g_sigma_coeff")
    a, b = float(interval[0]), float(interval[1])
    us = np.asarray(grid, dtype=float) if grid is not None else np.linspace(a, b, n_grid)

    def im_delta(x):
        return approximant.delta(x).imag

    J = _weighted_cumulative(approximant.alpha, im_delta, us,
                             c0=entry_constant)
    log_sigma = 2.0 * cumulative_quad(approximant.alpha, us)
    if g_sigma_coeff is not None:
        # g = coeff * sigma: g/sigma is exactly the coefficient, and g is
        # non-decreasing iff sigma is, i.e. alpha >= 0 on the grid
        if g_sigma_coeff < 0.0:
            raise MonotonicityViolation("sigma-proportional g needs coeff >= 0")
        alpha_min = float(min(approximant.alpha(x) for x in us))
        if alpha_min < -1e-10:
            raise MonotonicityViolation(
                f"sigma decreases on the grid (min alpha = {alpha_min:.3e})")
        g_mono = alpha_min
        kappa = g_sigma_coeff + J
    else:
        g_vals = np.array([float(g_fn(x)) for x in us])
        dg = np.diff(g_vals)
        g_mono = float(np.min(dg)) if len(dg) else 0.0
        if g_mono < -1e-10 * max(1.0, float(np.max(np.abs(g_vals)))):
            raise MonotonicityViolation(f"g decreases on the grid ({g_mono:.3e})")
        kappa = g_vals * np.exp(-log_sigma) + J

    bt = np.array([approximant.beta_tilde(x) for x in us])
    alpha = np.array([approximant.alpha(x) for x in us])
    U = np.array([approximant.U(x) for x in us])
    re_delta = np.array([approximant.delta(x).real for x in us])
    # R in product form: R = (kappa (2 bt + kappa) + Re delta)/(2 (bt+kappa)),
    # exact and cancellation-free when kappa has contracted below bt
    rp = bt + kappa
    with np.errstate(divide="ignore", invalid="ignore"):
        R = (kappa * (2.0 * bt + kappa) + re_delta) / (2.0 * rp)
    beta = rp - R
    imv = np.array([model.value(x).imag for x in us])

    det = np.empty(len(us))
    ident = np.empty(len(us))
    for i, x in enumerate(us):
        d = approximant.delta(x)
        dp = approximant.delta_prime(x)
        # the identity form of kappa - R is exact and avoids the subtractive
        # cancellation when the disk has contracted many orders of magnitude
        ident[i] = kappa_pm_R(kappa[i], bt[i], model.value(x),
                              approximant.V_tilde(x))
        det[i] = determinator_kappa(alpha[i], d, dp, bt[i], ident[i], imv[i])

    det_scale = (2.0 * np.abs(alpha * U) + 0.5 * np.abs(U)
                 + np.abs(beta * imv) + np.abs(ident * imv) + 1e-300)
    det_margin = det / det_scale
    # dual-path agreement at the disk scale (the subtractive path loses all
    # digits once kappa - R underflows relative to kappa)
    ident_err = (np.abs((kappa - R) - ident)
                 / np.maximum(np.abs(kappa) + np.abs(R) + np.abs(bt), 1e-300))

    frames = []
    violation = None
    for i, x in enumerate(us):
        if R[i] < 0 or not math.isfinite(R[i]):
            violation = HypothesisViolation(float(x), "R_nonneg",
                                            float(R[i]))
            break
        if det_margin[i] < 0:
            violation = HypothesisViolation(float(x), "det_positive",
                                            float(det_margin[i]))
            break
        frames.append(FlowFrame(float(x), Disk(alpha[i], beta[i], R[i]),
                                float(np.exp(np.clip(log_sigma[i], -745, 709))),
                                float(U[i]), float(det[i]),
                                beta_tilde=float(bt[i]),
                                extra={"kappa": float(kappa[i]),
                                       "min_margin": float(det_margin[i])}))
    det_min = float(np.min(det_margin))
    if violation is not None and violation.name == "det_positive":
        det_status = "fail"
    elif det_min >= 1e-8:
        det_status = "pass"
    elif det_min >= 0.0 and float(np.min(kappa)) > 0.0 and float(np.min(imv)) > 0.0:
        # positive via the identity factorization (kappa^2 Im V / 2(bt+kappa))
        # even where the scaled value underflows
        det_status = "pass"
    elif det_min >= 0.0:
        det_status = "inconclusive"
    else:
        det_status = "fail"
    hyp = [
        HypothesisRecord("det_positive", det_status, det_min),
        HypothesisRecord("g_nondecreasing", "pass", g_mono),
        HypothesisRecord("kappa_pm_R_identity",
                         "pass" if float(np.max(ident_err)) <= 1e-9 else "fail",
                         1e-9 - float(np.max(ident_err))),
        HypothesisRecord("im_y_certificate",
                         "pass" if certificate != "unavailable" else "fail",
                         math.inf, note=certificate),
    ]
    return EnclosureTube(frames, "kappa", hyp, "forward", model, approximant,
                         violation, tube_id,
                         meta={"certificate": certificate,
                               "entry_constant": entry_constant})


# ---------------------------------------------------------------------------
# Driven-WKB two-sided estimates
# ---------------------------------------------------------------------------

def driven_wkb_estimates(model, interval, epsilon: float, sign: int,
                         n_check: int = 300) -> dict:
    """Pointwise verification of the driven-ansatz inequalities.

    Checks, for the driving sign s: the two-sided offset bound
    eps|V|/2 <= s (U + Im^2 sqrt V) <= 2 eps|V|, the determinator core
    eps|V|^(3/2) <= s (D - (kappa +- R) Im V) <= 3 eps|V|^(3/2), the
    weighted-average bound (1/sigma) int sigma |Im(V - Vt)| <= 3 eps
    sqrt|V|, and the square-root comparison Re^2 sqrt V <= |V| <= 2 Re^2
    sqrt V.  Raises at the first violated margin.
    """
    from .wkb import WkbApproximant, semiclassical_check
    a, b = float(interval[0]), float(interval[1])
    if epsilon >= 0.125:
        raise HypothesisViolation(a, "epsilon_below_eighth", 0.125 - epsilon)
    sc = semiclassical_check(model, (a, b), epsilon, n=n_check)
    if not sc["pass"]:
        raise HypothesisViolation(a, "semiclassical",
                                  min(sc[f"margin_V{k}"] for k in (1, 2, 3)))
    approx = WkbApproximant(model, (a, b), epsilon, driven=True,
                            driving_sign=sign, branch_seed="re_positive")
    us = np.linspace(a, b, n_check)
    m = {"signU_lower": math.inf, "signU_upper": math.inf,
         "Des_lower": math.inf, "Des_upper": math.inf,
         "en1_lower": math.inf, "en1_upper": math.inf,
         "sqrtV_eighth": math.inf}
    for u in us:
        v = model.value(u)
        av = abs(v)
        sq = approx.sqrt_V(u)
        m["sqrtV_eighth"] = min(m["sqrtV_eighth"],
                                sq.real / 8.0 - abs(sq.imag))
        off = sign * (approx.U(u) + sq.imag ** 2)
        m["signU_lower"] = min(m["signU_lower"], off - 0.5 * epsilon * av)
        m["signU_upper"] = min(m["signU_upper"], 2.0 * epsilon * av - off)
        d = approx.delta(u)
        core = sign * (2.0 * approx.alpha(u) * d.real
                       + 0.5 * approx.delta_prime(u).real
                       + approx.beta_tilde(u) * d.imag)
        m["Des_lower"] = min(m["Des_lower"], core - epsilon * av ** 1.5)
        m["Des_upper"] = min(m["Des_upper"], 3.0 * epsilon * av ** 1.5 - core)
        m["en1_lower"] = min(m["en1_lower"], av - sq.real ** 2)
        m["en1_upper"] = min(m["en1_upper"], 2.0 * sq.real ** 2 - av)
    J2 = _weighted_cumulative(approx.alpha,
                              lambda x: abs(approx.delta(x).imag), us, c0=0.0)
    sig_margin = min(3.0 * epsilon * math.sqrt(abs(model.value(x))) - J2[i]
                     for i, x in enumerate(us))
    m["sigmaes"] = float(sig_margin)
    for name, mg in m.items():
        if mg < 0.0:
            raise HypothesisViolation(a, name, float(mg))
    m["semiclassical"] = sc
    return m


def lens_tube(model, interval, epsilon: float, nu: float, n_grid: int = 400,
              grid=None, entry_constant: float = 0.0, ladder: str = "strict",
              tube_id: str = "lens") -> EnclosureTube:
    """Lens-shaped invariant region: case-B disks with g = nu sqrt|V| sigma,
    taken together with their complex conjugates.

    Containment for the lens means membership in the disk or its conjugate;
    real-axis crossings of the center are flagged per frame (the reflection
    beta -> -beta is bookkeeping for the construction, never applied to
    data).  Frame extras carry lens_lower_beta = beta - R.

    ``ladder``: "strict" enforces the sufficient-condition ladder
    (100 eps^2 < nu^2 < eps < 1/100, the Im sqrt V cap, and the derived
    two-sided bounds) as gating hypotheses; "measured" gates only on the
    construction's own requirements (positive determinator, non-decreasing
    g, R >= 0) and reports the ladder margins as diagnostics -- at moderate
    frequencies the sufficient constants cannot hold even though the
    construction itself is valid and auditable.
    """
    a, b = float(interval[0]), float(interval[1])
    strict = ladder == "strict"
    ladder_margin = min(nu ** 2 - 100.0 * epsilon ** 2,
                        epsilon - nu ** 2, 0.01 - epsilon)
    if strict and ladder_margin <= 0.0:
        raise HypothesisViolation(a, "eps_nu_ladder", ladder_margin)
    from .wkb import WkbApproximant
    approx = WkbApproximant(model, (a, b), epsilon, driven=True,
                            driving_sign=+1, branch_seed="re_positive")
    us = np.asarray(grid, dtype=float) if grid is not None else np.linspace(a, b, n_grid)
    imv_upper = min(nu / 10.0 * approx.sqrt_V(u).real
                    - abs(approx.sqrt_V(u).imag) for u in us)
    if strict and imv_upper < 0.0:
        raise HypothesisViolation(a, "imV_upper_nu", float(imv_upper))

    J = _weighted_cumulative(approx.alpha, lambda x: approx.delta(x).imag,
                             us, c0=entry_constant)
    sqv = np.array([abs(model.value(x)) ** 0.5 for x in us])
    kappa = nu * sqv + J
    bt = np.array([approx.beta_tilde(x) for x in us])
    alpha = np.array([approx.alpha(x) for x in us])
    U = np.array([approx.U(x) for x in us])
    beta, R, rp = _case_b_disks(bt, kappa, U)
    imv = np.array([model.value(x).imag for x in us])
    det = np.array([determinator_kappa(alpha[i], approx.delta(x),
                                       approx.delta_prime(x), bt[i],
                                       kappa[i] - R[i], imv[i])
                    for i, x in enumerate(us)])
    det_scale = (2.0 * np.abs(alpha * U) + 0.5 * np.abs(U)
                 + np.abs(beta * imv) + 1e-300)
    hard = {
        "det_positive": float(np.min(det / det_scale)),
        "g_nondecreasing": float(np.min([approx.sqrt_V(x).real for x in us])),
        "R_nonneg": float(np.min(R / np.maximum(np.abs(rp), 1e-300))),
    }
    sufficient = {
        "eps_nu_ladder": float(ladder_margin),
        "imV_upper_nu": float(imv_upper),
        "bk_upper": float(np.min(1.5 * nu * sqv - np.abs(bt + kappa))),
        "kappa_sandwich_lower": float(np.min(kappa - sqv * (nu - 3 * epsilon))),
        "kappa_sandwich_upper": float(np.min(sqv * (nu + 3 * epsilon) - kappa)),
        "imV2": float(np.min(0.6 * epsilon * np.abs(sqv) ** 3
                             - np.abs((kappa - R) * imv))),
    }
    gating = dict(hard)
    if strict:
        gating.update(sufficient)
    violation = None
    for name, mg in gating.items():
        if mg < 0.0:
            violation = HypothesisViolation(a, name, mg)
            break
    frames = []
    prev_sign = math.copysign(1.0, beta[0]) if len(us) else 1.0
    log_sigma = 2.0 * cumulative_quad(approx.alpha, us)
    for i, x in enumerate(us):
        crossing = 1 if math.copysign(1.0, beta[i]) != prev_sign else 0
        prev_sign = math.copysign(1.0, beta[i])
        frames.append(FlowFrame(float(x), Disk(alpha[i], beta[i],
                                               max(R[i], 0.0)),
                                float(np.exp(np.clip(log_sigma[i], -745, 709))),
                                float(U[i]), float(det[i]),
                                beta_tilde=float(bt[i]),
                                extra={"kappa": float(kappa[i]),
                                       "min_margin": float(det[i] / det_scale[i]),
                                       "lens_lower_beta": float(beta[i] - R[i]),
                                       "crossing_flag": crossing}))
    hyp = [HypothesisRecord(k, _classify(v, 1.0), v) for k, v in gating.items()]
    return EnclosureTube(frames, "lens", hyp, "forward", model, approx,
                         violation, tube_id,
                         meta={"nu": nu, "epsilon": epsilon, "ladder": ladder,
                               "entry_constant": entry_constant,
                               "lemma_diagnostics": sufficient})
