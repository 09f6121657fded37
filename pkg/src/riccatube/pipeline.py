"""End-to-end certification of the angular Teukolsky equation.

Each half of (0, pi) is covered left-to-right by region tubes

    pole -> [shadow bridge] -> evanescent WKB -> turning band
         -> shadow bridge -> lens,

the right half via the mirror symmetry V(pi - u; Omega, k, s) =
V(u; -Omega, -k, s).  Tubes are glued by disk-in-disk containment at the
interface: each tube's entry disk is enlarged (through its T0 / kappa /
entry-constant degree of freedom, all of which only grow the disks) until
it contains the predecessor's exit disk; a backward pole tube instead
shares an anchor disk with the forward chain at its top end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import GlueFailure, HypothesisViolation, RootNotFound
from .kappa_method import kappa_tube, lens_tube
from .oracle import SolutionApproximant, containment_audit
from .riccati_core import Disk
from .special.parabolic import quadratic_fit
from .special.pole import pole_estimate_L0, pole_estimate_Lpos
from .t_method import beta_R_from_T, turning_point_t_estimate, wkb_t_estimate
from .wkb import segment_regions, semiclassical_check


@dataclass
class RegionResult:
    name: str
    method: str
    interval: tuple
    tube: object
    audit: object
    glue_margin: float = math.nan
    diagnostics: dict = field(default_factory=dict)

    @property
    def hypotheses_pass(self) -> bool:
        return self.tube.all_hypotheses_pass

    @property
    def verdict(self) -> str:
        ok = self.hypotheses_pass and self.audit.verdict == "PASS"
        return "PASS" if ok else "FAIL"

    def summary(self) -> dict:
        return {
            "name": self.name, "method": self.method,
            "interval": [self.interval[0], self.interval[1]],
            "hypotheses": [
                {"name": h.name, "status": h.status, "margin": h.margin}
                for h in self.tube.hypothesis_log],
            "hypotheses_pass": self.hypotheses_pass,
            "audit": self.audit.to_dict(),
            "glue_margin": self.glue_margin,
            "verdict": self.verdict,
        }


@dataclass
class HalfCertificate:
    side: str
    region_table: object
    regions: list
    anchor: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "PASS" if all(r.verdict == "PASS" for r in self.regions) else "FAIL"

    def summary(self) -> dict:
        return {"side": self.side,
                "region_table": self.region_table.to_dict(),
                "regions": [r.summary() for r in self.regions],
                "anchor": self.anchor,
                "verdict": self.verdict}


@dataclass
class Certificate:
    config: dict
    config_digest: str
    halves: list
    version: str = __version__

    @property
    def verdict(self) -> str:
        return "PASS" if all(h.verdict == "PASS" for h in self.halves) else "FAIL"

    def to_dict(self) -> dict:
        return {"version": self.version, "config": self.config,
                "config_digest": self.config_digest,
                "halves": [h.summary() for h in self.halves],
                "verdict": self.verdict}


# ---------------------------------------------------------------------------
# Glue helpers
# ---------------------------------------------------------------------------

def _bisect_increasing(f, lo, hi, n=80):
    """Smallest x in [lo, hi] with f(x) >= 0 for f non-decreasing."""
    if f(lo) >= 0.0:
        return lo
    if f(hi) < 0.0:
        return None
    for _ in range(n):
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def entry_T0_for_disk(approximant, u_entry: float, target: Disk,
                      margin: float = 0.0) -> float:
    """Minimal T0 whose entry disk contains the target disk."""
    U = approximant.U(u_entry)
    alpha = approximant.alpha(u_entry)

    def gap(T0):
        beta, R = beta_R_from_T(U, T0)
        d = Disk(alpha, beta, R)
        return d.contains_disk(target) - margin

    T0 = _bisect_increasing(lambda t: gap(math.exp(t)), 0.0, 40.0)
    if T0 is None:
        raise GlueFailure(u_entry, gap(math.exp(40.0)),
                          "no T0 makes the entry disk contain the exit disk")
    return max(1.0, math.exp(T0) * (1.0 + 1e-9))


def entry_kappa_for_disk(approximant, u_entry: float, target: Disk,
                         margin: float = 0.0) -> float:
    """Minimal case-B entry kappa whose disk contains the target disk."""
    bt = approximant.beta_tilde(u_entry)
    alpha = approximant.alpha(u_entry)
    U = approximant.U(u_entry)

    def gap(kap):
        rp = bt + kap
        if rp <= 0:
            return -math.inf
        rm = U / rp
        d = Disk(alpha, 0.5 * (rp - rm), 0.5 * (rp + rm))
        if d.radius < 0:
            return -math.inf
        return d.contains_disk(target) - margin

    k = _bisect_increasing(lambda t: gap(math.exp(t)), -20.0, 40.0)
    if k is None:
        raise GlueFailure(u_entry, gap(math.exp(40.0)),
                          "no entry kappa contains the exit disk")
    return math.exp(k) * (1.0 + 1e-9)


def lens_entry_margin(tube, target: Disk, n_boundary: int = 64) -> float:
    """Signed margin for the target disk inside the lens entry region
    (disk union conjugate disk), sampled on the target's boundary."""
    f = tube.frames[0]
    m, R = f.disk.center, f.disk.radius
    worst = math.inf
    for th in np.linspace(0.0, 2.0 * math.pi, n_boundary, endpoint=False):
        z = target.center + target.radius * complex(math.cos(th), math.sin(th))
        dist = min(abs(z - m), abs(np.conjugate(z) - m))
        worst = min(worst, R - dist)
    return worst


def wkb_start_auto(model, u_max: float, epsilon: float,
                   headroom: float = 0.02) -> float:
    """Smallest start (as a multiple of |Omega|^(-1/2)) from which the
    semiclassical inequalities hold on [start, u_max] with headroom.

    Near the pole the derivative bounds fail no matter the interval (the
    pole block dominates), so the start is scanned outward until all three
    inequalities clear; the pole-region tube covers what is skipped.
    """
    om_root = math.sqrt(abs(model.omega))
    for fac in np.geomspace(0.5, 60.0, 120):
        start = fac / om_root
        if start >= 0.9 * u_max:
            break
        sc = semiclassical_check(model, (start, u_max), epsilon, n=160)
        if all(sc[f"margin_V{k}"] > headroom for k in (1, 2, 3)):
            return min(start * 1.02, 0.95 * u_max)
    raise RootNotFound("wkb_start")


# ---------------------------------------------------------------------------
# The half-interval chain
# ---------------------------------------------------------------------------

def certify_half(cfg, side: str) -> HalfCertificate:
    model = cfg.model() if side == "left" else cfg.model().mirror()
    om = abs(cfg.omega)
    upper = 0.5 * math.pi
    rt = segment_regions(model, cfg.alpha_exp, cfg.C, C2=cfg.C2, upper=upper)
    eps_ev = cfg.epsilon_evanescent()
    regions = []
    anchor = {}
    seed = cfg.seed + (0 if side == "left" else 1)

    def audited(name, method, tube, interval, glue_margin, diag=None):
        rep = containment_audit(tube, n_starts=cfg.n_starts,
                                seed=seed + len(regions))
        regions.append(RegionResult(name, method, interval, tube, rep,
                                    glue_margin, diag or {}))
        return regions[-1]

    L = model.pole_order_left
    wkb_start = wkb_start_auto(model, rt.u_max, eps_ev)

    # -- 1. pole region ------------------------------------------------------
    if L == 0:
        u_hand = max(cfg.pole_handoff_factor / math.sqrt(om), wkb_start)
        wkb_start = u_hand
        pole_tube, pole_diag = pole_estimate_L0(model, u_hand,
                                                n_grid=cfg.grid)
        audited("pole", "tmethod", pole_tube, (0.0, u_hand), math.nan,
                {k: v for k, v in pole_diag.items() if k != "zeta"})
        prev_exit = pole_tube.frames[-1].disk
    else:
        pole_tube, pole_diag = pole_estimate_Lpos(
            model, c_min=cfg.cscr_min, c_max=cfg.cscr_max, c4=cfg.c4,
            eps_zeta_deg=cfg.eps_zeta_deg, n_grid=cfg.grid)
        u_anchor = pole_diag["u_start"]
        audited("pole", "kappa-backward", pole_tube, (0.0, u_anchor),
                math.nan,
                {k: v for k, v in pole_diag.items() if k != "zeta"})
        backward_anchor = pole_tube.frames[0].disk
        # the forward chain seeds inside the backward tube's entry disk and
        # a shadowing tube carries it to the semiclassical start
        seed_disk = Disk(backward_anchor.alpha, backward_anchor.beta,
                         0.25 * backward_anchor.radius)
        wkb_start = max(wkb_start, u_anchor * 1.0001)
        bridge0 = _shadow_bridge(model, (u_anchor, wkb_start), seed_disk,
                                 cfg, "bridge-anchor")
        anchor["containment"] = backward_anchor.contains_disk(seed_disk)
        anchor["u"] = u_anchor
        audited("bridge_anchor", bridge0.method + "-shadow", bridge0,
                (u_anchor, wkb_start), lens_entry_margin(bridge0, seed_disk))
        prev_exit = bridge0.frames[-1].disk

    # -- 2. evanescent WKB ----------------------------------------------------
    from .wkb import WkbApproximant
    ev_approx = WkbApproximant(model, (wkb_start, rt.u_max), eps_ev,
                               branch_seed="im_positive")
    T0 = entry_T0_for_disk(ev_approx, wkb_start, prev_exit, cfg.glue_margin)
    ev_tube, _, ev_diag = wkb_t_estimate(model, (wkb_start, rt.u_max), eps_ev,
                                         n_grid=cfg.grid, T0=T0)
    g1 = ev_tube.frames[0].disk.contains_disk(prev_exit)
    audited("evanescent", "tmethod", ev_tube, (wkb_start, rt.u_max), g1,
            {k: v for k, v in ev_diag.items()
             if isinstance(v, (int, float))})
    prev_exit = ev_tube.frames[-1].disk

    # -- 3. turning band -------------------------------------------------------
    quad, u1q = quadratic_fit(model, (rt.u_max, rt.u_plus))
    from .special.parabolic import PCApproximant
    pc_approx = PCApproximant(model, quad, conjugated=True)
    T0t = entry_T0_for_disk(pc_approx, rt.u_max, prev_exit, cfg.glue_margin)
    turn_tube, C_fit, turn_diag = turning_point_t_estimate(
        model, quad, (rt.u_max, rt.u_minus), rt.u_plus, n_grid=cfg.grid,
        T0=T0t)
    g2 = turn_tube.frames[0].disk.contains_disk(prev_exit)
    audited("turning", "tmethod", turn_tube, (rt.u_max, rt.u_minus), g2,
            turn_diag)
    prev_exit = turn_tube.frames[-1].disk

    # -- 4. bridge to the oscillatory entry ------------------------------------
    bridge = _shadow_bridge(model, (rt.u_minus, rt.u_min), prev_exit, cfg,
                            "bridge-lens")
    g3 = bridge.frames[0].disk.contains_disk(prev_exit)
    audited("bridge", "caseB-shadow", bridge, (rt.u_minus, rt.u_min), g3)
    prev_exit = bridge.frames[-1].disk

    # -- 5. lens -----------------------------------------------------------------
    lens = lens_tube(model, (rt.u_min, upper), cfg.epsilon_lens(),
                     cfg.nu_lens(), n_grid=cfg.grid,
                     ladder=cfg.lens_ladder)
    g4 = lens_entry_margin(lens, prev_exit)
    if g4 < cfg.glue_margin:
        # enlarge the lens entry through the additive constant
        def gap(c0):
            t = lens_tube(model, (rt.u_min, upper), cfg.epsilon_lens(),
                          cfg.nu_lens(), n_grid=max(cfg.grid // 4, 32),
                          entry_constant=c0, ladder=cfg.lens_ladder)
            return lens_entry_margin(t, prev_exit) - cfg.glue_margin
        c0 = _bisect_increasing(lambda t: gap(math.exp(t)), -10.0, 25.0)
        if c0 is None:
            raise GlueFailure(rt.u_min, g4, "lens entry cannot contain the "
                              "bridge exit disk")
        lens = lens_tube(model, (rt.u_min, upper), cfg.epsilon_lens(),
                         cfg.nu_lens(), n_grid=cfg.grid,
                         entry_constant=math.exp(c0),
                         ladder=cfg.lens_ladder)
        g4 = lens_entry_margin(lens, prev_exit)
    audited("lens", "lens", lens, (rt.u_min, upper), g4,
            {"lemma45": lens.meta["lemma_diagnostics"]})

    return HalfCertificate(side, rt, regions, anchor)


def _shadow_bridge(model, interval, entry_target: Disk, cfg,
                   tube_id: str):
    """Case-B tube around a reference solution with Vtilde = V.

    The reference starts at the target disk's center; the entry kappa is
    the smallest making the entry region contain the target.  When the
    target touches the lower half plane (data handed over from a backward
    pole tube), the bridge runs in lens semantics: the reference starts at
    the conjugated center and containment means membership in the disk or
    its conjugate (the reflection argument for case-B families).
    """
    a, b = interval
    center = entry_target.center
    lens_mode = (center.imag - entry_target.radius) < 0.0
    y0 = center.conjugate() if center.imag < 0.0 else center
    approx = SolutionApproximant(model, (a, b), y0)

    if not lens_mode:
        kap = entry_kappa_for_disk(approx, a, entry_target, cfg.glue_margin)
    else:
        bt = approx.beta_tilde(a)
        alpha = approx.alpha(a)
        ths = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
        zs = (entry_target.center
              + entry_target.radius * np.exp(1j * ths))

        def gap(kap):
            rp = bt + kap
            if rp <= 0:
                return -math.inf
            R = kap * (2.0 * bt + kap) / (2.0 * rp)
            m = complex(alpha, rp - R)
            dist = np.maximum(np.abs(zs - m), 0.0)
            dist = np.minimum(dist, np.abs(np.conjugate(zs) - m))
            return R - float(np.max(dist)) - cfg.glue_margin

        k = _bisect_increasing(lambda t: gap(math.exp(t)), -20.0, 40.0)
        if k is None:
            raise GlueFailure(a, gap(math.exp(40.0)),
                              "no entry kappa lens-contains the exit disk")
        kap = math.exp(k) * (1.0 + 1e-9)
    us = np.linspace(a, b, cfg.grid)
    tube = kappa_tube(model, approx, (a, b), grid=us, g_fn=lambda u: kap,
                      certificate="lemma36+reflection" if lens_mode
                      else "lemma36", tube_id=tube_id)
    if lens_mode:
        tube.method = "lens"
    return tube


def certify(cfg) -> Certificate:
    halves = [certify_half(cfg, "left"), certify_half(cfg, "right")]
    return Certificate(cfg.to_dict(), cfg.digest(), halves)


# ---------------------------------------------------------------------------
# Scaling sweeps
# ---------------------------------------------------------------------------

def _fit_loglog(xs, ys):
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    n = len(xs)
    if n > 2 and res.size:
        s2 = float(res[0]) / (n - 2)
        cov = s2 * np.linalg.inv(A.T @ A)
        ci = 2.0 * math.sqrt(max(cov[0, 0], 0.0))
    else:
        ci = math.nan
    return float(coef[0]), ci


def _scaled_model(cfg, omega_abs: float, mirror: bool):
    """Family member with fixed Re mu / |Omega|^2 and fixed Im mu."""
    base = cfg.model()
    mu0 = base.mu
    m_frac = mu0.real / abs(base.omega) ** 2
    om = omega_abs + 1j * cfg.omega.imag
    mu = m_frac * abs(om) ** 2 + 1j * mu0.imag
    s = float(base.s)
    lam = mu + 2.0 * om * float(base.k) - s * s - 0.25
    from .potential import TeukolskyModel
    model = TeukolskyModel(om, base.k, base.s, lam)
    return model.mirror() if mirror else model


def sweep(cfg, omega_abs_list) -> dict:
    """Log-log scaling fits across an Omega sweep.

    Fits: the near-pole stationary point u0 (expected exponent -1/2), the
    evanescent max log T growth (expected <= -5 alpha/2 + 4), the lens size
    (R + beta)/sqrt|V| (expected 2 - 3 alpha/2), and the oscillatory entry
    width u_min - u1 (expected alpha - 2).  The model family keeps
    Re mu / |Omega|^2 and Im mu fixed at the configured values.
    """
    from .special.pole import find_u0_stationary
    if len(omega_abs_list) < 3:
        raise ValueError("sweep needs at least 3 omega magnitudes")
    alpha = cfg.alpha_exp
    base_left_L = cfg.model().pole_order_left
    mirror_for_u0 = base_left_L == 0
    vals = {"u0": [], "logT": [], "lens": [], "umin_minus_u1": []}
    for w in omega_abs_list:
        model = _scaled_model(cfg, w, mirror=False)
        model_u0 = _scaled_model(cfg, w, mirror=mirror_for_u0)
        vals["u0"].append(find_u0_stationary(model_u0))
        rt = segment_regions(model, alpha, cfg.C, C2=cfg.C2)
        vals["umin_minus_u1"].append(rt.u_min - rt.u1)
        eps = abs(model.omega) ** (2.0 - 1.5 * alpha)
        start = wkb_start_auto(model, rt.u_max, eps)
        tube, _, diag = wkb_t_estimate(model, (start, rt.u_max), eps,
                                       n_grid=max(cfg.grid // 2, 60))
        logT = tube.meta["logT"]
        vals["logT"].append(float(np.max(logT) - logT[0]))
        eps_l = cfg.delta * abs(model.omega) ** (2.0 - 1.5 * alpha)
        nu_l = cfg.nu_policy_coeff * eps_l
        lens = lens_tube(model, (rt.u_min, 0.5 * math.pi), eps_l, nu_l,
                         n_grid=max(cfg.grid // 2, 60),
                         ladder=cfg.lens_ladder)
        ratio = [(f.disk.radius + f.disk.beta)
                 / math.sqrt(abs(model.value(f.u))) for f in lens.frames]
        vals["lens"].append(float(np.median(ratio)))
    fits = {}
    expected = {"u0": -0.5, "logT": -2.5 * alpha + 4.0,
                "lens": 2.0 - 1.5 * alpha, "umin_minus_u1": alpha - 2.0}
    for name, ys in vals.items():
        exp_fit, ci = _fit_loglog(omega_abs_list, ys)
        fits[name] = {"omega_abs": list(map(float, omega_abs_list)),
                      "values": list(map(float, ys)),
                      "exponent": exp_fit, "ci95": ci,
                      "expected": expected[name]}
    return {"alpha_exp": alpha, "fits": fits,
            "config_digest": cfg.digest()}


# ---------------------------------------------------------------------------
# Calibration of existence-only constants
# ---------------------------------------------------------------------------

def calibrate(cfg) -> dict:
    """Sweep the existence-only constants upward until the shipped in-box
    checks pass on the configured model; returns the lockfile table."""
    from .special.parabolic import pc_bounds_check, quadratic_fit
    from .special.pole import pole_estimate_Lpos
    table = {}
    model = cfg.model()
    mirror = model.mirror()
    rt = segment_regions(model, cfg.alpha_exp, cfg.C, C2=cfg.C2)
    quad, u1q = quadratic_fit(model, (rt.u_max, rt.u_plus))
    us = np.linspace(rt.u_max, rt.u_minus, 60)
    for c1 in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0):
        rep = pc_bounds_check(quad, abs(cfg.omega), c1, cfg.C2, us, c=4.0)
        worst = min(rep["worst"]["re_bound"], rep["worst"]["im_bound"],
                    rep["worst"]["one_sided"])
        box_worst = min(rep["box_margins"].values())
        if worst >= 0.0 and box_worst >= 0.0:
            table["C1"] = {"value": c1, "worst_margin": float(worst)}
            break
    lpos_model = mirror if model.pole_order_left == 0 else model
    for cscr in (1.0, 1.5, 2.0, 3.0, 5.0, 8.0):
        try:
            tube, diag = pole_estimate_Lpos(lpos_model, cscr=cscr,
                                            n_grid=max(cfg.grid // 2, 60))
        except Exception:
            continue
        if tube.all_hypotheses_pass:
            table["cscr_min"] = {"value": cscr,
                                 "worst_margin": float(tube.min_margin())}
            break
    eps = cfg.epsilon_evanescent()
    start = wkb_start_auto(model, rt.u_max, eps)
    table["pole_handoff_factor"] = {
        "value": float(math.ceil(start * math.sqrt(abs(cfg.omega)) * 10) / 10),
        "worst_margin": 0.0}
    table["C2"] = {"value": cfg.C2, "worst_margin": float(
        pc_bounds_check(quad, abs(cfg.omega),
                        table.get("C1", {"value": cfg.C1})["value"],
                        cfg.C2, us, c=4.0)["vt_edge_ratio"])}
    return table
