"""WKB approximants (plain and driven), semiclassical hypothesis checks,
and region segmentation for the angular Teukolsky potential.

The square-root branch is tracked continuously along the interval (root
nearest the previous value), seeded by an explicit policy; the shipped
regions use "im_positive" where Re V < 0 (so arg sqrt(V) sits in the upper
quadrant) and "re_positive" where Re V > 0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchAmbiguity, RootNotFound
from .quadrature import adaptive_quad
from .riccati_core import Approximant


class BranchTracker:
    """Continuous square root of V along an interval."""

    def __init__(self, model, interval, seed: str = "principal",
                 n_grid: int = 2048):
        self.model = model
        a, b = float(interval[0]), float(interval[1])
        self.us = np.linspace(a, b, n_grid)
        vals = np.array([model.value(u) for u in self.us])
        scale = float(np.median(np.abs(vals)))
        if np.any(np.abs(vals) < 1e-24 * max(scale, 1.0)):
            raise BranchAmbiguity("potential vanishes on the interval")
        roots = np.sqrt(vals)
        first = roots[0]
        if seed == "re_positive" and first.real < 0:
            first = -first
        elif seed == "im_positive" and first.imag < 0:
            first = -first
        tracked = np.empty_like(roots)
        tracked[0] = first
        for i in range(1, len(roots)):
            r = roots[i]
            tracked[i] = r if abs(r - tracked[i - 1]) <= abs(r + tracked[i - 1]) else -r
        self.tracked = tracked
        self._a = a
        self._inv_h = (n_grid - 1) / (b - a) if b > a else 0.0
        self._n = n_grid
        self._tracked_list = tracked.tolist()

    def sqrt_V(self, u: float) -> complex:
        w = cmath.sqrt(self.model.value(u))
        i = int((u - self._a) * self._inv_h + 0.5)
        if i < 0:
            i = 0
        elif i >= self._n:
            i = self._n - 1
        ref = self._tracked_list[i]
        dr = w.real - ref.real
        di = w.imag - ref.imag
        sr = w.real + ref.real
        si = w.imag + ref.imag
        return w if dr * dr + di * di <= sr * sr + si * si else -w


class WkbApproximant(Approximant):
    """ytilde = sqrt(V) - V'/(4V) (+ driving term), an exact Riccati solution
    of the effective potential Vtilde recorded in closed form."""

    def __init__(self, model, interval, epsilon: float = 0.0,
                 driven: bool = False, driving_sign: int = +1,
                 branch_seed: str = "principal"):
        if driven and driving_sign not in (+1, -1):
            raise ValueError("driving sign must be +-1")
        self.model = model
        self.interval = tuple(interval)
        self.epsilon = epsilon
        self.driven = driven
        self.driving_sign = driving_sign
        self.branch_seed = branch_seed
        self._branch = BranchTracker(model, interval, seed=branch_seed)
        self.u0 = float(interval[0])

    # -- driving function -------------------------------------------------
    def _cf(self) -> complex:
        return -0.5 * self.driving_sign * self.epsilon * (1.0 + 1.0j)

    def f(self, u: float) -> complex:
        if not self.driven:
            return 0.0
        return self._cf() * self._branch.sqrt_V(u).real

    def _f1(self, u: float, V, V1) -> complex:
        if not self.driven:
            return 0.0
        sq = self._branch.sqrt_V(u)
        return self._cf() * (V1 / (2.0 * sq)).real

    def _f2(self, u: float, V, V1, V2) -> complex:
        if not self.driven:
            return 0.0
        sq = self._branch.sqrt_V(u)
        return self._cf() * (V2 / (2.0 * sq) - V1 * V1 / (4.0 * V * sq)).real

    # -- approximant surface ----------------------------------------------
    def sqrt_V(self, u: float) -> complex:
        return self._branch.sqrt_V(u)

    def y_tilde(self, u: float) -> complex:
        V, V1 = self.model.eval(u, 1)
        return self._branch.sqrt_V(u) - V1 / (4.0 * V) + self.f(u)

    def V_tilde(self, u: float) -> complex:
        return self.model.value(u) - self.delta(u)

    def delta(self, u: float) -> complex:
        d = self.model.eval(u, 2)
        V, V1, V2 = d[0], d[1], d[2]
        base = -0.3125 * V1 * V1 / (V * V) + 0.25 * V2 / V
        if not self.driven:
            return base
        sq = self._branch.sqrt_V(u)
        fv = self.f(u)
        f1 = self._f1(u, V, V1)
        return (base - 2.0 * fv * sq - fv * fv + 0.5 * fv * V1 / V - f1)

    def delta_prime(self, u: float) -> complex:
        d = self.model.eval(u, 3)
        V, V1, V2, V3 = d[0], d[1], d[2], d[3]
        base = (-0.625 * V1 * V2 / (V * V) + 0.625 * V1 ** 3 / V ** 3
                + 0.25 * V3 / V - 0.25 * V1 * V2 / (V * V))
        if not self.driven:
            return base
        sq = self._branch.sqrt_V(u)
        fv = self.f(u)
        f1 = self._f1(u, V, V1)
        f2 = self._f2(u, V, V1, V2)
        return (base - 2.0 * f1 * sq - fv * V1 / sq - 2.0 * fv * f1
                + 0.5 * f1 * V1 / V + 0.5 * fv * (V2 / V - (V1 / V) ** 2)
                - f2)

    # -- closed-form sigma -------------------------------------------------
    def log_sigma(self, u: float, epsrel: float = 1e-12) -> float:
        """log sigma normalized to sigma(u0) = 1:
        (|V(u0)|/|V(u)|)^(1/2) exp((2 - s eps) int Re sqrt V)."""
        factor = 2.0 - (self.driving_sign * self.epsilon if self.driven else 0.0)
        integral = adaptive_quad(lambda v: self._branch.sqrt_V(v).real,
                                 self.u0, u, epsrel=epsrel)
        v0 = abs(self.model.value(self.u0))
        vu = abs(self.model.value(u))
        return 0.5 * (math.log(v0) - math.log(vu)) + factor * integral

    def phi_tilde(self, u: float, epsrel: float = 1e-12) -> complex:
        """V^(-1/4) exp(int_{u0}^{u} (sqrt V + f)), for residual audits."""
        integral = adaptive_quad(lambda v: self._branch.sqrt_V(v) + self.f(v),
                                 self.u0, u, epsrel=epsrel,
                                 complex_valued=True)
        V = self.model.value(u)
        return cmath.exp(integral) / cmath.sqrt(self._branch.sqrt_V(u))


def wkb_approximant(model, interval, epsilon: float, driven: bool = False,
                    sign: int = +1, branch_seed: str = "principal"):
    return WkbApproximant(model, tuple(interval), epsilon, driven, sign,
                          branch_seed)


def semiclassical_check(model, interval, epsilon: float, n: int = 400,
                        inf_safety: float = 0.99) -> dict:
    """Margins of sup |V^(k)| <= eps^k inf |V|^(1 + k/2), k = 1, 2, 3.

    The grid infimum of |V| is reduced by the safety factor (a grid
    infimum overestimates the true one).  All-positive margins = pass.
    """
    us = np.linspace(float(interval[0]), float(interval[1]), n)
    vals = np.array([model.eval(u, 3) for u in us])
    inf_v = inf_safety * float(np.min(np.abs(vals[:, 0])))
    out = {"inf_V": inf_v, "epsilon": epsilon}
    for k, name in ((1, "V1"), (2, "V2"), (3, "V3")):
        sup = float(np.max(np.abs(vals[:, k])))
        rhs = epsilon ** k * inf_v ** (1.0 + 0.5 * k)
        out[f"sup_{name}"] = sup
        out[f"margin_{name}"] = (rhs - sup) / rhs if rhs > 0 else -math.inf
    out["pass"] = all(out[f"margin_V{k}"] > 0 for k in (1, 2, 3))
    return out


# ---------------------------------------------------------------------------
# Region segmentation
# ---------------------------------------------------------------------------

@dataclass
class RegionTable:
    """Markers of the certification regions on (0, pi/2].

    u0_min: stationary point of Re V near the pole (Re V' = 0), when present;
    u1: the rising zero of Re V (the turning point);
    u_zero_falling: the near-pole falling zero of Re V, when present;
    u_max: Re V = -|Omega|^alpha on the evanescent side;
    u_min: Re V = +C |Omega|^alpha on the oscillatory side;
    u_minus/u_plus: turning-band edges from the quadratic fit.
    """

    alpha_exp: float
    C: float
    omega_abs: float
    u0_min: float = None
    u1: float = None
    u_zero_falling: float = None
    u_max: float = None
    u_min: float = None
    u_minus: float = None
    u_plus: float = None
    residuals: dict = field(default_factory=dict)
    conditions: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"alpha_exp": self.alpha_exp, "C": self.C,
                "omega_abs": self.omega_abs,
                "markers": {k: getattr(self, k) for k in
                            ("u0_min", "u1", "u_zero_falling", "u_max",
                             "u_min", "u_minus", "u_plus")},
                "residuals": self.residuals,
                "conditions": self.conditions}


def _bisect(f, lo, hi, tol=1e-12):
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if flo * fm <= 0:
            hi = mid
        else:
            lo, flo = mid, fm
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def _scan_roots(f, us):
    vals = np.array([f(u) for u in us])
    idx = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
    return [_bisect(f, us[i], us[i + 1]) for i in idx], vals


def segment_regions(model, alpha_exp: float, C: float, C2: float = 1.0,
                    n_scan: int = 4096, delta: float = 1e-6,
                    upper: float = None) -> RegionTable:
    """Locate the region markers by sign scan plus bisection.

    The scan covers (delta, upper] with upper defaulting to pi/2 (the
    pipeline mirrors the construction about the midpoint).
    """
    om = abs(model.omega)
    upper = 0.5 * math.pi if upper is None else upper
    us = np.geomspace(delta, upper, n_scan)
    re_v = lambda u: model.value(u).real
    re_vp = lambda u: model.eval(u, 1)[1].real

    table = RegionTable(alpha_exp=alpha_exp, C=C, omega_abs=om)
    zeros, scan_vals = _scan_roots(re_v, us)
    rising = [z for z in zeros if re_vp(z) > 0]
    falling = [z for z in zeros if re_vp(z) <= 0]
    if not rising:
        raise RootNotFound("u1_rising_zero",
                           scan_table=list(zip(us[::128], scan_vals[::128])))
    table.u1 = rising[0]
    table.residuals["u1"] = abs(re_v(table.u1))
    table.conditions["u1_slope_over_om2"] = re_vp(table.u1) / om ** 2
    if falling:
        table.u_zero_falling = falling[0]

    stat, _ = _scan_roots(re_vp, us[us < table.u1])
    if stat:
        table.u0_min = stat[0]
        table.residuals["u0_min"] = abs(re_vp(table.u0_min))

    target = om ** alpha_exp
    lo = table.u_zero_falling if table.u_zero_falling is not None else delta
    f_max = lambda u: re_v(u) + target
    grid = np.linspace(lo, table.u1, 2000)
    roots, _ = _scan_roots(f_max, grid)
    if roots:
        table.u_max = roots[-1]
        table.residuals["u_max"] = abs(f_max(table.u_max))

    f_min = lambda u: re_v(u) - C * target
    grid = np.linspace(table.u1, upper, 2000)
    roots, _ = _scan_roots(f_min, grid)
    if roots:
        table.u_min = roots[0]
        table.residuals["u_min"] = abs(f_min(table.u_min))
        vals = [re_v(u) for u in np.linspace(table.u_min, upper, 500)]
        table.conditions["Vgtr_margin"] = (min(vals) - 0.5 * C * target) / target

    # turning-band edges from the quadratic fit around u1
    if table.u_max is not None:
        from .special.parabolic import quadratic_fit, u_pm
        band_lo = table.u_max
        band_hi = min(upper, table.u1 + (table.u1 - table.u_max))
        quad, u1q = quadratic_fit(model, (band_lo, band_hi))
        table.u_minus, table.u_plus = u_pm(quad, u1q, C2)
        table.conditions["pq_abs"] = abs(quad.p * quad.q)
    return table


def prop51_bound(model, alpha_exp: float, interval=None, epsilon=None,
                 n_grid: int = 200, region_table: RegionTable = None):
    """Evanescent-side tube with the closed-form log T bound.

    Runs the zero-correction WKB estimate on [u0, u_max] with
    eps = |Omega|^(2 - 3 alpha/2); hypotheses (semiclassical inequalities,
    branch sector, Im V >= 0) are logged on the tube.
    Returns (tube, bound_value, diagnostics).
    """
    from .t_method import wkb_t_estimate
    if not (8.0 / 5.0 < alpha_exp <= 2.0):
        raise ValueError("alpha_exp must be in (8/5, 2] here")
    om = abs(model.omega)
    if epsilon is None:
        epsilon = om ** (2.0 - 1.5 * alpha_exp)
    if interval is None:
        if region_table is None:
            raise ValueError("supply an interval or a region table")
        if region_table.u0_min is None or region_table.u_max is None:
            raise RootNotFound("u0_min/u_max for the evanescent interval")
        interval = (region_table.u0_min, region_table.u_max)
    tube, bound, diag = wkb_t_estimate(model, interval, epsilon,
                                       n_grid=n_grid,
                                       branch_seed="im_positive")
    us = np.linspace(float(interval[0]), float(interval[1]), 200)
    args = [math.degrees(cmath.phase(tube.approximant.sqrt_V(u))) for u in us]
    diag["arg_sqrtV_range"] = (min(args), max(args))
    diag["arg_sqrtV_in_sector"] = all(74.9 <= a_ <= 90.1 for a_ in args)
    return tube, bound, diag
