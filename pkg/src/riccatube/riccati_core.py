"""Invariant-disk calculus for the complex Riccati flow y' = V - y^2.

Implements the sigma/U/determinator quantities, the two-case invariant disk
construction, the approximate-potential identities used by the T- and
kappa-methods, and certified lower bounds for Im y.

Conventions: a disk is (center m = alpha + i beta, radius R); a tube is a
sampled sequence of disks with diagnostics and a hypothesis log; u is the
flow time.  Backward tubes store frames with decreasing u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import HypothesisViolation, StepFailure
from .quadrature import adaptive_quad, cumulative_quad

_INCONCLUSIVE_FACTOR = 1e-8


# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Disk:
    """Closed disk |y - (alpha + i beta)| <= radius."""

    alpha: float
    beta: float
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("disk radius must be >= 0")

    @property
    def center(self) -> complex:
        return complex(self.alpha, self.beta)

    def contains(self, y: complex, slack: float = 0.0) -> bool:
        return abs(y - self.center) <= self.radius * (1.0 + slack)

    def contains_disk(self, other: "Disk") -> float:
        """Signed containment margin: >= 0 iff ``other`` is inside self."""
        return self.radius - (abs(self.center - other.center) + other.radius)


@dataclass(frozen=True)
class FlowFrame:
    u: float
    disk: Disk
    sigma: float
    U: float
    det: float
    beta_tilde: float = math.nan
    extra: dict = field(default_factory=dict)


@dataclass
class HypothesisRecord:
    name: str
    status: str        # "pass" | "fail" | "inconclusive"
    margin: float      # signed, scaled; negative means violated
    u: float = math.nan
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


CSV_COLUMNS = ("u", "alpha", "beta", "R", "sigma", "U", "det", "T_or_kappa",
               "method", "hypothesis_min_margin")
LENS_EXTRA_COLUMNS = ("lens_lower_beta", "crossing_flag")


@dataclass
class EnclosureTube:
    """Sampled invariant-region certificate: frames + hypothesis log."""

    frames: list
    method: str         # caseA | caseB | tmethod | kappa | lens
    hypothesis_log: list
    direction: str = "forward"
    model: object = None
    approximant: object = None
    violation: HypothesisViolation = None
    tube_id: str = "tube"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        us = np.array([f.u for f in self.frames])
        if len(us) >= 2:
            d = np.diff(us)
            mono = np.all(d > 0) if self.direction == "forward" else np.all(d < 0)
            if not mono:
                raise ValueError("frame grid must be strictly monotone in the"
                                 " tube direction")

    @property
    def us(self) -> np.ndarray:
        return np.array([f.u for f in self.frames])

    @property
    def centers(self) -> np.ndarray:
        return np.array([f.disk.center for f in self.frames])

    @property
    def radii(self) -> np.ndarray:
        return np.array([f.disk.radius for f in self.frames])

    @property
    def all_hypotheses_pass(self) -> bool:
        return (self.violation is None
                and all(h.status == "pass" for h in self.hypothesis_log))

    def min_margin(self) -> float:
        if not self.hypothesis_log:
            return math.inf
        return min(h.margin for h in self.hypothesis_log)

    def scaled(self, factor: float) -> "EnclosureTube":
        """Copy with radii multiplied by ``factor`` (negative controls)."""
        frames = [FlowFrame(f.u, Disk(f.disk.alpha, f.disk.beta,
                                      f.disk.radius * factor),
                            f.sigma, f.U, f.det, f.beta_tilde, dict(f.extra))
                  for f in self.frames]
        return EnclosureTube(frames, self.method, list(self.hypothesis_log),
                             self.direction, self.model, self.approximant,
                             self.violation, self.tube_id + "-scaled",
                             dict(self.meta))

    def to_csv(self, path) -> None:
        lens = self.method == "lens"
        cols = CSV_COLUMNS + (LENS_EXTRA_COLUMNS if lens else ())
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for f in self.frames:
                t_or_k = f.extra.get("T", f.extra.get("kappa", math.nan))
                row = [f.u, f.disk.alpha, f.disk.beta, f.disk.radius,
                       f.sigma, f.U, f.det, t_or_k]
                cells = [f"{v:.17g}" for v in row]
                cells.append(self.method)
                cells.append(f"{f.extra.get('min_margin', math.nan):.17g}")
                if lens:
                    cells.append(f"{f.extra.get('lens_lower_beta', math.nan):.17g}")
                    cells.append(f"{f.extra.get('crossing_flag', 0):.17g}")
                fh.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# Elementary operations
# ---------------------------------------------------------------------------

def wronskian(phi1, phi2, u: float = None) -> complex:
    """phi1 * phi2' - phi1' * phi2 for samples carrying (value, derivative).

    Samples are (phi, dphi) pairs or objects with .phi(u)/.dphi(u).
    """
    def unpack(p):
        if hasattr(p, "phi"):
            return p.phi(u), p.dphi(u)
        return p
    v1, d1 = unpack(phi1)
    v2, d2 = unpack(phi2)
    return v1 * d2 - d1 * v2


def sigma_integral(alpha_fn, u0: float, u: float, epsrel: float = 1e-12) -> float:
    """sigma(u) = exp(2 * int_{u0}^{u} alpha), normalized so sigma(u0) = 1."""
    return math.exp(2.0 * adaptive_quad(alpha_fn, u0, u, epsrel=epsrel))


def compute_U(V: complex, alpha: float, alpha_prime: float) -> float:
    """U = Re V - alpha^2 - alpha'."""
    return V.real - alpha * alpha - alpha_prime


def compute_U_from_approximant(V: complex, Vt: complex, beta_tilde: float) -> float:
    """U = Re(V - Vt) - beta_tilde^2 (valid when alpha = Re ytilde)."""
    return (V - Vt).real - beta_tilde * beta_tilde


def determinator(alpha: float, U: float, U_prime: float, beta: float,
                 im_V: float) -> float:
    """Form 1: D = 2 alpha U + U'/2 + beta Im V."""
    return 2.0 * alpha * U + 0.5 * U_prime + beta * im_V


def determinator_approx(alpha: float, delta: complex, delta_prime: complex,
                        beta_tilde: float, im_V_tilde: float, beta: float,
                        im_V: float) -> float:
    """Form 2 (attached approximant, delta = V - Vt):
    D = 2 alpha Re(delta) + Re(delta')/2 - beta_tilde Im Vt + beta Im V."""
    return (2.0 * alpha * delta.real + 0.5 * delta_prime.real
            - beta_tilde * im_V_tilde + beta * im_V)


def determinator_kappa(alpha: float, delta: complex, delta_prime: complex,
                       beta_tilde: float, kappa_pm_R: float,
                       im_V: float) -> float:
    """Form 3 (kappa-calculus):
    D = 2 alpha Re(delta) + Re(delta')/2 + beta_tilde Im(delta)
        + (kappa +- R) Im V."""
    return (2.0 * alpha * delta.real + 0.5 * delta_prime.real
            + beta_tilde * delta.imag + kappa_pm_R * im_V)


# ---------------------------------------------------------------------------
# Center sources: explicit alpha or a Riccati approximant
# ---------------------------------------------------------------------------

@dataclass
class CustomCenter:
    """Explicit center data alpha(u) with derivatives for Theorem-3.1 tubes."""

    alpha: object
    alpha_prime: object
    alpha_second: object = None

    def alpha_d2(self, u: float) -> float:
        if self.alpha_second is not None:
            return self.alpha_second(u)
        h = 1e-5 * max(1.0, abs(u))
        return (self.alpha_prime(u + h) - self.alpha_prime(u - h)) / (2.0 * h)


class Approximant:
    """Riccati approximant ytilde = alpha + i beta_tilde of an exact Vtilde.

    Subclasses implement y_tilde, V_tilde, delta = V - Vtilde and
    delta_prime; everything else (U, U', determinator form 2) follows from
    the exact-solution identities and needs no numerical differentiation.

    y_tilde values are memoized per point (the derived quantities hit the
    same u repeatedly inside quadrature integrands); the cache is
    append-only, so concurrent readers stay consistent under the GIL.
    """

    model = None  # reference potential V

    def y_tilde(self, u: float) -> complex:
        raise NotImplementedError

    def V_tilde(self, u: float) -> complex:
        raise NotImplementedError

    def _y_memo(self, u: float) -> complex:
        try:
            cache = self._cache
        except AttributeError:
            cache = self._cache = {}
        y = cache.get(u)
        if y is None:
            if len(cache) > 200000:
                cache.clear()
            y = cache[u] = self.y_tilde(u)
        return y

    def delta(self, u: float) -> complex:
        return self.model.value(u) - self.V_tilde(u)

    def delta_prime(self, u: float) -> complex:
        raise NotImplementedError

    def alpha(self, u: float) -> float:
        return self._y_memo(u).real

    def beta_tilde(self, u: float) -> float:
        return self._y_memo(u).imag

    def U(self, u: float) -> float:
        bt = self.beta_tilde(u)
        return self.delta(u).real - bt * bt

    def U_prime(self, u: float) -> float:
        yt = self._y_memo(u)
        a, bt = yt.real, yt.imag
        im_Vt = self.V_tilde(u).imag
        return (self.delta_prime(u).real + 4.0 * a * bt * bt
                - 2.0 * bt * im_Vt)

    def det_form2(self, u: float, beta: float) -> float:
        yt = self._y_memo(u)
        return determinator_approx(yt.real, self.delta(u),
                                   self.delta_prime(u), yt.imag,
                                   self.V_tilde(u).imag, beta,
                                   self.model.value(u).imag)


class ExactApproximant(Approximant):
    """Approximant built from closed-form callables (testing/fixtures).

    ``y_fn`` must be an exact Riccati solution of ``V_tilde_fn``;
    ``delta_prime_fn`` is d/du of (V - Vtilde).
    """

    def __init__(self, model, y_fn, V_tilde_fn, delta_prime_fn):
        self.model = model
        self._y = y_fn
        self._Vt = V_tilde_fn
        self._dp = delta_prime_fn

    def y_tilde(self, u):
        return self._y(u)

    def V_tilde(self, u):
        return self._Vt(u)

    def delta_prime(self, u):
        return self._dp(u)


# ---------------------------------------------------------------------------
# Grid machinery shared by tube builders
# ---------------------------------------------------------------------------

def _weighted_cumulative(alpha_fn, f_fn, grid, c0: float = 0.0,
                         rtol: float = 1e-12) -> np.ndarray:
    """J(u) with J' = f - 2 alpha J, J(grid[0]) = c0.

    This is the overflow-safe evaluation of
    J(u) = (1/sigma) ( int_{u0}^{u} sigma f + C ).
    """
    def rhs(u, w):
        return np.array([f_fn(u) - 2.0 * alpha_fn(u) * w[0]])

    sol = solve_ivp(rhs, (grid[0], grid[-1]), np.array([float(c0)]),
                    method="DOP853", t_eval=grid, rtol=rtol, atol=1e-14,
                    dense_output=False)
    if not sol.success:
        raise StepFailure(f"weighted cumulative integral failed: {sol.message}")
    return sol.y[0]


def refine_grid_for_drift(us, centers, radii, max_rounds_hint=None):
    """Midpoints of segments violating the inter-frame drift condition
    |m_{i+1} - m_i| <= 0.25 * min(R_i, R_{i+1}).  Returns new u values."""
    us = np.asarray(us)
    drift = np.abs(np.diff(centers))
    rmin = np.minimum(radii[:-1], radii[1:])
    bad = drift > 0.25 * np.maximum(rmin, 1e-300)
    # Zero-radius stretches (e.g. T == 1 start) are exempt: the disk is a
    # point and drift refinement cannot help.
    bad &= rmin > 0
    return 0.5 * (us[:-1] + us[1:])[bad]


def _classify(margin: float, scale: float) -> str:
    if margin < 0.0:
        return "fail"
    if margin < _INCONCLUSIVE_FACTOR * scale:
        return "inconclusive"
    return "pass"


# ---------------------------------------------------------------------------
# Theorem 3.1 invariant disk tubes (cases A and B)
# ---------------------------------------------------------------------------

def _case_disks(case: str, J: np.ndarray, U: np.ndarray):
    """Map the integral combination J and U to (beta, R, combo) arrays.

    combo is the no-zeros factor: R - beta (case A), R + beta (case B).
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        if case == "A":
            t = -J                      # R - beta
            other = U / t               # R + beta
            R = 0.5 * (t + other)
            beta = 0.5 * (other - t)
            return beta, R, t
        if case == "B":
            p = J                       # R + beta
            other = U / p               # R - beta
            R = 0.5 * (p + other)
            beta = 0.5 * (p - other)
            return beta, R, p
    raise ValueError("case must be 'A' or 'B'")


def default_anchor_constant(case: str, U0: float, alpha0: float,
                            y0: complex, margin_goal: float = 0.10):
    """Anchor constant making the initial disk contain y0 with margin.

    Searches the one-parameter family of initial disks for the value whose
    relative containment margin (R - |y0 - m|)/R is maximal, and returns it
    together with the achieved margin.
    """
    best = (None, -math.inf)
    scale = max(1.0, abs(y0), math.sqrt(abs(U0)))
    for sign in (+1.0, -1.0):
        for t in np.geomspace(1e-6 * scale, 1e3 * scale, 400):
            combo = sign * t          # R -+ beta at u0
            other = U0 / combo
            R = 0.5 * (combo + other)
            beta = 0.5 * (other - combo) if case == "A" else 0.5 * (combo - other)
            if R <= 0 or not math.isfinite(R):
                continue
            m = complex(alpha0, beta)
            rel = (R - abs(y0 - m)) / R
            if rel > best[1]:
                best = (combo, rel)
    combo, rel = best
    if combo is None or rel < margin_goal:
        raise HypothesisViolation(math.nan, "initial_containment",
                                  rel if combo is not None else -math.inf,
                                  "no anchor constant achieves the margin goal")
    # constant convention: case A has (R - beta)(u0) = -C, case B (R + beta)(u0) = +C
    C = -combo if case == "A" else combo
    return C, rel


def invariant_disk_tube(model, center, case: str, interval, grid=None,
                        constant: float = None, y0: complex = None,
                        max_refine: int = 4, tube_id: str = "thm31") -> EnclosureTube:
    """Invariant disk tube via the two-case construction.

    ``center`` is a CustomCenter or an Approximant.  The indefinite
    integrals are anchored at the left endpoint with ``constant``; when a
    ``y0`` is supplied instead, the constant is chosen so the initial disk
    contains y0 with relative margin >= 10%.

    Hypothesis failures abort construction at the failing grid point: the
    returned tube holds the valid prefix and carries the violation.
    """
    a, b = float(interval[0]), float(interval[1])
    if grid is None:
        grid = np.linspace(a, b, 401)
    us = np.asarray(grid, dtype=float)

    is_approx = isinstance(center, Approximant)
    alpha_fn = center.alpha
    if is_approx:
        U_fn = center.U
    else:
        def U_fn(u):
            return compute_U(model.value(u), center.alpha(u),
                             center.alpha_prime(u))

    def im_V(u):
        return model.value(u).imag

    if constant is None:
        if y0 is None:
            raise ValueError("supply either an anchor constant or y0")
        constant, _ = default_anchor_constant(case, U_fn(a), alpha_fn(a), y0)

    def build(us_frames):
        """Quantities on the frame grid plus segment midpoints."""
        mids = 0.5 * (us_frames[:-1] + us_frames[1:])
        us_all = np.sort(np.concatenate([us_frames, mids]))
        is_frame = np.isin(us_all, us_frames)
        J = _weighted_cumulative(alpha_fn, im_V, us_all, c0=constant)
        U = np.array([U_fn(u) for u in us_all])
        beta, R, combo = _case_disks(case, J, U)
        return us_all, is_frame, U, beta, R, combo

    # drift-controlled refinement on the frame grid
    for _round in range(max_refine + 1):
        us_all, is_frame, U, beta, R, combo = build(us)
        alpha_f = np.array([alpha_fn(u) for u in us[:]])
        cf = np.array([complex(a_, b_) for a_, b_ in
                       zip(alpha_f, beta[is_frame])])
        new_us = refine_grid_for_drift(us, cf, np.maximum(R[is_frame], 0.0))
        if len(new_us) == 0 or _round == max_refine:
            break
        us = np.sort(np.concatenate([us, new_us]))

    alpha = np.array([alpha_fn(u) for u in us_all])
    imV = np.array([im_V(u) for u in us_all])
    log_sigma = 2.0 * cumulative_quad(alpha_fn, us_all)

    det = np.empty(len(us_all))
    for i, u in enumerate(us_all):
        if is_approx:
            det[i] = center.det_form2(u, beta[i])
        else:
            Upr = (model.eval(u, 1)[1].real
                   - 2.0 * alpha[i] * center.alpha_prime(u)
                   - center.alpha_d2(u))
            det[i] = determinator(alpha[i], U[i], Upr, beta[i], imV[i])

    scale_combo = float(np.median(np.abs(combo))) or 1.0
    sign0 = math.copysign(1.0, combo[0])
    worst = {"combo_no_zeros": (math.inf, math.nan),
             "R_nonneg": (math.inf, math.nan),
             "sign_condition": (math.inf, math.nan)}
    violation = None
    frames = []
    for i, u in enumerate(us_all):
        if not (math.isfinite(R[i]) and math.isfinite(beta[i])):
            violation = HypothesisViolation(u, "combo_no_zeros", -math.inf,
                                            "degenerate division")
            break
        margins = {"combo_no_zeros": (sign0 * combo[i]) / scale_combo,
                   "R_nonneg": R[i] / max(abs(beta[i]),
                                          math.sqrt(abs(U[i])), 1e-12)}
        # scale the sign condition by the sum of the determinator's term
        # magnitudes so a near-cancellation is graded inconclusive
        det_scale = (2.0 * abs(alpha[i] * U[i]) + 0.5 * abs(U[i])
                     + abs(beta[i] * imV[i]) + 1e-300)
        margins["sign_condition"] = (combo[i] * det[i]) / (abs(combo[i])
                                                           * det_scale)
        for name, mg in margins.items():
            if mg < worst[name][0]:
                worst[name] = (mg, u)
            if mg < 0.0 and violation is None:
                violation = HypothesisViolation(u, name, mg)
        if violation is not None:
            break
        if is_frame[i]:
            frames.append(FlowFrame(u, Disk(alpha[i], beta[i], max(R[i], 0.0)),
                                    math.exp(log_sigma[i]), U[i], det[i],
                                    beta_tilde=(center.beta_tilde(u)
                                                if is_approx else math.nan),
                                    extra={"min_margin": min(margins.values()),
                                           "combo": combo[i]}))
    hyp_log = []
    for name, (mg, u_at) in worst.items():
        if violation is not None and violation.name == name:
            status = "fail"
        else:
            status = _classify(mg, 1.0)
        hyp_log.append(HypothesisRecord(name, status, float(mg), float(u_at)))
    method = "caseA" if case == "A" else "caseB"
    return EnclosureTube(frames, method, hyp_log, "forward", model,
                         center if is_approx else None, violation, tube_id,
                         meta={"constant": constant, "case": case})


# ---------------------------------------------------------------------------
# Backward flow via the variable flip u -> -u
# ---------------------------------------------------------------------------

class FlippedModel:
    """Potential W(v) = V(-v): the Sturm-Liouville equation is invariant
    under u -> -u, so tubes for W on increasing v certify the backward flow
    of V.  Derivatives pick up alternating signs."""

    def __init__(self, model):
        self.base = model

    def value(self, v: float) -> complex:
        return self.base.value(-v)

    def eval(self, v: float, order: int = 0):
        out = self.base.eval(-v, order).copy()
        for k in range(1, order + 1):
            if k % 2 == 1:
                out[k] = -out[k]
        return out


class FlippedApproximant(Approximant):
    """Approximant in the flipped frame: y_b(v) = -y(-v) solves the Riccati
    equation of Vt_b(v) = Vt(-v)."""

    def __init__(self, approximant, flipped_model):
        self.base = approximant
        self.model = flipped_model

    def y_tilde(self, v: float) -> complex:
        return -self.base.y_tilde(-v)

    def V_tilde(self, v: float) -> complex:
        return self.base.V_tilde(-v)

    def delta(self, v: float) -> complex:
        return self.base.delta(-v)

    def delta_prime(self, v: float) -> complex:
        return -self.base.delta_prime(-v)


def map_backward_tube(tube_v, orig_model, tube_id: str = None) -> EnclosureTube:
    """Map a forward tube built in the flipped frame back to original u.

    y(u) = -y_v(-u), so the disk for y at u = -v has center -m_v and the
    same radius; frames come out with decreasing u (direction backward).
    """
    frames = []
    for f in tube_v.frames:
        d = Disk(-f.disk.alpha, -f.disk.beta, f.disk.radius)
        frames.append(FlowFrame(-f.u, d, f.sigma, f.U, f.det,
                                beta_tilde=-f.beta_tilde
                                if math.isfinite(f.beta_tilde) else f.beta_tilde,
                                extra=dict(f.extra)))
    return EnclosureTube(frames, tube_v.method, list(tube_v.hypothesis_log),
                         "backward", orig_model, tube_v.approximant,
                         tube_v.violation,
                         tube_id or (tube_v.tube_id + "-backward"),
                         meta=dict(tube_v.meta, flipped_frame=True))


# ---------------------------------------------------------------------------
# Lower bounds for Im y
# ---------------------------------------------------------------------------

def im_y_lower_bounds(model, y0: complex, interval, tube: EnclosureTube,
                      n_check: int = 200):
    """Certified lower bounds for Im y when Im V > 0 and Im y(u0) > 0.

    Re y is worst-cased by alpha + R from the attached enclosure tube.
    Returns (bound1, bound2) callables on the tube's u-range; bound2 is
    -inf (vacuous) wherever the worst-case Re y is nonpositive.
    """
    a, b = float(interval[0]), float(interval[1])
    if y0.imag <= 0.0:
        raise HypothesisViolation(a, "im_y0_positive", y0.imag)
    us = np.linspace(a, b, n_check)
    imV = np.array([model.value(u).imag for u in us])
    if np.any(imV <= 0.0):
        u_bad = us[int(np.argmin(imV))]
        raise HypothesisViolation(float(u_bad), "im_V_positive", float(imV.min()))
    t_us = tube.us
    rey_max = np.array([f.disk.alpha + f.disk.radius for f in tube.frames])
    rey_wc = np.interp(us, t_us, rey_max)
    integral = cumulative_quad(lambda u: np.interp(u, us, rey_wc), us)
    b1 = y0.imag * np.exp(-2.0 * integral)
    with np.errstate(divide="ignore"):
        ratio = np.where(rey_wc > 0.0, imV / (2.0 * rey_wc), -np.inf)
    b2 = np.minimum.accumulate(ratio)

    def bound1(u):
        return np.interp(u, us, b1)

    def bound2(u):
        return np.interp(u, us, b2)

    return bound1, bound2


def gronwall_lower_bound(model, interval, im_y_left: float, c: float,
                         n_check: int = 400):
    """Gronwall-based lower bound for Im y on [u-, u+].

    Hypothesis: max sqrt|V| * (u+ - u-) <= c.  The constant is the
    implementation-conservative choice C = exp(c)^2 (one admissible
    instantiation of the proof's Gronwall constant; flagged in output).
    Returns (bound, record) with bound(u) = Im y(u-)/C - C (u - u-) *
    |min(0, min Im V)| evaluated with running minima on the check grid.
    """
    um, up = float(interval[0]), float(interval[1])
    if im_y_left < 0.0:
        raise HypothesisViolation(um, "im_y_left_nonneg", im_y_left)
    us = np.linspace(um, up, n_check)
    sqrtV = np.array([math.sqrt(abs(model.value(u))) for u in us])
    lhs = float(sqrtV.max()) * (up - um)
    if lhs > c:
        raise HypothesisViolation(um, "gronwall_scale", c - lhs,
                                  f"max sqrt|V| (u+-u-) = {lhs:.3e} > c = {c}")
    C = math.exp(c) ** 2
    imV = np.array([model.value(u).imag for u in us])
    run_min = np.minimum.accumulate(np.minimum(imV, 0.0))
    vals = im_y_left / C + C * (us - um) * run_min

    def bound(u):
        return np.interp(u, us, vals)

    record = HypothesisRecord("gronwall_scale", "pass", c - lhs, um,
                              note="C = exp(c)^2, implementation-conservative")
    return bound, record
