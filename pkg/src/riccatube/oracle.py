"""High-accuracy reference integration of the Sturm-Liouville and Riccati
equations with complex potentials, used to audit every enclosure.

The Riccati integrator is pole-transparent: when |y| exceeds a guard it
switches to the linear Sturm-Liouville representation (y has poles exactly
where phi vanishes) and re-enters the Riccati form once |y| is moderate
again, so trajectories continue through poles of y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.stats import qmc

from .errors import StepFailure
from .potential import eval_model, pole_expansion
from .riccati_core import Approximant

_RTOL = 1e-12
_ATOL = 1e-12


@dataclass
class OracleTrajectory:
    """Reference trajectory sampled on a caller grid."""

    u: np.ndarray
    y: np.ndarray
    phi: np.ndarray = None
    dphi: np.ndarray = None
    rtol: float = _RTOL
    events: list = field(default_factory=list)


def _solve(rhs, span, y0, grid, rtol, atol, events=None):
    sol = solve_ivp(rhs, span, y0, method="DOP853", t_eval=grid,
                    rtol=rtol, atol=atol, dense_output=True, events=events)
    if sol.status == -1:
        raise StepFailure(sol.message)
    return sol


def integrate_sl(model, interval, phi0: complex, dphi0: complex,
                 grid=None, rtol: float = _RTOL,
                 with_energy: bool = False) -> OracleTrajectory:
    """Integrate (-d^2/du^2 + V) phi = 0 as a first-order complex system.

    With ``with_energy`` the solver carries E' = Im V |phi|^2 alongside, so
    the diagnostic identity d/du Im(conj(phi) phi') = Im V |phi|^2 can be
    checked at solver accuracy; E is returned in ``events`` under key
    "energy_integral".
    """
    a, b = float(interval[0]), float(interval[1])
    if grid is None:
        grid = np.linspace(a, b, 201)
    grid = np.asarray(grid, dtype=float)

    if with_energy:
        def rhs(u, w):
            v = model.value(u)
            return np.array([w[1], v * w[0],
                             v.imag * (w[0].real ** 2 + w[0].imag ** 2)],
                            dtype=complex)
        y0 = np.array([phi0, dphi0, 0.0], dtype=complex)
    else:
        def rhs(u, w):
            return np.array([w[1], model.value(u) * w[0]], dtype=complex)
        y0 = np.array([phi0, dphi0], dtype=complex)

    sol = _solve(rhs, (a, b), y0, grid, rtol, _ATOL)
    phi, dphi = sol.y[0], sol.y[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        y = dphi / phi
    tr = OracleTrajectory(u=grid, y=y, phi=phi, dphi=dphi, rtol=rtol)
    if with_energy:
        tr.events.append({"event": "energy_integral",
                          "values": sol.y[2].real.copy()})
    return tr


def integrate_riccati(model, interval, y0: complex, grid=None,
                      rtol: float = _RTOL, pole_guard: float = 1e6,
                      max_switches: int = 200) -> OracleTrajectory:
    """Integrate y' = V - y^2 with pole-transparent SL switching.

    The guard scale is max(1, sqrt(|V|)) sampled at the switch point; the
    solver re-enters the Riccati form when |y| < 0.5 * guard * scale.
    """
    a, b = float(interval[0]), float(interval[1])
    if grid is None:
        grid = np.linspace(a, b, 201)
    grid = np.asarray(grid, dtype=float)
    direction = 1.0 if b >= a else -1.0

    events = []
    out_y = np.full(len(grid), np.nan + 0j, dtype=complex)
    u_cur = a
    state_y = complex(y0)
    mode = "riccati"
    phi_state = None
    guard_abs = pole_guard * max(1.0, math.sqrt(abs(model.value(a))))
    pending = set(range(len(grid)))

    def fill(sol, as_sl):
        reached = sol.t[-1]
        for i in sorted(pending):
            gi = grid[i]
            if (direction * (gi - u_cur) >= -1e-14
                    and direction * (reached - gi) >= -1e-14):
                w = sol.sol(gi)
                if as_sl:
                    out_y[i] = w[1] / w[0] if w[0] != 0 else np.inf + 0j
                else:
                    out_y[i] = w[0]
                pending.discard(i)
        return reached

    for _ in range(max_switches):
        if not pending:
            break
        if mode == "riccati":
            guard_abs = pole_guard * max(1.0, math.sqrt(abs(model.value(u_cur))))

            def rhs(u, w):
                yy = w[0]
                return np.array([model.value(u) - yy * yy], dtype=complex)

            def blowup(u, w):
                return abs(w[0]) - guard_abs
            blowup.terminal = True
            blowup.direction = 1

            sol = _solve(rhs, (u_cur, b), np.array([state_y], dtype=complex),
                         None, rtol, _ATOL, events=[blowup])
            u_cur = fill(sol, as_sl=False)
            if sol.status == 1:  # guard hit: switch to the linear form
                y_here = sol.sol(u_cur)[0]
                phi_state = np.array([1.0 + 0j, y_here], dtype=complex)
                mode = "sl"
                events.append({"u": float(u_cur), "event": "pole_proximity",
                               "abs_y": float(abs(y_here))})
            else:
                break
        else:
            reenter_abs = 0.5 * guard_abs

            def rhs(u, w):
                return np.array([w[1], model.value(u) * w[0]], dtype=complex)

            def calm(u, w):
                if abs(w[0]) == 0.0:
                    return 1.0
                return abs(w[1] / w[0]) - reenter_abs
            calm.terminal = True
            calm.direction = -1

            sol = _solve(rhs, (u_cur, b), phi_state, None, rtol, _ATOL,
                         events=[calm])
            u_cur = fill(sol, as_sl=True)
            if sol.status == 1:
                w = sol.sol(u_cur)
                state_y = w[1] / w[0]
                mode = "riccati"
                events.append({"u": float(u_cur), "event": "riccati_reentry",
                               "abs_y": float(abs(state_y))})
            else:
                break
    return OracleTrajectory(u=grid, y=out_y, rtol=rtol, events=events)


# ---------------------------------------------------------------------------
# Frobenius series starts at the singular endpoint
# ---------------------------------------------------------------------------

@dataclass
class FrobeniusBranch:
    """phi = u^rho * sum a_m u^(2m)  (+ c * phi_1 log u for the second kind)."""

    rho: float
    coeffs: np.ndarray
    log_factor: complex = 0.0
    partner: "FrobeniusBranch" = None  # phi_1, when log_factor != 0
    remainder_scale: float = 0.0

    def phi(self, u: float) -> complex:
        p = u ** self.rho * np.polyval(self.coeffs[::-1], u * u)
        if self.log_factor != 0.0:
            p += self.log_factor * math.log(u) * self.partner.phi(u)
        return p

    def dphi(self, u: float) -> complex:
        dcoeffs = np.array([(self.rho + 2 * m) * c
                            for m, c in enumerate(self.coeffs)])
        d = u ** (self.rho - 1.0) * np.polyval(dcoeffs[::-1], u * u)
        if self.log_factor != 0.0:
            d += self.log_factor * (math.log(u) * self.partner.dphi(u)
                                    + self.partner.phi(u) / u)
        return d

    def d2phi(self, u: float) -> complex:
        d2coeffs = np.array([(self.rho + 2 * m) * (self.rho + 2 * m - 1.0) * c
                             for m, c in enumerate(self.coeffs)])
        d2 = u ** (self.rho - 2.0) * np.polyval(d2coeffs[::-1], u * u)
        if self.log_factor != 0.0:
            d2 += self.log_factor * (math.log(u) * self.partner.d2phi(u)
                                     + 2.0 * self.partner.dphi(u) / u
                                     - self.partner.phi(u) / (u * u))
        return d2

    def remainder_estimate(self, u: float) -> float:
        return self.remainder_scale * u ** (self.rho + 2 * len(self.coeffs))


def frobenius_start(L: int, series_coeffs, u_start: float, n_terms: int = 5):
    """Series solutions of phi'' = [ (L^2-1/4)/u^2 + sum v_j u^(2j) ] phi.

    Returns (recessive, dominant) FrobeniusBranch pairs with exponents
    1/2 + L and 1/2 - L; the dominant branch is log-augmented when needed
    (always for L = 0, and for L >= 1 when the resonance does not vanish).
    ``series_coeffs`` are the analytic coefficients v_0, v_1, ... of the
    regular part (e.g. from :func:`riccatube.potential.pole_expansion`).
    """
    v = np.zeros(max(n_terms + 1, len(series_coeffs)), dtype=complex)
    v[:len(series_coeffs)] = series_coeffs
    # recessive, rho = L + 1/2
    a = np.zeros(n_terms + 1, dtype=complex)
    a[0] = 1.0
    for m in range(1, n_terms + 1):
        rhs = sum(v[j] * a[m - 1 - j] for j in range(m))
        a[m] = rhs / (4.0 * m * (m + L))
    rec = FrobeniusBranch(rho=L + 0.5, coeffs=a,
                          remainder_scale=float(abs(a[-1])) * 10.0)
    # dominant, rho = 1/2 - L
    b = np.zeros(n_terms + 1, dtype=complex)
    if L == 0:
        c_log = 1.0
        b[0] = 0.0
        for m in range(1, n_terms + 1):
            rhs = sum(v[j] * b[m - 1 - j] for j in range(m)) - 4.0 * m * a[m]
            b[m] = rhs / (4.0 * m * m)
    else:
        b[0] = 1.0
        c_log = 0.0
        for m in range(1, n_terms + 1):
            if m < L:
                rhs = sum(v[j] * b[m - 1 - j] for j in range(m))
                b[m] = rhs / (4.0 * m * (m - L))
            elif m == L:
                rhs = sum(v[j] * b[m - 1 - j] for j in range(m))
                c_log = rhs / (2.0 * L)
                b[m] = 0.0
            else:
                rhs = (sum(v[j] * b[m - 1 - j] for j in range(m))
                       - c_log * a[m - L] * (2.0 * L + 4.0 * (m - L)))
                b[m] = rhs / (4.0 * m * (m - L))
    dom = FrobeniusBranch(rho=0.5 - L, coeffs=b, log_factor=c_log, partner=rec,
                          remainder_scale=float(abs(b[-1])) * 10.0)
    if u_start > 1e-3:
        raise ValueError("Frobenius start requires u_start <= 1e-3")
    return rec, dom


def frobenius_start_model(model, u_start: float, n_terms: int = 5):
    """Frobenius pair for a model with a (L^2-1/4)/u^2 pole at u = 0."""
    from .potential import SingularModel, TeukolskyModel
    if isinstance(model, TeukolskyModel):
        exp = pole_expansion(model)
        return frobenius_start(exp.L, exp.coefficients, u_start, n_terms)
    if isinstance(model, SingularModel):
        return frobenius_start(model.L, [model.zeta ** 2], u_start, n_terms)
    raise TypeError("model has no singular endpoint data")


class SolutionApproximant(Approximant):
    """Approximant whose Vtilde is V itself and whose ytilde is a reference
    solution carried at solver accuracy (a 'shadowing' approximant).

    With delta = V - Vtilde identically zero, the determinator reduces to
    (kappa - R) Im V, which is positive for any positive kappa, so case-B
    tubes around a reference solution need no further sign arrangement; the
    disks then contract at the local sigma rate.
    """

    def __init__(self, model, interval, y0: complex, rtol: float = _RTOL):
        self.model = model
        a, b = float(interval[0]), float(interval[1])

        def rhs(u, w):
            return np.array([w[1], model.value(u) * w[0]], dtype=complex)

        sol = _solve(rhs, (a, b), np.array([1.0 + 0j, complex(y0)]),
                     None, rtol, _ATOL)
        self._dense = sol.sol
        self.interval = (a, b)

    def y_tilde(self, u: float) -> complex:
        w = self._dense(u)
        return w[1] / w[0]

    def V_tilde(self, u: float) -> complex:
        return self.model.value(u)

    def delta(self, u: float) -> complex:
        return 0.0 + 0.0j

    def delta_prime(self, u: float) -> complex:
        return 0.0 + 0.0j

    def alpha(self, u: float) -> float:
        return self.y_tilde(u).real

    def beta_tilde(self, u: float) -> float:
        return self.y_tilde(u).imag

    def U(self, u: float) -> float:
        bt = self.beta_tilde(u)
        return -bt * bt

    def U_prime(self, u: float) -> float:
        yt = self.y_tilde(u)
        im_vt = self.model.value(u).imag
        return 4.0 * yt.real * yt.imag ** 2 - 2.0 * yt.imag * im_vt

    def det_form2(self, u: float, beta: float) -> float:
        return beta * self.model.value(u).imag


# ---------------------------------------------------------------------------
# Containment audit
# ---------------------------------------------------------------------------

@dataclass
class AuditReport:
    tube_id: str
    n_starts: int
    max_excursion: float
    verdict: str
    worst_u: float
    seed: int
    events: list = field(default_factory=list)

    PASS_TOL = 1e-6

    def to_dict(self) -> dict:
        return {"tube_id": self.tube_id, "n_starts": self.n_starts,
                "max_excursion": self.max_excursion, "verdict": self.verdict,
                "worst_u": self.worst_u, "seed": self.seed,
                "events": self.events}


def sample_disk(center: complex, radius: float, n: int, seed: int) -> np.ndarray:
    """n points in the closed disk: boundary points plus Sobol interior.

    Boundary points are sampled deliberately (worst case); the interior uses
    a scrambled Sobol sequence, all seeded for determinism.
    """
    n_boundary = max(1, n // 4) if radius > 0 else 0
    pts = []
    for j in range(n_boundary):
        th = 2.0 * math.pi * j / n_boundary
        pts.append(center + radius * complex(math.cos(th), math.sin(th)))
    n_int = n - n_boundary
    if n_int > 0:
        if radius > 0:
            sob = qmc.Sobol(d=2, scramble=True, seed=seed)
            m = max(1, math.ceil(math.log2(n_int)))
            xy = sob.random_base2(m)[:n_int]
            r = radius * np.sqrt(xy[:, 0])
            th = 2.0 * math.pi * xy[:, 1]
            pts.extend(center + r * np.exp(1j * th))
        else:
            pts.extend([center] * n_int)
    return np.array(pts, dtype=complex)


def containment_audit(tube, n_starts: int = 100, seed: int = 0,
                      rtol: float = _RTOL) -> AuditReport:
    """Sample the initial disk, flow each start along the tube's direction,
    and report the worst relative excursion outside the disks.

    Lens tubes count a point as contained when it lies in the disk or in
    the complex conjugate of the disk.  The excursion denominator is
    max(R, 1e-4 max(1, |m|)): on degenerate frames (R near zero against a
    large center) the bare (dist - R)/R would amplify reference-integrator
    roundoff far past the pass threshold, so containment there is certified
    up to the 1e-10 |m| absolute level instead.
    """
    frames = tube.frames
    us = np.array([f.u for f in frames])
    m0 = frames[0].disk.center
    r0 = frames[0].disk.radius
    starts = sample_disk(m0, r0, n_starts, seed)
    lens = tube.method == "lens"
    worst = -math.inf
    worst_u = us[0]
    events = []
    for y0 in starts:
        traj = integrate_riccati(tube.model, (us[0], us[-1]), y0,
                                 grid=us, rtol=rtol)
        events.extend(traj.events)
        for f, y in zip(frames, traj.y):
            if not np.isfinite(y):
                continue
            m, r = f.disk.center, f.disk.radius
            dist = abs(y - m)
            if lens:
                dist = min(dist, abs(np.conjugate(y) - m))
            denom = max(r, 1e-4 * max(1.0, abs(m)))
            exc = (dist - r) / denom
            if exc > worst:
                worst = exc
                worst_u = f.u
    verdict = "PASS" if worst <= AuditReport.PASS_TOL else "FAIL"
    return AuditReport(tube_id=tube.tube_id, n_starts=len(starts),
                       max_excursion=float(worst), verdict=verdict,
                       worst_u=float(worst_u), seed=seed, events=events)
