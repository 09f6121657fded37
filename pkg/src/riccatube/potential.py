"""Potential models: the angular Teukolsky potential, its pole expansion,
and the model potentials used as approximants.

All models evaluate V(u) and exact closed-form derivatives up to third
order.  Derivatives are hand-derived, not finite differences, so they are
exact up to rounding; the test suite cross-checks them against central
differences.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError

_EULER_GAMMA = 0.5772156649015329


def _as_fraction(x) -> Fraction:
    """Parse a half-integer-friendly rational (``"3/2"``, 1.5, Fraction)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    f = Fraction(x).limit_denominator(2)
    if float(f) != float(x):
        raise ValueError(f"{x!r} is not representable as a half-integer rational")
    return f


@dataclass(frozen=True)
class TeukolskyModel:
    """Angular Teukolsky potential in Sturm-Liouville form on (0, pi).

    V(u) = Omega^2 sin^2 u + (k^2+s^2-1/4)/sin^2 u - 2 s Omega cos u
           - 2 s k cos u / sin^2 u - mu,      mu = lambda - 2 Omega k + s^2 + 1/4.

    ``k`` and ``s`` are stored as exact rationals with 2k, 2s integers so the
    integrality of k - s is checkable exactly.
    """

    omega: complex
    k: Fraction
    s: Fraction
    lam: complex

    def __post_init__(self):
        object.__setattr__(self, "k", _as_fraction(self.k))
        object.__setattr__(self, "s", _as_fraction(self.s))
        object.__setattr__(self, "omega", complex(self.omega))
        object.__setattr__(self, "lam", complex(self.lam))
        if self.s < 0 or (2 * self.s).denominator != 1:
            raise ValueError(f"spin weight s={self.s} must satisfy 2s in {{0,1,2,...}}")
        if (2 * self.k).denominator != 1:
            raise ValueError(f"azimuthal number k={self.k} must be a half-integer")
        if (self.k - self.s).denominator != 1:
            raise ValueError(f"k - s = {self.k - self.s} must be an integer")
        # scalar fast-path constants (evaluation is the package's hot loop)
        sf, kf = float(self.s), float(self.k)
        object.__setattr__(self, "_sf", sf)
        object.__setattr__(self, "_A", kf * kf + sf * sf - 0.25)
        object.__setattr__(self, "_B", 2.0 * sf * kf)
        object.__setattr__(self, "_mu",
                           self.lam - 2.0 * self.omega * kf + sf * sf + 0.25)
        object.__setattr__(self, "_om2", self.omega * self.omega)
        object.__setattr__(self, "_2som", 2.0 * sf * self.omega)

    @property
    def mu(self) -> complex:
        """Recomputed constant mu = lambda - 2 Omega k + s^2 + 1/4."""
        s = float(self.s)
        return self.lam - 2.0 * self.omega * float(self.k) + s * s + 0.25

    @property
    def pole_order_left(self) -> int:
        """L = |k - s|, the pole index at u = 0."""
        return abs(int(self.k - self.s))

    @property
    def domain(self):
        return (0.0, math.pi)

    def mirror(self) -> "TeukolskyModel":
        """Model whose potential satisfies V_mirror(u) = V(pi - u)."""
        return TeukolskyModel(-self.omega, -self.k, self.s, self.lam)

    def value(self, u: float) -> complex:
        """V(u), scalar fast path."""
        if not 0.0 < u < math.pi:
            raise DomainError(f"u={u} outside (0, pi)")
        c = math.cos(u)
        S = math.sin(u)
        return (self._om2 * (S * S) - self._2som * c - self._mu
                + (self._A - self._B * c) / (S * S))

    def eval(self, u: float, order: int = 0) -> np.ndarray:
        """V(u), V'(u), ... up to ``order`` (0..3), exact closed forms."""
        if not 0.0 < u < math.pi:
            raise DomainError(f"u={u} outside (0, pi)")
        if not 0 <= order <= 3:
            raise ValueError("order must be 0..3")
        om2 = self._om2
        A = self._A
        B = self._B
        c = math.cos(u)
        S = math.sin(u)
        # Pole block P = (A - B cos u)/sin^2 u, grouped so the u -> 0 and
        # u -> pi limits are evaluated without catastrophic cancellation.
        g = A - B * c
        P = g / (S * S)
        out = np.empty(order + 1, dtype=complex)
        out[0] = om2 * S * S - self._2som * c - self._mu + P
        if order >= 1:
            P1 = B / S - 2.0 * c * g / S**3
            out[1] = om2 * math.sin(2 * u) + self._2som * S + P1
        if order >= 2:
            P2 = -3.0 * B * c / S**2 + 2.0 * g / S**2 + 6.0 * c * c * g / S**4
            out[2] = 2.0 * om2 * math.cos(2 * u) + self._2som * c + P2
        if order >= 3:
            P3 = (5.0 * B / S + 12.0 * B * c * c / S**3
                  - 16.0 * c * g / S**3 - 24.0 * c**3 * g / S**5)
            out[3] = -4.0 * om2 * math.sin(2 * u) - self._2som * S + P3
        return out


@dataclass(frozen=True)
class QuadraticModel:
    """Quadratic model potential V(u) = p + (q/4)(u - r)^2.

    The branch of q^(1/2) (and q^(1/4)) is recorded explicitly: ``sqrt_q``
    is the principal root unless the caller overrides it, and all derived
    quantities (a, b, z) use the recorded value.
    """

    p: complex
    q: complex
    r: complex
    sqrt_q: complex = None  # branch record; principal root by default

    def __post_init__(self):
        object.__setattr__(self, "p", complex(self.p))
        object.__setattr__(self, "q", complex(self.q))
        object.__setattr__(self, "r", complex(self.r))
        if self.q == 0:
            raise ValueError("quadratic coefficient q must be nonzero")
        sq = cmath.sqrt(self.q) if self.sqrt_q is None else complex(self.sqrt_q)
        if abs(sq * sq - self.q) > 1e-12 * abs(self.q):
            raise ValueError("sqrt_q is not a square root of q")
        object.__setattr__(self, "sqrt_q", sq)

    @property
    def quartic_root_q(self) -> complex:
        """q^(1/4) consistent with the recorded sqrt_q branch."""
        return cmath.sqrt(self.sqrt_q)

    @property
    def a(self) -> complex:
        return self.p / self.sqrt_q

    @property
    def b(self) -> complex:
        return -4.0 * (self.a - 0.5)

    def z(self, u) -> complex:
        return self.quartic_root_q * (u - self.r)

    def conjugate(self) -> "QuadraticModel":
        """Model of the complex-conjugate potential (for double conjugation)."""
        return QuadraticModel(self.p.conjugate(), self.q.conjugate(),
                              self.r.conjugate(), self.sqrt_q.conjugate())

    @property
    def domain(self):
        return (-math.inf, math.inf)

    def value(self, u: float) -> complex:
        d = u - self.r
        return self.p + 0.25 * self.q * d * d

    def eval(self, u: float, order: int = 0) -> np.ndarray:
        if not 0 <= order <= 3:
            raise ValueError("order must be 0..3")
        d = u - self.r
        out = np.zeros(order + 1, dtype=complex)
        out[0] = self.p + 0.25 * self.q * d * d
        if order >= 1:
            out[1] = 0.5 * self.q * d
        if order >= 2:
            out[2] = 0.5 * self.q
        return out


@dataclass(frozen=True)
class SingularModel:
    """Singular model potential V(u) = (L^2 - 1/4)/u^2 + zeta^2 on u > 0."""

    zeta: complex
    L: int
    c0: complex = None
    c2: complex = None
    c3: float = None

    def __post_init__(self):
        object.__setattr__(self, "zeta", complex(self.zeta))
        if self.L < 0 or int(self.L) != self.L:
            raise ValueError("L must be a non-negative integer")
        object.__setattr__(self, "L", int(self.L))
        if self.L > 0 and self.zeta.real > 0 and self.zeta.imag == 0.0:
            raise DomainError("arg zeta must exclude the positive real axis for L > 0")

    @property
    def domain(self):
        return (0.0, math.inf)

    def value(self, u: float) -> complex:
        if u <= 0:
            raise DomainError(f"u={u} outside (0, inf)")
        return (self.L * self.L - 0.25) / (u * u) + self.zeta * self.zeta

    def eval(self, u: float, order: int = 0) -> np.ndarray:
        if u <= 0:
            raise DomainError(f"u={u} outside (0, inf)")
        if not 0 <= order <= 3:
            raise ValueError("order must be 0..3")
        C = self.L * self.L - 0.25
        out = np.zeros(order + 1, dtype=complex)
        out[0] = C / u**2 + self.zeta * self.zeta
        if order >= 1:
            out[1] = -2.0 * C / u**3
        if order >= 2:
            out[2] = 6.0 * C / u**4
        if order >= 3:
            out[3] = -24.0 * C / u**5
        return out


@dataclass(frozen=True)
class CustomModel:
    """Tabulated/custom potential wrapping caller-supplied callables.

    ``fn(u, order)`` must return a sequence of length order+1.
    """

    fn: object
    domain: tuple = (-math.inf, math.inf)
    max_order: int = 3
    label: str = "custom"

    def value(self, u: float) -> complex:
        return self.eval(u, 0)[0]

    def eval(self, u: float, order: int = 0) -> np.ndarray:
        lo, hi = self.domain
        if not lo < u < hi:
            raise DomainError(f"u={u} outside ({lo}, {hi})")
        if order > self.max_order:
            raise ValueError(f"model provides derivatives up to order {self.max_order}")
        return np.asarray(self.fn(u, order), dtype=complex)


# Tagged union of supported variants.
PotentialModel = (TeukolskyModel, QuadraticModel, SingularModel, CustomModel)


def eval_model(model, u: float, order: int = 0) -> np.ndarray:
    """Uniform dispatch: V(u), ..., V^(order)(u) for any model variant."""
    if not isinstance(model, PotentialModel):
        raise TypeError(f"unsupported model type {type(model)!r}")
    return model.eval(u, order)


def eval_teukolsky(model: TeukolskyModel, u: float, order: int = 0) -> np.ndarray:
    if not isinstance(model, TeukolskyModel):
        raise TypeError("eval_teukolsky requires a TeukolskyModel")
    return model.eval(u, order)


@dataclass(frozen=True)
class PoleExpansion:
    """Taylor data of V - (L^2-1/4)/u^2 at u = 0.

    ``coefficients`` holds (c0, c2, c4, c6); ``remainder_bound(u)`` dominates
    |V(u) - pole - c0 - c2 u^2| on (0, u] for u < 1.5.
    """

    L: int
    c0: complex
    c2: complex
    coefficients: tuple
    _tail6: float = field(repr=False, default=0.0)
    _tail8: float = field(repr=False, default=0.0)

    def remainder_bound(self, u: float) -> float:
        if not 0.0 < u < 1.5:
            raise DomainError("remainder bound valid on (0, 1.5)")
        c0, c2, c4, c6 = self.coefficients
        geo = 1.0 / (1.0 - (u / 1.8) ** 2)
        # binary64 allowance: evaluating V - pole/u^2 - c0 - c2 u^2 in doubles
        # carries roundoff proportional to the largest magnitude in play
        fp_scale = ((self.L * self.L + 0.25) / (u * u) + abs(c0)
                    + abs(c2) * u * u + 1.0)
        return (abs(c4) * u**4 + abs(c6) * u**6 + self._tail8 * u**8 * geo
                + 64.0 * 2.220446049250313e-16 * fp_scale)

    def series(self, u: float) -> complex:
        """pole + c0 + c2 u^2 + c4 u^4 + c6 u^6 evaluated at u."""
        c0, c2, c4, c6 = self.coefficients
        return ((self.L**2 - 0.25) / u**2 + c0 + c2 * u**2
                + c4 * u**4 + c6 * u**6)


def pole_expansion(model: TeukolskyModel) -> PoleExpansion:
    """Closed-form expansion of the Teukolsky potential at the u = 0 pole.

    Series used (x -> 0):
      sin^2 x   = x^2 - x^4/3 + 2x^6/45 - x^8/315 + ...
      csc^2 x   = 1/x^2 + 1/3 + x^2/15 + 2x^4/189 + x^6/675 + ...
      cos x     = 1 - x^2/2 + x^4/24 - x^6/720 + ...
      cos x csc^2 x = 1/x^2 - 1/6 - 7x^2/120 - 31x^4/3024 - 127x^6/86400 - ...
    """
    om = model.omega
    s = float(model.s)
    k = float(model.k)
    A = k * k + s * s - 0.25
    B = 2.0 * s * k
    L = model.pole_order_left
    mu = model.mu
    c0 = A / 3.0 + B / 6.0 - 2.0 * s * om - mu
    c2 = om * om + s * om + A / 15.0 + 7.0 * B / 120.0
    c4 = -om * om / 3.0 - s * om / 12.0 + 2.0 * A / 189.0 + 31.0 * B / 3024.0
    c6 = (2.0 * om * om / 45.0 + s * om / 360.0 + A / 675.0
          + 127.0 * B / 86400.0)
    # Crude but validated dominating constant for the u^8-and-beyond tail.
    tail8 = (abs(om) ** 2 / 315.0 + abs(s * om) / 10000.0
             + abs(A) / 1500.0 + abs(B) / 8000.0) * 4.0 + 1.0
    return PoleExpansion(L=L, c0=c0, c2=c2,
                         coefficients=(c0, c2, c4, c6), _tail8=tail8)


# ---------------------------------------------------------------------------
# JSON round-trip
# ---------------------------------------------------------------------------

def _c2j(z: complex):
    return [z.real, z.imag]


def _j2c(v) -> complex:
    return complex(v[0], v[1])


def model_to_dict(model) -> dict:
    if isinstance(model, TeukolskyModel):
        return {"type": "teukolsky", "omega": _c2j(model.omega),
                "k": str(model.k), "s": str(model.s),
                "lambda": _c2j(model.lam)}
    if isinstance(model, QuadraticModel):
        return {"type": "quadratic", "p": _c2j(model.p), "q": _c2j(model.q),
                "r": _c2j(model.r), "sqrt_q": _c2j(model.sqrt_q)}
    if isinstance(model, SingularModel):
        d = {"type": "singular", "zeta": _c2j(model.zeta), "L": model.L}
        if model.c0 is not None:
            d["c0"] = _c2j(complex(model.c0))
        if model.c2 is not None:
            d["c2"] = _c2j(complex(model.c2))
        if model.c3 is not None:
            d["c3"] = float(model.c3)
        return d
    raise TypeError(f"cannot serialize model type {type(model)!r}")


def model_from_dict(d: dict):
    t = d["type"]
    if t == "teukolsky":
        return TeukolskyModel(_j2c(d["omega"]), Fraction(d["k"]),
                              Fraction(d["s"]), _j2c(d["lambda"]))
    if t == "quadratic":
        sq = _j2c(d["sqrt_q"]) if "sqrt_q" in d else None
        return QuadraticModel(_j2c(d["p"]), _j2c(d["q"]), _j2c(d["r"]), sq)
    if t == "singular":
        return SingularModel(_j2c(d["zeta"]), int(d["L"]),
                             c0=_j2c(d["c0"]) if "c0" in d else None,
                             c2=_j2c(d["c2"]) if "c2" in d else None,
                             c3=d.get("c3"))
    raise ValueError(f"unknown model type {t!r}")


def model_to_json(model) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True)


def model_from_json(text: str):
    return model_from_dict(json.loads(text))
