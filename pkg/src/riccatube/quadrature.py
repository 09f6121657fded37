"""Internal quadrature helpers: adaptive segment integrals and cumulative
integrals along tube grids, for real and complex integrands."""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from .errors import QuadratureFailure


def adaptive_quad(f, a: float, b: float, epsrel: float = 1e-12,
                  epsabs: float = 1e-300, limit: int = 200,
                  complex_valued: bool = False):
    """QUADPACK integral of ``f`` over [a, b] with failure detection."""
    if a == b:
        return 0.0 + 0.0j if complex_valued else 0.0
    if complex_valued:
        re = adaptive_quad(lambda u: f(u).real, a, b, epsrel, epsabs, limit)
        im = adaptive_quad(lambda u: f(u).imag, a, b, epsrel, epsabs, limit)
        return re + 1j * im
    val, err, info, *rest = quad(f, a, b, epsabs=epsabs, epsrel=epsrel,
                                 limit=limit, full_output=True)
    if rest:
        # message present => warning raised by QUADPACK; accept it when the
        # achieved error estimate is still adequate
        scale = max(abs(val), epsabs / max(epsrel, 1e-300))
        if err > 1e3 * epsrel * scale + epsabs:
            raise QuadratureFailure(
                f"quad on [{a}, {b}]: {rest[0]} (err={err:.2e}, val={val:.2e})")
    return val


def _quad_err(f, a, b, epsrel, limit=200):
    if a == b:
        return 0.0, 0.0
    val, err, *_ = quad(f, a, b, epsabs=1e-300, epsrel=epsrel, limit=limit,
                        full_output=True)
    return val, err


def cumulative_quad(f, grid, epsrel: float = 1e-12,
                    complex_valued: bool = False) -> np.ndarray:
    """F(grid[i]) = integral of f from grid[0] to grid[i], per-segment
    adaptive.  Error control is global: the accumulated error estimate must
    stay below epsrel * max|F| (plus a tiny absolute floor); per-segment
    roundoff reports on negligible segments are tolerated.

    The grid may be increasing or decreasing; values are signed integrals.
    """
    grid = np.asarray(grid, dtype=float)
    out = np.zeros(len(grid), dtype=complex if complex_valued else float)
    acc = out[0]
    total_err = 0.0
    for i in range(1, len(grid)):
        a, b = grid[i - 1], grid[i]
        if complex_valued:
            vr, er = _quad_err(lambda u: f(u).real, a, b, epsrel)
            vi, ei = _quad_err(lambda u: f(u).imag, a, b, epsrel)
            acc = acc + vr + 1j * vi
            total_err += er + ei
        else:
            v, e = _quad_err(f, a, b, epsrel)
            acc = acc + v
            total_err += e
        out[i] = acc
    scale = float(np.max(np.abs(out)))
    if total_err > 100.0 * epsrel * scale + 1e-13:
        raise QuadratureFailure(
            f"cumulative quadrature error {total_err:.2e} exceeds tolerance "
            f"(scale {scale:.2e})")
    return out


def geometric_grid(a: float, b: float, n: int) -> np.ndarray:
    """Log-spaced grid from a to b (both positive), endpoints included."""
    return np.geomspace(a, b, n)
