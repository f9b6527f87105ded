"""Integral identities of the fundamental solution, evaluated numerically.

These are the limits that make the solution formulas work: the
``D^(alpha-1)`` weight approximates a delta function as ``y -> 0``, the
single-layer boundary integral of ``Gamma_x`` jumps by the density across
``t = x``, and ``Gamma`` decays like ``exp(-rho_beta(y) |x|^(1/(1-beta)))``.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .kernel import DEFAULT_QUAD, decay_bound, gamma_deriv, gamma_fs, rho
from .params import QuadratureConfig, TelegraphParams
from .quadrature import integrate_batch


def _spread_edges(scale: float, reach: float) -> np.ndarray:
    # breakpoints 0, scale/64, ..., doubling up to reach
    pts = [0.0]
    v = scale / 64.0
    while v < reach:
        pts.append(v)
        v *= 2.0
    pts.append(reach)
    return np.array(pts)


def delta_smoothing(p: TelegraphParams, q: QuadratureConfig, fn, x: float, eps: float) -> float:
    """``int fn(t) D^(alpha-1) Gamma(x - t, eps) dt`` over the real line.

    ``fn`` must be bounded; the range is cut where the kernel envelope
    falls below ``q.abs_tol``.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    nu = p.alpha - 1.0
    width = eps**p.beta
    reach = width
    while decay_bound(p, 0, nu, 0.0, reach, eps) > q.abs_tol * 1e-2:
        reach *= 1.5
    edges = _spread_edges(width, reach)
    lo = np.concatenate([edges[:-1], -edges[1:]])
    hi = np.concatenate([edges[1:], -edges[:-1]])

    def integrand(u, idx):
        return np.asarray(fn(x - u), dtype=float) * gamma_deriv(p, q, 0, nu, u, eps)

    vals, _ = integrate_batch(
        integrand, lo, hi, rel_tol=q.rel_tol, abs_tol=q.abs_tol, max_panels=q.max_panels
    )
    return float(vals.sum())


def boundary_jump(
    p: TelegraphParams, q: QuadratureConfig, density, x: float, t: float, y: float, delta: float = 0.0
) -> float:
    """Single-layer integral ``int_delta^y density(s) Gamma_x(x - t, y - s) ds`` for ``t != x``."""
    if t == x:
        raise DomainError("the layer integral is evaluated off the line t = x")
    if not 0.0 <= delta < y:
        raise DomainError("need 0 <= delta < y")
    xi = x - t
    # Gamma_x(xi, sigma) lives on the scale sigma ~ |xi|^(1/beta)
    edges = _spread_edges(abs(xi) ** (1.0 / p.beta), y - delta)

    def integrand(sig, idx):
        sig = np.asarray(sig, dtype=float)
        return np.asarray(density(y - sig), dtype=float) * gamma_deriv(p, q, 1, 0.0, xi, sig)

    vals, _ = integrate_batch(
        integrand, edges[:-1], edges[1:], rel_tol=q.rel_tol, abs_tol=q.abs_tol, max_panels=q.max_panels
    )
    return float(vals.sum())


def far_field_slope(p: TelegraphParams, y: float, *, lam=(12.0, 30.0), n: int = 13, q: QuadratureConfig = DEFAULT_QUAD):
    """Least-squares slope of ``log|Gamma(x, y)|`` against ``|x|^(1/(1-beta))``.

    Sample points are placed where ``lam = (|x| y^-beta)^(1/(1-beta))`` lies
    in the given range, deep in the stretched-exponential regime.  Returns
    ``(slope, -rho_beta(y))``.
    """
    beta = p.beta
    lam_pts = np.linspace(lam[0], lam[1], n)
    xs = lam_pts ** (1.0 - beta) * y**beta
    vals = np.abs(gamma_fs(p, q, xs, y))
    if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
        raise DomainError("kernel underflowed on the fitting range; lower lam")
    s = xs ** (1.0 / (1.0 - beta))
    slope = float(np.polyfit(s, np.log(vals), 1)[0])
    return slope, -float(rho(beta, y))


def smoothing_errors(p: TelegraphParams, q: QuadratureConfig, fn, xs, eps_list):
    """Max over ``xs`` of ``|delta_smoothing - fn(x)|`` for each ``eps``."""
    out = []
    for eps in eps_list:
        out.append(max(abs(delta_smoothing(p, q, fn, float(x), eps) - float(fn(x))) for x in xs))
    return out


def relative_gap(values, reference) -> float:
    """``max|values - reference| / max|reference|``."""
    values = np.asarray(values, dtype=float)
    reference = np.asarray(reference, dtype=float)
    scale = float(np.max(np.abs(reference)))
    return float(np.max(np.abs(values - reference))) / (scale if scale > 0 else 1.0)


def rel_error(got, ref) -> np.ndarray:
    """Pointwise ``|got - ref| / |ref|``, counting points where both underflow to 0 as exact."""
    got = np.asarray(got, dtype=float)
    ref = np.asarray(ref, dtype=float)
    diff = np.abs(got - ref)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = diff / np.abs(ref)
    return np.where(diff == 0.0, 0.0, out)
