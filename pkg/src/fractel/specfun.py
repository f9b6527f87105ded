"""Scalar special functions behind the fundamental solution.

Everything here works on real arguments and broadcasts over numpy arrays.
The Wright function ``phi(-beta, mu; z)`` is evaluated by three routes:

* its power series, for small ``|z|`` where cancellation is harmless;
* a steepest-descent Hankel contour for ``z < 0`` (exact, not asymptotic),
  which keeps full relative accuracy deep into the super-exponential decay;
* a parabolic Hankel contour for ``z > 0`` beyond the series range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, special

from .errors import ConfigError, NonConvergence

EPS = np.finfo(float).eps

# estimated relative error beyond which a positive-z evaluation is refused
_HOPELESS = 1e-6

# exponent drop (in units of e) below the saddle at which the contour is cut
_DESCENT_DROP = 50.0


def _sinpi(x):
    # sin(pi*x) with exact zeros at the integers
    x = np.asarray(x, dtype=float)
    n = np.round(x)
    r = np.sin(np.pi * (x - n))
    return np.where(np.mod(n, 2) == 0, r, -r)


def recip_gamma(x):
    """Return ``1/Gamma(x)``, exactly zero at the poles ``0, -1, -2, ...``.

    Arguments below 1/2 go through the reflection formula so that deep
    negative arguments neither overflow nor lose the sign pattern.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0.5
    out[pos] = 1.0 / special.gamma(x[pos])
    neg = ~pos
    xn = x[neg]
    with np.errstate(invalid="ignore", over="ignore"):
        out[neg] = special.gamma(1.0 - xn) * _sinpi(xn) / np.pi
    out[neg & (x == np.round(x))] = 0.0
    return out[()] if out.ndim == 0 else out


def _threshold_scan(beta: float, limit: float) -> float:
    mus = (-1.5, -1.0, -0.5, 0.0, 0.5, 1.0)
    for z in np.arange(0.25, 8.01, 0.25):
        k = np.arange(160)
        worst = 0.0
        for mu in mus:
            c = recip_gamma(mu - beta * k) / special.factorial(k)
            terms = c * (-z) ** k
            s = abs(terms.sum())
            worst = max(worst, np.abs(terms).sum() / s if s > 0 else np.inf)
        if worst > limit:
            return max(float(z) - 0.25, 1.0)
    return 8.0


@dataclass(frozen=True)
class WrightEval:
    """Evaluation settings for ``phi(-beta, mu; z)``.

    ``asym_threshold`` is the ``|z|`` beyond which negative arguments use
    the contour route; left as ``None`` it is placed where the series
    starts losing more than ``series_tol`` to cancellation.
    """

    beta: float
    series_tol: float = 1e-12
    max_terms: int = 160
    asym_threshold: float | None = None
    working_precision: str = "standard"

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ConfigError(f"beta must lie in (0, 1), got {self.beta}")
        if not self.series_tol > 0:
            raise ConfigError("series_tol must be positive")
        if self.max_terms < 32:
            raise ConfigError("max_terms must be at least 32")
        if self.working_precision not in ("standard", "compensated"):
            raise ConfigError(f"unknown working precision {self.working_precision!r}")
        if self.asym_threshold is None:
            thr = _cached_threshold(self.beta, self.cancellation_limit)
            object.__setattr__(self, "asym_threshold", thr)
        elif not self.asym_threshold > 0:
            raise ConfigError("asym_threshold must be positive")

    @property
    def cancellation_limit(self) -> float:
        return self.series_tol / (10 * EPS)


@lru_cache(maxsize=64)
def _cached_threshold(beta: float, limit: float) -> float:
    return _threshold_scan(beta, limit)


@lru_cache(maxsize=256)
def _wright_coeffs(beta: float, mu: float, nterms: int) -> np.ndarray:
    k = np.arange(nterms)
    return recip_gamma(mu - beta * k) / special.factorial(k)


def _series(cfg: WrightEval, mu: float, z: np.ndarray, deriv: bool = False):
    """Power series; returns (value, cancellation ratio)."""
    c = _wright_coeffs(cfg.beta, float(mu), cfg.max_terms)
    if deriv:
        # term-by-term derivative of sum c_k z^k
        c = c[1:] * np.arange(1, cfg.max_terms)
    # powers may overflow for large |z|; the ok flag below rejects those rows
    with np.errstate(over="ignore", invalid="ignore"):
        zp = np.cumprod(np.concatenate([np.ones((z.size, 1)), np.repeat(z[:, None], c.size - 1, axis=1)], axis=1), axis=1)
        terms = zp * c
    if cfg.working_precision == "compensated":
        val = np.array([math.fsum(row) for row in terms])
    else:
        val = terms.sum(axis=1)
    mag = np.abs(terms).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        canc = np.where(val != 0, mag / np.abs(val), np.where(mag == 0, 1.0, np.inf))
    # the tail must have died out inside the term budget
    tail = np.abs(terms[:, -4:]).max(axis=1)
    ok = np.isfinite(val) & (tail <= EPS * np.maximum(mag, 1e-300))
    return val, canc, ok


@lru_cache(maxsize=64)
def _descent_table(beta: float):
    th = np.concatenate(
        [np.linspace(1e-4, 3.0, 3000), np.pi - np.geomspace(np.pi - 3.0, 1e-10, 3000)[1:]]
    )
    r, _, drop = _descent_path(beta, th)
    return th, np.maximum.accumulate(drop)


def _descent_path(beta: float, th):
    """Steepest-descent path of w - w**beta through its saddle.

    Returns radius r(theta), dr/dtheta and the drop f(saddle) - f(theta).
    """
    e = 1.0 / (1.0 - beta)
    ratio = np.sin(beta * th) / np.sin(th)
    r = ratio**e
    small = th < 1e-3
    q = np.where(
        small,
        th * (1 - beta**2) / 3 + th**3 * (1 - beta**4) / 45,
        beta / np.tan(beta * np.where(small, 1.0, th)) - 1 / np.tan(np.where(small, 1.0, th)),
    )
    rp = r * e * q
    w0 = beta**e
    f0 = w0 - w0**beta
    f = r * np.cos(th) - r**beta * np.cos(beta * th)
    return r, rp, f0 - f


@lru_cache(maxsize=8)
def _gl01(n: int):
    u, w = leggauss(n)
    return 0.5 * (u + 1.0), 0.5 * w


def _descent(beta: float, mu: float, x: np.ndarray, shift: float = 0.0) -> np.ndarray:
    """phi(-beta, mu; -x) for x > 0 along the steepest-descent contour."""
    e = 1.0 / (1.0 - beta)
    lam = x**e
    w0 = beta**e
    f0 = w0 - w0**beta
    th_tab, drop_tab = _descent_table(beta)
    tmax = np.interp(_DESCENT_DROP / lam, drop_tab, th_tab)
    out = np.empty_like(x)
    for n, sel in ((128, lam < 4.0), (64, lam >= 4.0)):
        if not sel.any():
            continue
        u, w = _gl01(n)
        t = tmax[sel, None] * u
        wt = tmax[sel, None] * w
        r, rp, drop = _descent_path(beta, t)
        a = (1.0 - mu) * t
        im = r ** (-mu) * (rp * np.sin(a) + r * np.cos(a))
        s = np.sum(wt * np.exp(-lam[sel, None] * drop) * im, axis=1)
        lf = (1.0 - mu) * np.log(lam[sel]) + lam[sel] * f0
        out[sel] = np.exp(lf) * s / np.pi
    return out


def _parabola(beta: float, mu: float, z: np.ndarray, h0: float = 0.5, du: float = 0.04):
    """phi(-beta, mu; z) on a parabolic Hankel contour (trapezoidal rule)."""
    umax = math.sqrt(1.0 + 45.0 / h0 + 2.0 * float(np.max(np.abs(z))))
    u = np.arange(0.0, umax + du, du)
    s = h0 * (1.0 + 1j * u) ** 2
    w = np.full(u.shape, du)
    w[0] = du / 2
    # overflow shows up as a non-finite value and is rejected by the caller
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        F = np.exp(s[None, :] + z[:, None] * s[None, :] ** beta) * s[None, :] ** (-mu) * (1.0 + 1j * u)
        val = 2 * h0 / np.pi * np.sum(w * F.real, axis=1)
        mag = 2 * h0 / np.pi * np.sum(w * np.abs(F), axis=1)
        canc = np.where(val != 0, mag / np.abs(val), np.inf)
    return val, canc


def wright_phi(cfg: WrightEval, mu: float, z):
    """Wright function ``phi(-beta, mu; z) = sum z^k / (k! Gamma(mu - beta k))``.

    Raises :class:`NonConvergence` when no route reaches ``cfg.series_tol``.
    """
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    zf = np.atleast_1d(z).ravel()
    if not np.all(np.isfinite(zf)):
        raise NonConvergence("non-finite argument")
    out = _wright(cfg, float(mu), zf)
    out = out.reshape(z.shape)
    return float(out) if scalar else out


def _wright(cfg: WrightEval, mu: float, z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    zero = z == 0.0
    out[zero] = recip_gamma(mu)
    far = (z <= -cfg.asym_threshold) & ~zero
    near = ~far & ~zero
    if near.any():
        val, canc, ok = _series(cfg, mu, z[near])
        good = ok & (canc <= cfg.cancellation_limit)
        out[near] = val
        bad_idx = np.flatnonzero(near)[~good]
        if bad_idx.size:
            zb = z[bad_idx]
            neg = zb < 0
            if neg.any():
                out[bad_idx[neg]] = _descent(cfg.beta, mu, -zb[neg])
            if (~neg).any():
                pos = bad_idx[~neg]
                pv, pc = _parabola(cfg.beta, mu, zb[~neg])
                # near a sign change of phi neither route is relatively accurate;
                # keep the better-conditioned one and fail only when both are hopeless
                sc = np.where(ok, canc, np.inf)[~good][~neg]
                best = np.where(pc <= sc, pv, val[~good][~neg])
                if np.any(np.minimum(pc, sc) * EPS > _HOPELESS) or not np.all(np.isfinite(best)):
                    raise NonConvergence(
                        f"phi(-{cfg.beta}, {mu}; z) outside the validated envelope near z={zb[~neg].max()}"
                    )
                out[pos] = best
    if far.any():
        out[far] = _descent(cfg.beta, mu, -z[far])
    if not np.all(np.isfinite(out)):
        raise NonConvergence("Wright function evaluation produced a non-finite value")
    return out


def wright_phi_dz(cfg: WrightEval, mu: float, z):
    """Derivative in ``z``; equals ``wright_phi(cfg, mu - beta, z)``.

    Inside the series range the derivative is summed term by term, which
    gives an evaluation path independent of the shifted-parameter one.
    """
    z = np.asarray(z, dtype=float)
    zf = np.atleast_1d(z).ravel()
    out = np.empty_like(zf)
    near = np.abs(zf) < cfg.asym_threshold
    done = np.zeros_like(near)
    if near.any():
        val, canc, ok = _series(cfg, float(mu), zf[near], deriv=True)
        good = ok & (canc <= cfg.cancellation_limit)
        idx = np.flatnonzero(near)[good]
        out[idx] = val[good]
        done[idx] = True
    if (~done).any():
        out[~done] = _wright(cfg, float(mu) - cfg.beta, zf[~done])
    out = out.reshape(z.shape)
    return float(out) if z.ndim == 0 else out


def wright_decay_rate(beta: float) -> float:
    """sigma(beta) in phi(-beta, mu; -x) ~ exp(-sigma x^(1/(1-beta)))."""
    return (1.0 - beta) * beta ** (beta / (1.0 - beta))


def wright_phi_asymptotic(beta: float, mu: float, x):
    """One-term saddle-point approximation of ``phi(-beta, mu; -x)``, x > 0.

    Only used for bounds and tail cut-offs, never for reported values.
    """
    x = np.asarray(x, dtype=float)
    e = 1.0 / (1.0 - beta)
    lam = x**e
    w0 = beta**e
    sig = wright_decay_rate(beta)
    return (lam * w0) ** (1 - mu) * np.exp(-sig * lam) / np.sqrt(2 * np.pi * (1 - beta) * w0 * lam)


def log_wright_asymptotic(beta: float, mu: float, x):
    """Logarithm of :func:`wright_phi_asymptotic` (no underflow)."""
    x = np.asarray(x, dtype=float)
    e = 1.0 / (1.0 - beta)
    lam = x**e
    w0 = beta**e
    sig = wright_decay_rate(beta)
    return (1 - mu) * np.log(lam * w0) - sig * lam - 0.5 * np.log(2 * np.pi * (1 - beta) * w0 * lam)


@dataclass(frozen=True)
class F01Eval:
    """Settings for the confluent hypergeometric limit function."""

    series_tol: float = 1e-13
    max_terms: int = 64
    series_radius: float = 1.0

    def __post_init__(self):
        if not self.series_tol > 0:
            raise ConfigError("series_tol must be positive")


DEFAULT_F01 = F01Eval()


def f01(cfg: F01Eval, nu: float, z):
    """``0F1(; nu; z) = sum Gamma(nu)/Gamma(k+nu) z^k/k!`` for ``nu > 0``.

    Small arguments use the series; larger ones the Bessel relations
    ``0F1(nu; w) = Gamma(nu) w^((1-nu)/2) I_{nu-1}(2 sqrt w)`` and its
    ``J`` counterpart for ``w < 0``.
    """
    if not nu > 0:
        raise ConfigError(f"0F1 needs nu > 0, got {nu}")
    z = np.asarray(z, dtype=float)
    zf = np.atleast_1d(z).ravel()
    out = np.empty_like(zf)
    small = np.abs(zf) <= cfg.series_radius
    if small.any():
        zs = zf[small]
        term = np.ones_like(zs)
        acc = np.ones_like(zs)
        for k in range(1, cfg.max_terms):
            term = term * zs / (k * (nu + k - 1))
            acc = acc + term
            if np.all(np.abs(term) <= cfg.series_tol * 1e-3 * np.abs(acc)):
                break
        else:
            raise NonConvergence("0F1 series did not converge")
        out[small] = acc
    pos = ~small & (zf > 0)
    if pos.any():
        w = zf[pos]
        r = 2.0 * np.sqrt(w)
        # ive keeps the scaled Bessel value finite; fold exp(r) back in log space
        out[pos] = np.exp(special.gammaln(nu) + 0.5 * (1 - nu) * np.log(w) + r) * special.ive(nu - 1, r)
    neg = ~small & (zf < 0)
    if neg.any():
        w = -zf[neg]
        out[neg] = special.gamma(nu) * w ** (0.5 * (1 - nu)) * special.jv(nu - 1, 2.0 * np.sqrt(w))
    if not np.all(np.isfinite(out)):
        raise NonConvergence("0F1 evaluation overflowed")
    out = out.reshape(z.shape)
    return float(out) if z.ndim == 0 else out


def mittag_leffler(alpha: float, z):
    """One-parameter Mittag-Leffler function ``E_alpha(z)`` for ``z <= 0``.

    A test oracle: series where it is well conditioned, the completely
    monotone Laplace-type integral for ``0 < alpha < 1`` beyond that.
    """
    if not 0 < alpha < 2:
        raise NonConvergence(f"alpha={alpha} outside (0, 2)")
    z = np.asarray(z, dtype=float)
    if np.any(z > 0):
        raise NonConvergence("only z <= 0 is supported")
    zf = np.atleast_1d(z).ravel()
    out = np.empty_like(zf)
    for i, zi in enumerate(zf):
        out[i] = _ml_scalar(alpha, zi)
    out = out.reshape(z.shape)
    return float(out) if z.ndim == 0 else out


def _ml_scalar(alpha: float, z: float) -> float:
    if alpha == 1.0:
        return math.exp(z)
    k = np.arange(400)
    with np.errstate(over="ignore", invalid="ignore"):
        terms = z**k * recip_gamma(alpha * k + 1)
    terms = terms[np.isfinite(terms)]
    val = math.fsum(terms)
    mag = np.abs(terms).sum()
    if val != 0 and mag / abs(val) * EPS < 1e-12 and abs(terms[-1]) < EPS * 1e-3 * mag:
        return val
    if alpha < 1.0:
        x = -z
        s = math.sin(alpha * math.pi)
        c = math.cos(alpha * math.pi)
        t = x ** (1.0 / alpha)

        def kern(r):
            return math.exp(-r * t) * r ** (alpha - 1) * s / (math.pi * (r ** (2 * alpha) + 2 * r**alpha * c + 1))

        v1, _ = integrate.quad(kern, 0.0, 1.0, epsabs=0, epsrel=1e-13, limit=200)
        v2, _ = integrate.quad(kern, 1.0, np.inf, epsabs=0, epsrel=1e-13, limit=200)
        return v1 + v2
    raise NonConvergence(f"E_{alpha}({z}) outside the validated range")


class WrightTable:
    """Piecewise Chebyshev interpolant of ``x -> phi(-beta, mu; -x)`` on ``x >= 0``.

    Panels are bisected until the interpolant matches direct evaluation at
    the points halfway between its nodes to ``tol`` relative to the panel's
    magnitude.  Beyond ``x = 1`` the super-exponential decay
    ``exp(-sigma x^(1/(1-beta)))`` is factored out so the tabulated part
    stays smooth and of moderate size.  Past the point where it drops below
    about 1e-250 the value is returned as zero.  Instances are immutable once built.
    """

    degree = 24

    def __init__(self, cfg: WrightEval, mu: float, tol: float = 1e-13):
        self.cfg = cfg
        self.mu = float(mu)
        beta = cfg.beta
        self._sig = wright_decay_rate(beta)
        self._e = 1.0 / (1.0 - beta)
        # beyond this point phi is below about 1e-250 and is returned as zero
        self.x_max = (600.0 / self._sig) ** (1.0 - beta)
        n = self.degree + 1
        k = np.arange(n)
        self._nodes = np.cos(np.pi * (k + 0.5) / n)
        checks = np.cos(np.pi * (np.arange(1, 2 * n, 2) / (2 * n) + 0.25 / n))
        pending = [(0.0, 1.0)] + [(lo, hi) for lo, hi in zip(*_table_edges(self.x_max))]
        done = []
        while pending:
            lo, hi = pending.pop()
            coef = self._fit(lo, hi)
            xc = 0.5 * (hi + lo) + 0.5 * (hi - lo) * checks
            ref = self._scaled(xc, self._direct(xc))
            got = _clenshaw(coef[None, :], checks, np.zeros(checks.size, int))
            scale = max(np.abs(ref).max(), np.abs(coef).max(), 1e-300)
            # the contour loses about lambda * eps of relative accuracy, so the
            # check cannot ask for more than that
            floor = max(tol, 8 * EPS * hi**self._e)
            if np.abs(got - ref).max() <= floor * scale or hi - lo < 1e-3:
                done.append((lo, hi, coef))
            else:
                mid = 0.5 * (lo + hi)
                pending += [(lo, mid), (mid, hi)]
        done.sort()
        self._lo = np.array([d[0] for d in done])
        self._hi = np.array([d[1] for d in done])
        self._coef = np.array([d[2] for d in done])
        for arr in (self._lo, self._hi, self._coef):
            arr.setflags(write=False)

    def _direct(self, x):
        return _wright(self.cfg, self.mu, -np.asarray(x, dtype=float))

    def _log_factor(self, x):
        # log of the decay factored out of the tabulated function (zero for x <= 1)
        x = np.asarray(x, dtype=float)
        return np.where(x > 1.0, -self._sig * (np.maximum(x, 1.0) ** self._e - 1.0), 0.0)

    def _scaled(self, x, values):
        return values * np.exp(-self._log_factor(x))

    def _fit(self, lo, hi):
        x = 0.5 * (hi + lo) + 0.5 * (hi - lo) * self._nodes
        vals = self._scaled(x, self._direct(x))
        return _cheb_coeffs(vals)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.zeros(flat.shape)
        inside = (flat >= 0) & (flat < self._hi[-1])
        if np.any(flat < 0):
            raise ValueError("WrightTable covers non-negative arguments only")
        xi = flat[inside]
        idx = np.clip(np.searchsorted(self._hi, xi, side="right"), 0, self._lo.size - 1)
        lo, hi = self._lo[idx], self._hi[idx]
        u = (2.0 * xi - (lo + hi)) / (hi - lo)
        out[inside] = _clenshaw(self._coef, u, idx) * np.exp(self._log_factor(xi))
        return out.reshape(x.shape)


def _cheb_coeffs(vals):
    # coefficients of the interpolant through values at first-kind Chebyshev nodes
    n = vals.size
    k = np.arange(n)
    j = k[:, None]
    theta = np.pi * (k + 0.5) / n
    c = 2.0 / n * (np.cos(j * theta[None, :]) @ vals)
    c[0] *= 0.5
    return c


def _clenshaw(coef, u, idx):
    b1 = np.zeros(u.shape)
    b2 = np.zeros(u.shape)
    two_u = 2.0 * u
    for j in range(coef.shape[1] - 1, 0, -1):
        b1, b2 = coef[idx, j] + two_u * b1 - b2, b1
    return coef[idx, 0] + u * b1 - b2


def _table_edges(x_max):
    edges = [1.0]
    while edges[-1] < x_max:
        edges.append(min(edges[-1] * 1.5, edges[-1] + 4.0, x_max))
    return edges[:-1], edges[1:]


@lru_cache(maxsize=256)
def wright_table(beta: float, mu: float) -> WrightTable:
    """Cached :class:`WrightTable` for ``phi(-beta, mu; -x)``."""
    return WrightTable(WrightEval(beta), mu)
