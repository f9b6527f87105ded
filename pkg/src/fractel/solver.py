"""Solution formulas for the Cauchy, half-strip and rectangle problems.

All three representations share one structure::

    u(x, y) = sum_k int tau_k(t) W_k(x, y; t) dt          (initial data)
            + int_0^y B(x, y; s) ds                         (boundary data)
            + int_0^y int G(x, y; t, s) f(t, s) dt ds       (source)

with ``W_k = [D^(alpha-k) + (2-k) b D^(beta-k)] G`` at ``s = 0``.  For the
half-strip and the rectangle ``G`` is a signed image sum of the fundamental
solution, so the data integrals are evaluated as free-space convolutions
against the correspondingly reflected (odd, even or periodic) extension of
the data.  The boundary integrals use the image Green functions from
:mod:`fractel.green` directly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, DomainError, FractelError, GrowthViolation
from .field import GridSpec, ScalarField
from .green import DEFAULT_IMAGES, FreeSpace, HalfStrip, ImageSeriesConfig, Rect
from .kernel import _growth_rate, gamma_deriv
from .params import QuadratureConfig, TelegraphParams
from .quadrature import gauss_legendre
from .specfun import wright_decay_rate

VARIANTS = ("cauchy", "half", "rect")

DataFn = Callable[..., np.ndarray]


@dataclass(frozen=True)
class ProblemSpec:
    """Problem variant, geometry and data.

    Data functions take numpy arrays and must broadcast: ``tau1(x)``,
    ``tau2(x)``, ``phi1(y)``, ``phi2(y)`` and ``f(x, y)``.  Missing
    ``phi1``, ``phi2`` or ``f`` mean zero; a missing ``tau2`` is an error
    when ``alpha > 1``.  ``growth = (K, rho)`` optionally declares
    ``|data(x)| <= K exp(rho |x|^(1/(1-beta)))``; the declaration is
    spot-checked on every integration window.
    """

    variant: str
    tau1: DataFn
    tau2: DataFn | None = None
    phi1: DataFn | None = None
    phi2: DataFn | None = None
    f: DataFn | None = None
    i: int = 0
    j: int = 0
    a1: float = 0.0
    a2: float | None = None
    T: float = 1.0
    growth: tuple[float, float] | None = None

    def validate(self, p: TelegraphParams) -> None:
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown problem variant {self.variant!r}")
        if not self.T > 0:
            raise ConfigError("the time horizon T must be positive")
        if p.n == 2 and self.tau2 is None:
            raise ConfigError("alpha > 1 needs the initial derivative tau2")
        if p.n == 1 and self.tau2 is not None:
            raise ConfigError("tau2 is only meaningful for alpha > 1")
        if self.variant != "cauchy" and not math.isfinite(self.a1):
            raise ConfigError("a1 must be finite")
        if self.variant in ("half", "rect") and self.i not in (0, 1):
            raise ConfigError("boundary index i must be 0 or 1")
        if self.variant == "rect":
            if self.j not in (0, 1):
                raise ConfigError("boundary index j must be 0 or 1")
            if self.a2 is None or not self.a2 > self.a1:
                raise ConfigError("the rectangle needs a2 > a1")
        if self.growth is not None:
            K, rho_data = self.growth
            crit = wright_decay_rate(p.beta) * self.T ** (-p.beta / (1 - p.beta))
            if not (K >= 0 and 0 <= rho_data < crit):
                raise ConfigError(
                    f"declared growth rate {rho_data} must lie in [0, {crit:.6g}) for T={self.T}"
                )

    @property
    def length(self) -> float:
        return self.a2 - self.a1


def _call(fn: DataFn | None, *args) -> np.ndarray:
    shape = np.broadcast(*args).shape
    if fn is None:
        return np.zeros(shape)
    out = np.asarray(fn(*args), dtype=float)
    out = np.broadcast_to(out, shape)
    if not np.all(np.isfinite(out)):
        raise ConfigError("a data function returned a non-finite value")
    return out


def _extend(spec: ProblemSpec, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map points of the real line to (point in the domain, sign) for image data."""
    t = np.asarray(t, dtype=float)
    if spec.variant == "cauchy":
        return t, np.ones(t.shape)
    if spec.variant == "half":
        inside = t >= spec.a1
        return np.where(inside, t, 2 * spec.a1 - t), np.where(inside, 1.0, (-1.0) ** (spec.i + 1))
    L = spec.length
    u = t - spec.a1
    k = np.floor(u / (2 * L))
    r = u - 2 * k * L
    direct = r < L
    parity = (-1.0) ** ((spec.i + spec.j) * (k % 2))
    parity_next = (-1.0) ** ((spec.i + spec.j) * ((k + 1) % 2))
    point = np.where(direct, spec.a1 + r, spec.a1 + 2 * L - r)
    sign = np.where(direct, parity, parity_next * (-1.0) ** (spec.i + 1))
    return np.clip(point, spec.a1, spec.a2), sign


def _walls(spec: ProblemSpec, lo: float, hi: float) -> np.ndarray:
    # points where the extended data may have a kink or jump
    if spec.variant == "cauchy":
        return np.zeros(0)
    if spec.variant == "half":
        return np.array([spec.a1])
    L = spec.length
    k = np.arange(math.floor((lo - spec.a1) / L) - 1, math.ceil((hi - spec.a1) / L) + 2)
    return spec.a1 + k * L


def _log_kernel_bound(p: TelegraphParams, nu: float, R, y: float):
    # stretched-exponential envelope of |D^nu Gamma(R, y)| in log form
    beta = p.beta
    lam = (np.asarray(R) * y**-beta) ** (1.0 / (1.0 - beta))
    pw = max(0.5 - beta + nu, 0.0)
    kappa = max(_growth_rate(p), 0.0) + math.sqrt(max(-p.a, 0.0))
    return math.log(2.0) + (beta - nu - 1) * math.log(y) + pw * np.log1p(lam) + kappa * R - wright_decay_rate(beta) * lam


def _window(p, nus, y, log_data, tol):
    """Half-width R of the convolution window so the neglected tail is below tol."""
    scale = y**p.beta
    R = scale * 2.0 ** (np.arange(0, 240) / 4.0)
    worst = np.max([_log_kernel_bound(p, nu, R, y) for nu in nus], axis=0) + log_data(R) + np.log(R + 1.0)
    ok = worst < math.log(tol)
    # the bound must have turned over, not merely be small near the origin
    turned = np.arange(R.size) > np.argmax(worst)
    hit = ok & turned
    if not hit.any():
        raise DomainError("kernel decay does not beat the data growth on this horizon")
    return float(R[np.argmax(hit)])


def _xi_rule(scale: float, R: float, breaks, order: int = 16, max_len: float = 0.25):
    """Composite Gauss-Legendre rule on [-R, R], graded around 0 on the kernel scale."""
    g = scale * 2.0 ** np.arange(-6, 80)
    g = g[g < R]
    br = np.asarray(breaks, dtype=float)
    br = br[(br > -R) & (br < R)]
    edges = np.unique(np.concatenate([[-R, 0.0, R], g, -g, br]))
    lens = np.diff(edges)
    pieces = np.maximum(1, np.ceil(lens / max_len)).astype(int)
    fine = [edges[:1]]
    for a, n, h in zip(edges[:-1], pieces, lens):
        fine.append(a + h * np.arange(1, n + 1) / n)
    edges = np.concatenate(fine)
    u, w = gauss_legendre(order)
    h = np.diff(edges)[:, None]
    return (edges[:-1, None] + h * u).ravel(), (h * w).ravel()


def _w_rule(levels: int, order: int = 10):
    """Nodes on (0, 1] graded geometrically toward 0."""
    edges = np.concatenate([[0.0], 2.0 ** -np.arange(levels, -1, -1)])
    u, w = gauss_legendre(order)
    h = np.diff(edges)[:, None]
    return (edges[:-1, None] + h * u).ravel(), (h * w).ravel()


def initial_kernel(p: TelegraphParams, q: QuadratureConfig, k: int, green_eval, x, y, t):
    """Weight ``[D^(alpha-k) + (2-k) b D^(beta-k)] G(x, y; t, 0)`` of the datum ``tau_k``."""
    if k not in (1, 2) or k > p.n:
        raise DomainError(f"k must be 1..n, got k={k} with n={p.n}")
    out = green_eval.value(x, y, t, 0.0, nu=p.alpha - k)
    if k == 1 and p.b != 0.0:
        out = out + p.b * green_eval.value(x, y, t, 0.0, nu=p.beta - k)
    return out


class _Evaluator:
    """Shared machinery for one (params, config, problem) triple."""

    def __init__(self, p, q, cfg, spec):
        spec.validate(p)
        self.p, self.q, self.cfg, self.spec = p, q, cfg, spec
        self.free = FreeSpace(p, q)
        self.eps = 1.0 / (1.0 - p.beta)
        self.taus = [spec.tau1] + ([spec.tau2] if p.n == 2 else [])

    # data envelopes --------------------------------------------------------
    def _log_envelope(self, xmax, sample_fn):
        spec = self.spec
        if spec.growth is not None:
            K, rho_data = spec.growth
            return lambda R: math.log(max(K, 1e-300)) + rho_data * (xmax + R) ** self.eps
        # bounded data assumed; the bound is the sampled maximum
        K = max(sample_fn(), 1e-300)
        return lambda R: math.log(K) + 0.0 * R

    def _check_growth(self, t, values):
        spec = self.spec
        if spec.growth is None or spec.variant == "rect":
            return
        K, rho_data = spec.growth
        env = K * np.exp(rho_data * np.abs(t) ** self.eps)
        if np.any(np.abs(values) > env * (1 + 1e-9) + 1e-300):
            idx = int(np.argmax(np.abs(values) - env))
            raise GrowthViolation(
                f"data value {values.flat[idx]:.6g} at t={t.flat[idx]:.6g} exceeds the declared envelope"
            )

    def _ext(self, fn, t, *extra):
        point, sign = _extend(self.spec, t)
        vals = _call(fn, point, *extra)
        return sign * vals

    # the three terms -------------------------------------------------------
    def initial(self, xs, y):
        p = self.p
        tol = self.q.abs_tol * 1e-2
        out = np.zeros(xs.shape)
        for k, tau in enumerate(self.taus, start=1):
            nus = [p.alpha - k] + ([p.beta - k] if k == 1 and p.b != 0 else [])
            probe = np.linspace(xs.min() - 20, xs.max() + 20, 401)
            log_data = self._log_envelope(
                float(np.abs(xs).max()), lambda: float(np.abs(self._ext(tau, probe)).max())
            )
            R = _window(p, nus, y, log_data, tol)
            if self.spec.variant == "cauchy":
                xi, w = _xi_rule(y**p.beta, R, [])
                W = initial_kernel(p, self.q, k, self.free, xi, y, 0.0)
                t = xs[:, None] - xi[None, :]
                vals = self._ext(tau, t)
                self._check_growth(t, vals)
                out += vals @ (w * W)
            else:
                for n, x in enumerate(xs):
                    breaks = x - _walls(self.spec, x - R, x + R)
                    xi, w = _xi_rule(y**p.beta, R, breaks)
                    W = initial_kernel(p, self.q, k, self.free, xi, y, 0.0)
                    t = x - xi
                    vals = self._ext(tau, t)
                    self._check_growth(t, vals)
                    out[n] += np.dot(vals, w * W)
        return out

    def source(self, xs, y):
        spec, p = self.spec, self.p
        if spec.f is None:
            return np.zeros(xs.shape)
        beta = p.beta
        wn, ww = _w_rule(6)
        sig = y * wn ** (1.0 / beta)
        ds = ww * y / beta * wn ** (1.0 / beta - 1.0)
        s = y - sig
        out = np.zeros(xs.shape)
        tol = self.q.abs_tol * 1e-2 / y
        for sv, sg, dsv in zip(s, sig, ds):
            probe = np.linspace(xs.min() - 20, xs.max() + 20, 401)
            log_data = self._log_envelope(
                float(np.abs(xs).max()), lambda: float(np.abs(self._ext(spec.f, probe, sv)).max())
            )
            R = _window(p, [0.0], sg, log_data, tol)
            if spec.variant == "cauchy":
                xi, w = _xi_rule(sg**beta, R, [])
                G = gamma_deriv(p, self.q, 0, 0.0, xi, sg)
                t = xs[:, None] - xi[None, :]
                vals = self._ext(spec.f, t, sv)
                self._check_growth(t, vals)
                out += dsv * (vals @ (w * G))
            else:
                for n, x in enumerate(xs):
                    breaks = x - _walls(spec, x - R, x + R)
                    xi, w = _xi_rule(sg**beta, R, breaks)
                    G = gamma_deriv(p, self.q, 0, 0.0, xi, sg)
                    t = x - xi
                    vals = self._ext(spec.f, t, sv)
                    self._check_growth(t, vals)
                    out[n] += dsv * np.dot(vals, w * G)
        return out

    def boundary(self, xs, y):
        spec, p = self.spec, self.p
        if spec.variant == "cauchy":
            return np.zeros(xs.shape)
        beta = p.beta
        wn, ww = _w_rule(40)
        sig = y * wn ** (1.0 / beta)
        ds = ww * y / beta * wn ** (1.0 / beta - 1.0)
        s = y - sig
        if spec.variant == "half":
            green = HalfStrip(p, self.q, spec.i, spec.a1)
            walls = [(spec.a1, spec.phi1, (-1.0) ** spec.i, 1 - spec.i)]
        else:
            green = Rect(p, self.q, self.cfg, spec.i, spec.j, spec.a1, spec.a2)
            walls = [
                (spec.a1, spec.phi1, (-1.0) ** spec.i, 1 - spec.i),
                (spec.a2, spec.phi2, -((-1.0) ** spec.j), 1 - spec.j),
            ]
        out = np.zeros(xs.shape)
        for wall, phi, sign, order in walls:
            if phi is None:
                continue
            data = _call(phi, s)
            if not np.any(data):
                continue
            X, lag = np.meshgrid(xs, sig, indexing="ij")
            K = green.value_lag(X, wall, lag, dt=order)
            out += sign * (K * (ds * data)).sum(axis=1)
        return out


def _points(p, q, cfg, spec, xs, y):
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ev = _Evaluator(p, q, cfg, spec)
    if not y >= 0:
        raise DomainError("y must be non-negative")
    if y == 0:
        return _call(spec.tau1, xs).copy()
    if y > spec.T * (1 + 1e-12):
        raise DomainError(f"y={y} lies beyond the horizon T={spec.T}")
    if spec.variant == "half" and np.any(xs < spec.a1):
        raise DomainError("half-strip points need x >= a1")
    if spec.variant == "rect" and (np.any(xs < spec.a1) or np.any(xs > spec.a2)):
        raise DomainError("rectangle points need a1 <= x <= a2")
    # on a Dirichlet wall the value is prescribed and the double-layer kernel is undefined
    fixed = np.zeros(xs.shape, bool)
    out = np.zeros(xs.shape)
    if spec.variant != "cauchy":
        walls = [(spec.a1, spec.i, spec.phi1)]
        if spec.variant == "rect":
            walls.append((spec.a2, spec.j, spec.phi2))
        for wall, kind, phi in walls:
            on = (xs == wall) & ~fixed
            if kind == 0 and on.any():
                out[on] = _call(phi, np.array(y))
                fixed |= on
    free = ~fixed
    if free.any():
        xf = xs[free]
        out[free] = ev.initial(xf, y) + ev.boundary(xf, y) + ev.source(xf, y)
    return out


def _scalar(v):
    return float(v[0]) if v.size == 1 else v


def solve_cauchy(p: TelegraphParams, q: QuadratureConfig, spec: ProblemSpec, x, y: float):
    """Cauchy-problem solution at ``(x, y)``; ``x`` may be an array of one row."""
    if spec.variant != "cauchy":
        raise ConfigError("solve_cauchy needs a Cauchy problem")
    return _scalar(_points(p, q, DEFAULT_IMAGES, spec, x, y))


def solve_half(p: TelegraphParams, q: QuadratureConfig, cfg: ImageSeriesConfig, spec: ProblemSpec, x, y: float):
    """Half-strip problem ``P_i`` solution at ``(x, y)``."""
    if spec.variant != "half":
        raise ConfigError("solve_half needs a half-strip problem")
    return _scalar(_points(p, q, cfg, spec, x, y))


def solve_rect(p: TelegraphParams, q: QuadratureConfig, cfg: ImageSeriesConfig, spec: ProblemSpec, x, y: float):
    """Rectangle problem ``P_ij`` solution at ``(x, y)``."""
    if spec.variant != "rect":
        raise ConfigError("solve_rect needs a rectangle problem")
    return _scalar(_points(p, q, cfg, spec, x, y))


class FieldEvaluationError(FractelError):
    """A grid evaluation stopped; ``partial`` holds the rows finished so far."""

    def __init__(self, message, partial: ScalarField, cause: Exception):
        super().__init__(message)
        self.partial = partial
        self.cause = cause


def eval_field(
    p: TelegraphParams,
    q: QuadratureConfig,
    cfg: ImageSeriesConfig,
    spec: ProblemSpec,
    grid: GridSpec,
) -> ScalarField:
    """Evaluate the solution on every grid node, one y-row at a time.

    Warnings raised during evaluation are collected into ``meta["warnings"]``.
    The first hard failure raises :class:`FieldEvaluationError` carrying the
    partially filled field (NaN where not evaluated).
    """
    values = np.full((grid.nx, grid.ny), np.nan)
    collected: list[str] = []
    meta = {"variant": spec.variant, "params": p.to_dict(), "quadrature": q.to_dict()}
    for iy, y in enumerate(grid.y):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                values[:, iy] = _points(p, q, cfg, spec, grid.x, float(y))
            except FractelError as exc:
                meta["warnings"] = sorted(set(collected))
                partial = ScalarField(grid, values, dict(meta, failed_row=iy, error=str(exc)))
                raise FieldEvaluationError(f"evaluation failed at y={y}: {exc}", partial, exc) from exc
        collected.extend(str(w.message) for w in caught)
    meta["warnings"] = sorted(set(collected))
    return ScalarField(grid, values, meta)
