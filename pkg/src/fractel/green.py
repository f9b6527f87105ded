"""Green functions of the half-strip and rectangle by the method of images.

Every Green function here is a signed sum of copies of the fundamental
solution at reflected arguments.  An image is stored as ``(weight, X, dX/dt)``
so that values, y-derivatives ``D^nu`` and the t-derivative needed for
boundary terms all come from the same list.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, TruncationWarning
from .kernel import _growth_rate, gamma_deriv
from .params import QuadratureConfig, TelegraphParams
from .specfun import wright_decay_rate


@dataclass(frozen=True)
class BoundaryKind:
    """Boundary condition indices: 0 fixes the value, 1 the normal derivative.

    ``j`` refers to the right wall and is ``None`` for the half-strip.
    """

    i: int
    j: int | None = None

    def __post_init__(self):
        if self.i not in (0, 1) or self.j not in (None, 0, 1):
            raise ConfigError(f"boundary indices must be 0 or 1, got ({self.i}, {self.j})")


@dataclass(frozen=True)
class ImageSeriesConfig:
    """Absolute tail tolerance and cap on ``|m|`` for the rectangle series."""

    tol: float = 1e-12
    max_images: int = 200

    def __post_init__(self):
        if not self.tol > 0:
            raise ConfigError("image-series tol must be positive")
        if self.max_images < 1:
            raise ConfigError("max_images must be positive")


DEFAULT_IMAGES = ImageSeriesConfig()


def _log_term_bound(p: TelegraphParams, dist, ys, nu: float, m: int):
    # log of a stretched-exponential envelope for |d^m D^nu Gamma| at |x| >= dist
    beta = p.beta
    lam = (dist * ys**-beta) ** (1.0 / (1.0 - beta))
    pw = max(0.5 - beta + nu + beta * m, 0.0)
    kappa = max(_growth_rate(p), 0.0) + math.sqrt(max(-p.a, 0.0))
    return (
        math.log(2.0)
        + (beta - nu - 1 - beta * m) * math.log(ys)
        + pw * math.log1p(lam)
        + kappa * dist
        - wright_decay_rate(beta) * lam
    )


def images_needed(
    p: TelegraphParams, cfg: ImageSeriesConfig, a1: float, a2: float, y_minus_s: float, *, nu: float = 0.0, m: int = 0
) -> int:
    """Smallest reflection count ``M`` whose neglected tail is below ``cfg.tol``.

    Image ``m`` sits at distance at least ``(2|m| - 1)(a2 - a1)`` from the
    evaluation point; the tail is bounded with the kernel's stretched
    exponential decay.  Capped at ``cfg.max_images`` with a warning.
    """
    if not a2 > a1:
        raise DomainError("the rectangle needs a2 > a1")
    if not y_minus_s > 0:
        raise DomainError("images_needed requires y - s > 0")
    length = a2 - a1
    log_tol = math.log(cfg.tol)
    for big_m in range(1, cfg.max_images + 1):
        tail = -math.inf
        for mm in range(big_m + 1, big_m + 2000):
            # four kernel copies per |m|: two signs of m times two reflections
            lt = math.log(4.0) + _log_term_bound(p, (2 * mm - 1) * length, y_minus_s, nu, m)
            tail = np.logaddexp(tail, lt)
            if lt < tail - 40:
                break
        if tail < log_tol:
            return big_m
    warnings.warn(
        f"image series capped at {cfg.max_images} reflections before reaching tol={cfg.tol:g}",
        TruncationWarning,
        stacklevel=2,
    )
    return cfg.max_images


class FreeSpace:
    """The fundamental solution itself, as a kernel of (x, y; t, s)."""

    def __init__(self, p: TelegraphParams, q: QuadratureConfig):
        self.p = p
        self.q = q

    def images(self, x, t, y_minus_s):
        return [(1.0, np.asarray(x, float) - np.asarray(t, float), -1.0)]

    def value(self, x, y, t, s, *, nu: float = 0.0, dt: int = 0):
        """``d^dt/dt^dt D^nu_y`` of the kernel at ``(x, y; t, s)``."""
        y = np.asarray(y, dtype=float)
        return self.value_lag(x, t, y - np.asarray(s, dtype=float), nu=nu, dt=dt)

    def value_lag(self, x, t, ys, *, nu: float = 0.0, dt: int = 0):
        """As :meth:`value` but in terms of the time lag ``y - s``."""
        x, t, ys = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, t, ys)))
        if np.any(ys <= 0):
            raise DomainError("Green functions are evaluated for s < y only")
        total = np.zeros(x.shape)
        for w, X, dX in self.images(x, t, ys):
            total = total + w * dX**dt * gamma_deriv(self.p, self.q, dt, nu, X, ys)
        return float(total) if total.ndim == 0 else total


class HalfStrip(FreeSpace):
    """Green function ``G_i`` of the half-strip ``x > a1``."""

    def __init__(self, p: TelegraphParams, q: QuadratureConfig, i: int, a1: float):
        super().__init__(p, q)
        BoundaryKind(i)
        self.i = i
        self.a1 = float(a1)

    def images(self, x, t, y_minus_s):
        x = np.asarray(x, float)
        t = np.asarray(t, float)
        return [(1.0, x - t, -1.0), ((-1.0) ** (self.i + 1), x + t - 2 * self.a1, 1.0)]


class Rect(FreeSpace):
    """Green function ``G_ij`` of the strip ``a1 < x < a2`` as a truncated image series."""

    def __init__(
        self,
        p: TelegraphParams,
        q: QuadratureConfig,
        cfg: ImageSeriesConfig,
        i: int,
        j: int,
        a1: float,
        a2: float,
        *,
        nu_max: float = 0.0,
    ):
        super().__init__(p, q)
        BoundaryKind(i, j)
        if not a2 > a1:
            raise DomainError("the rectangle needs a2 > a1")
        self.cfg = cfg
        self.i, self.j = i, j
        self.a1, self.a2 = float(a1), float(a2)
        self.nu_max = nu_max

    def count(self, y_minus_s) -> int:
        ys = float(np.min(y_minus_s))
        ys_max = float(np.max(y_minus_s))
        # the bound grows with y - s except for the algebraic prefactor at small y
        return max(
            images_needed(self.p, self.cfg, self.a1, self.a2, v, nu=self.nu_max, m=1) for v in {ys, ys_max}
        )

    def images(self, x, t, y_minus_s):
        x = np.asarray(x, float)
        t = np.asarray(t, float)
        big_m = self.count(y_minus_s)
        length = self.a2 - self.a1
        out = []
        for m in sorted(range(-big_m, big_m + 1), key=lambda v: (abs(v), v)):
            sign = (-1.0) ** ((self.i + self.j) * m)
            shift = 2 * m * length
            out.append((sign, shift + x - t, -1.0))
            out.append((sign * (-1.0) ** (self.i + 1), shift + x + t - 2 * self.a1, 1.0))
        return out


def green_half(p, q, i, a1, x, y, t, s):
    """``G_i(x, y; t, s) = Gamma(x-t, y-s) + (-1)^(i+1) Gamma(x+t-2a1, y-s)``."""
    _check_half(a1, x, t, y, s)
    return HalfStrip(p, q, i, a1).value(x, y, t, s)


def green_half_dt(p, q, i, a1, x, y, t, s):
    """``d/dt G_i(x, y; t, s)``."""
    _check_half(a1, x, t, y, s)
    return HalfStrip(p, q, i, a1).value(x, y, t, s, dt=1)


def green_rect(p, q, cfg, i, j, a1, a2, x, y, t, s):
    """Rectangle Green function ``G_ij``, series truncated by :func:`images_needed`."""
    _check_rect(a1, a2, x, t, y, s)
    return Rect(p, q, cfg, i, j, a1, a2).value(x, y, t, s)


def green_rect_dt(p, q, cfg, i, j, a1, a2, x, y, t, s):
    """``d/dt G_ij(x, y; t, s)``."""
    _check_rect(a1, a2, x, t, y, s)
    return Rect(p, q, cfg, i, j, a1, a2).value(x, y, t, s, dt=1)


def _check_half(a1, x, t, y, s):
    if np.any(np.asarray(x) < a1) or np.any(np.asarray(t) < a1):
        raise DomainError("half-strip points need x, t >= a1")
    if np.any(np.asarray(s) < 0) or np.any(np.asarray(s) >= np.asarray(y)):
        raise DomainError("need 0 <= s < y")


def _check_rect(a1, a2, x, t, y, s):
    for v in (x, t):
        v = np.asarray(v)
        if np.any(v < a1) or np.any(v > a2):
            raise DomainError("rectangle points need a1 <= x, t <= a2")
    if np.any(np.asarray(s) < 0) or np.any(np.asarray(s) >= np.asarray(y)):
        raise DomainError("need 0 <= s < y")
