"""Finite-difference reference solver used to cross-check the analytic formulas.

Caputo derivatives of order below one use the L1 scheme.  For order
``alpha`` in (1, 2) the L1 scheme of order ``alpha - 1`` is applied to
``v = u_y``, where ``v`` is advanced by the trapezoidal rule and the equation
is collocated at half levels (the Sun-Wu construction, accuracy
``O(dy^(3-alpha))``).  Space uses second-order central differences and each
level is one tridiagonal solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConfigError, GridMismatch, SingularSystem
from .field import GridSpec, ScalarField
from .kernel import gamma_fs
from .params import QuadratureConfig, TelegraphParams
from .solver import ProblemSpec, _call

SCHEMES = ("L1", "Order2Time")


@dataclass(frozen=True)
class FDConfig:
    """Grid counts and time-stepping options.

    ``nx`` counts x nodes (walls included), ``ny`` counts y steps, so the
    output has ``ny + 1`` levels.  ``scheme`` and ``theta`` default to the
    natural choice for ``alpha``: L1 with a fully implicit step when
    ``alpha <= 1`` and the half-level scheme with ``theta = 1/2`` above.
    ``window`` fixes the x-range of a truncated Cauchy problem.
    """

    nx: int
    ny: int
    scheme: str | None = None
    theta: float | None = None
    window: tuple[float, float] | None = None

    def __post_init__(self):
        if self.nx < 3:
            raise ConfigError("FDConfig needs nx >= 3")
        if self.ny < 2:
            raise ConfigError("FDConfig needs ny >= 2")
        if self.scheme is not None and self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.theta is not None and not 0.0 <= self.theta <= 1.0:
            raise ConfigError("theta must lie in [0, 1]")
        if self.window is not None and not self.window[1] > self.window[0]:
            raise ConfigError("window must be an increasing pair")

    def resolve(self, p: TelegraphParams) -> tuple[str, float]:
        natural = "L1" if p.n == 1 else "Order2Time"
        scheme = self.scheme or natural
        if scheme != natural:
            raise ConfigError(f"scheme {scheme} does not fit alpha={p.alpha}; use {natural}")
        theta = self.theta if self.theta is not None else (1.0 if scheme == "L1" else 0.5)
        return scheme, theta


@dataclass(frozen=True)
class CaputoWeights:
    """L1 weights ``b_l = (l+1)^(1-r) - l^(1-r)`` for ``D^order`` on a uniform y-grid.

    ``r`` is the order itself below one and ``order - 1`` above one, where
    the weights act on ``v = u_y``.  ``order == 1`` is the backward difference.
    """

    order: float
    dy: float
    b: np.ndarray
    scale: float

    @property
    def acts_on_derivative(self) -> bool:
        return self.order > 1.0

    def apply(self, u, du0=None) -> np.ndarray:
        """Approximations of ``D^order u`` at levels ``1..ny`` from samples at ``0..ny``.

        ``u`` has levels along its last axis.  Orders above one need the
        initial derivative ``du0``.
        """
        u = np.asarray(u, dtype=float)
        w = u
        if self.acts_on_derivative:
            if du0 is None:
                raise ConfigError("orders above one need the initial derivative du0")
            w = trapezoid_slopes(u, du0, self.dy)
        d = np.diff(w, axis=-1)
        out = np.empty(d.shape)
        for m in range(d.shape[-1]):
            out[..., m] = d[..., : m + 1] @ self.b[m::-1]
        return self.scale * out


def caputo_weights(order: float, ny: int, dy: float) -> CaputoWeights:
    """Weight table of the L1 scheme for ``D^order`` with ``order`` in (0, 2)."""
    if not 0.0 < order < 2.0:
        raise ConfigError(f"Caputo order must lie in (0, 2), got {order}")
    if ny < 1 or not dy > 0:
        raise ConfigError("need ny >= 1 and dy > 0")
    if order == 1.0:
        b = np.zeros(ny)
        b[0] = 1.0
        return CaputoWeights(order, dy, b, 1.0 / dy)
    r = order - 1.0 if order > 1.0 else order
    ell = np.arange(ny, dtype=float)
    b = (ell + 1.0) ** (1.0 - r) - ell ** (1.0 - r)
    return CaputoWeights(order, dy, b, dy**-r / math.gamma(2.0 - r))


def trapezoid_slopes(u, du0, dy: float) -> np.ndarray:
    """Node slopes ``v`` with ``u[k+1] - u[k] = dy (v[k] + v[k+1]) / 2`` and ``v[0] = du0``."""
    u = np.asarray(u, dtype=float)
    v = np.empty(u.shape)
    v[..., 0] = du0
    for k in range(u.shape[-1] - 1):
        v[..., k + 1] = 2.0 * (u[..., k + 1] - u[..., k]) / dy - v[..., k]
    return v


class _Space:
    """``(-d_xx + c)`` on a uniform x-grid with its boundary treatment.

    Each wall is ``"dirichlet"``, ``"neumann"`` (ghost point) or ``"free"``
    (no x-derivative, used at the edges of a truncated Cauchy window).
    """

    def __init__(self, x: np.ndarray, c: float, left: str, right: str):
        self.x = x
        self.h = float(x[1] - x[0])
        self.c = c
        self.left, self.right = left, right
        n = x.size
        h2 = self.h**2
        ab = np.zeros((3, n))
        ab[1, :] = 2.0 / h2 + c
        ab[0, 1:] = -1.0 / h2
        ab[2, :-1] = -1.0 / h2
        for side, node, nb in ((left, 0, (0, 1)), (right, n - 1, (2, n - 2))):
            if side == "neumann":
                ab[nb] = -2.0 / h2
            elif side in ("free", "dirichlet"):
                ab[1, node] = c
                ab[nb] = 0.0
        self.ab = ab

    def apply(self, u, phi1: float, phi2: float) -> np.ndarray:
        """``(-d_xx + c) u`` including the Neumann data."""
        ab = self.ab
        out = ab[1] * u
        out[:-1] += ab[0, 1:] * u[1:]
        out[1:] += ab[2, :-1] * u[:-1]
        out += self.affine(phi1, phi2)
        return out

    def affine(self, phi1: float, phi2: float) -> np.ndarray:
        g = np.zeros(self.x.size)
        if self.left == "neumann":
            g[0] = 2.0 * phi1 / self.h
        if self.right == "neumann":
            g[-1] = -2.0 * phi2 / self.h
        return g

    def solve(self, diag: float, theta: float, rhs: np.ndarray, phi1: float, phi2: float) -> np.ndarray:
        ab = theta * self.ab
        ab[1] += diag
        rhs = rhs.copy()
        for side, node, nb, val in ((self.left, 0, (0, 1), phi1), (self.right, -1, (2, self.x.size - 2), phi2)):
            if side == "dirichlet":
                ab[1, node] = 1.0
                ab[nb] = 0.0
                rhs[node] = val
        try:
            with np.errstate(all="raise"):
                sol = solve_banded((1, 1), ab, rhs)
        except (np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
            raise SingularSystem(f"level system could not be solved: {exc}") from exc
        if not np.all(np.isfinite(sol)):
            raise SingularSystem("level system produced non-finite values")
        return sol


def cauchy_window(p: TelegraphParams, spec: ProblemSpec, *, rel: float = 1e-3, reach: float = 60.0):
    """Symmetric x-window for a truncated Cauchy problem.

    The data must drop below ``rel`` times its peak outside ``[-R, R]`` and
    the fundamental solution at ``y = T`` must fall by the same factor over
    the added margin.  Returns ``(-W, W)`` with ``W`` a multiple of 1/2.
    """
    probe = np.linspace(-reach, reach, 4001)
    ys = np.linspace(0.0, spec.T, 5)
    mags = [np.abs(_call(spec.tau1, probe))]
    if spec.tau2 is not None:
        mags.append(np.abs(_call(spec.tau2, probe)))
    if spec.f is not None:
        mags.extend(np.abs(_call(spec.f, probe, yv)) for yv in ys)
    mag = np.max(mags, axis=0)
    scale = float(mag.max())
    if scale == 0.0:
        data_r = 1.0
    else:
        big = np.abs(probe)[mag > rel * scale]
        data_r = float(big.max())
        if data_r >= reach - 1.0:
            raise ConfigError("the data do not decay inside the probe range; give FDConfig.window")
    q = QuadratureConfig(rel_tol=1e-6, abs_tol=1e-14)
    d = np.arange(0.0, reach, 0.5)
    g = np.abs(gamma_fs(p, q, d, spec.T))
    # the trailing maximum makes the margin robust to oscillating kernels
    tail = np.maximum.accumulate(g[::-1])[::-1]
    margin = float(d[np.argmax(tail <= rel * g[0])]) if np.any(tail <= rel * g[0]) else reach
    half = math.ceil(2.0 * (data_r + margin)) / 2.0
    return (-half, half)


def _setup(p: TelegraphParams, spec: ProblemSpec, cfg: FDConfig):
    spec.validate(p)
    if spec.variant == "cauchy":
        lo, hi = cfg.window if cfg.window is not None else cauchy_window(p, spec)
        left = right = "free"
    elif spec.variant == "rect":
        lo, hi = spec.a1, spec.a2
        left = "dirichlet" if spec.i == 0 else "neumann"
        right = "dirichlet" if spec.j == 0 else "neumann"
    else:
        raise ConfigError("fd_solve handles the Cauchy and rectangle problems only")
    x = np.linspace(lo, hi, cfg.nx)
    y = np.linspace(0.0, spec.T, cfg.ny + 1)
    return x, y, left, right


def fd_solve(p: TelegraphParams, spec: ProblemSpec, cfg: FDConfig) -> ScalarField:
    """March the implicit scheme from ``y = 0`` to ``y = T`` and return every level."""
    scheme, theta = cfg.resolve(p)
    x, y, left, right = _setup(p, spec, cfg)
    dy = float(y[1] - y[0])
    space = _Space(x, p.c, left, right)
    wa = caputo_weights(p.alpha, cfg.ny, dy)
    wb = caputo_weights(p.beta, cfg.ny, dy)
    phi1 = _call(spec.phi1, y)
    phi2 = _call(spec.phi2, y)
    f = np.stack([_call(spec.f, x, yv) for yv in y], axis=1)

    u = np.empty((x.size, y.size))
    u[:, 0] = _call(spec.tau1, x)
    half = scheme == "Order2Time"
    if half:
        v = np.empty_like(u)
        v[:, 0] = _call(spec.tau2, x)
        dv = np.empty((x.size, cfg.ny))
        diag = 0.5 * wa.scale * wa.b[0] * 2.0 / dy + 0.5 * p.b * wb.scale * wb.b[0]
    else:
        diag = wa.scale * wa.b[0] + p.b * wb.scale * wb.b[0]
    du = np.empty((x.size, cfg.ny))
    prev_la = np.zeros(x.size)
    prev_lb = np.zeros(x.size)

    for m in range(1, y.size):
        k = m - 1
        hb = du[:, :k] @ wb.b[m - 1 : 0 : -1] if k else np.zeros(x.size)
        known_prev = space.apply(u[:, k], phi1[k], phi2[k]) - f[:, k]
        if half:
            ha = dv[:, :k] @ wa.b[m - 1 : 0 : -1] if k else np.zeros(x.size)
            t_known = 0.5 * (wa.scale * (ha - 2.0 * wa.b[0] * v[:, k]) + prev_la)
            t_known += 0.5 * p.b * (wb.scale * hb + prev_lb)
        else:
            ha = du[:, :k] @ wa.b[m - 1 : 0 : -1] if k else np.zeros(x.size)
            t_known = wa.scale * ha + p.b * wb.scale * hb
        rhs = diag * u[:, k] - t_known + theta * (f[:, m] - space.affine(phi1[m], phi2[m])) - (1.0 - theta) * known_prev
        u[:, m] = space.solve(diag, theta, rhs, phi1[m], phi2[m])
        du[:, k] = u[:, m] - u[:, k]
        prev_lb = wb.scale * (wb.b[0] * du[:, k] + hb)
        if half:
            v[:, m] = 2.0 * du[:, k] / dy - v[:, k]
            dv[:, k] = v[:, m] - v[:, k]
            prev_la = wa.scale * (wa.b[0] * dv[:, k] + ha)

    meta = {
        "solver": "fd",
        "scheme": scheme,
        "theta": theta,
        "variant": spec.variant,
        "params": p.to_dict(),
        "nx": cfg.nx,
        "ny": cfg.ny,
    }
    return ScalarField(GridSpec(x, y), u, meta)


def residual(
    p: TelegraphParams,
    field: ScalarField,
    f_samples: ScalarField,
    *,
    theta: float | None = None,
    du0=None,
) -> ScalarField:
    """Discrete ``L u - f`` at interior nodes, collocated as in :func:`fd_solve`.

    The y-grid must start at 0 and be uniform.  Nodes where the stencil is
    not defined (the walls and ``y = 0``) hold NaN.  For ``alpha > 1`` the
    initial slope ``du0`` defaults to a second-order one-sided difference.
    """
    field.require_same_grid(f_samples)
    x, y = field.grid.x, field.grid.y
    if x.size < 3 or y.size < 3:
        raise GridMismatch("residual needs at least 3 nodes in x and y")
    dy = y[1] - y[0]
    if y[0] != 0.0 or not np.allclose(np.diff(y), dy, rtol=1e-9, atol=0):
        raise GridMismatch("residual needs a uniform y-grid starting at 0")
    scheme, th = FDConfig(x.size, y.size - 1, theta=theta).resolve(p)
    u = field.values
    ny = y.size - 1
    wa = caputo_weights(p.alpha, ny, dy)
    wb = caputo_weights(p.beta, ny, dy)
    if scheme == "Order2Time" and du0 is None:
        du0 = (-3.0 * u[:, 0] + 4.0 * u[:, 1] - u[:, 2]) / (2.0 * dy)
    la = np.concatenate([np.zeros((x.size, 1)), wa.apply(u, du0)], axis=1)
    lb = np.concatenate([np.zeros((x.size, 1)), wb.apply(u)], axis=1)
    hm, hp = np.diff(x)[:-1], np.diff(x)[1:]
    uxx = 2.0 * ((u[2:] - u[1:-1]) / hp[:, None] - (u[1:-1] - u[:-2]) / hm[:, None]) / (hm + hp)[:, None]
    space = -uxx + p.c * u[1:-1] - f_samples.values[1:-1]
    out = np.full(u.shape, np.nan)
    if scheme == "Order2Time":
        t_part = 0.5 * (la[1:-1, 1:] + la[1:-1, :-1]) + 0.5 * p.b * (lb[1:-1, 1:] + lb[1:-1, :-1])
    else:
        t_part = la[1:-1, 1:] + p.b * lb[1:-1, 1:]
    out[1:-1, 1:] = t_part + th * space[:, 1:] + (1.0 - th) * space[:, :-1]
    return ScalarField(field.grid, out, {"residual": True, "scheme": scheme, "theta": th})
