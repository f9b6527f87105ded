"""Named verification scenarios with machine-readable pass/fail reports.

Each scenario returns a list of :class:`Check` records; a scenario passes
when every check does.  The finite-difference comparisons report the gap at
each refinement level together with the observed order.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .checks import boundary_jump, far_field_slope, rel_error, relative_gap, smoothing_errors
from .errors import ConfigError
from .green import DEFAULT_IMAGES, Rect
from .kernel import DEFAULT_QUAD, gamma_deriv, gamma_fs, wright_config
from .oracle import FDConfig, fd_solve
from .params import TelegraphParams
from .solver import ProblemSpec, solve_cauchy, solve_half, solve_rect
from .specfun import DEFAULT_F01, f01, mittag_leffler, wright_phi


@dataclass
class Check:
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)


def _one(x):
    return np.ones(np.shape(x))


def _zero(x):
    return np.zeros(np.shape(x))


def constant_solution(levels: int = 3) -> list[Check]:
    """Constant data with ``c = 0`` must reproduce ``u = 1`` in every geometry."""
    checks = []
    for alpha, b in ((0.5, 0.3), (1.0, 0.0), (1.5, 0.4)):
        p = TelegraphParams(alpha, b, 0.0)
        t2 = _zero if p.n == 2 else None
        cases = [("cauchy", ProblemSpec("cauchy", _one, tau2=t2), np.array([-1.0, 0.3, 2.0]))]
        for i in (0, 1):
            sp = ProblemSpec("half", _one, tau2=t2, phi1=_one if i == 0 else _zero, i=i, a1=0.0)
            cases.append((f"half i={i}", sp, np.array([0.05, 0.4, 1.5])))
        for i in (0, 1):
            for j in (0, 1):
                sp = ProblemSpec(
                    "rect", _one, tau2=t2, phi1=_one if i == 0 else _zero, phi2=_one if j == 0 else _zero,
                    i=i, j=j, a1=0.0, a2=1.0,
                )
                cases.append((f"rect i={i} j={j}", sp, np.array([0.05, 0.5, 0.9])))
        for label, sp, xs in cases:
            solve = {"cauchy": lambda s, x, y: solve_cauchy(p, DEFAULT_QUAD, s, x, y),
                     "half": lambda s, x, y: solve_half(p, DEFAULT_QUAD, DEFAULT_IMAGES, s, x, y),
                     "rect": lambda s, x, y: solve_rect(p, DEFAULT_QUAD, DEFAULT_IMAGES, s, x, y)}[sp.variant]
            dev = max(float(np.max(np.abs(np.atleast_1d(solve(sp, xs, y)) - 1.0))) for y in (0.7,))
            checks.append(Check(f"alpha={alpha} {label}", dev <= 1e-6, {"max_deviation": dev}))
    return checks


def heat_kernel(levels: int = 3) -> list[Check]:
    """``b = c = 0`` reduces the kernel to a Wright function; ``alpha = 1`` to the heat kernel."""
    xs = np.linspace(-3.0, 3.0, 21)
    ys = np.linspace(0.1, 2.0, 11)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    checks = []
    for alpha in (0.5, 1.0, 1.5):
        p = TelegraphParams(alpha)
        beta = p.beta
        got = gamma_fs(p, DEFAULT_QUAD, X, Y)
        ref = 0.5 * Y ** (beta - 1) * wright_phi(wright_config(beta), beta, -np.abs(X) * Y**-beta)
        err = float(np.max(rel_error(got, ref)))
        checks.append(Check(f"wright form alpha={alpha}", err <= 1e-8, {"max_rel_error": err}))
        if alpha == 1.0:
            heat = np.exp(-(X**2) / (4 * Y)) / (2 * np.sqrt(np.pi * Y))
            err = float(np.max(rel_error(got, heat)))
            checks.append(Check("heat kernel alpha=1", err <= 1e-8, {"max_rel_error": err}))
    return checks


def mittag_leffler_check(levels: int = 3) -> list[Check]:
    """Constant Cauchy data with ``b = 0, c = 1`` follows ``E_alpha(-y^alpha)``."""
    checks = []
    for alpha in (0.5, 1.0, 1.5):
        p = TelegraphParams(alpha, 0.0, 1.0)
        sp = ProblemSpec("cauchy", _one, tau2=_zero if p.n == 2 else None)
        for y in (0.25, 0.5, 1.0):
            u = solve_cauchy(p, DEFAULT_QUAD, sp, np.array([0.0, 1.0]), y)
            err = float(np.max(np.abs(u - mittag_leffler(alpha, -(y**alpha)))))
            checks.append(Check(f"alpha={alpha} y={y}", err <= 1e-6, {"abs_error": err}))
    return checks


def green_boundary(levels: int = 3) -> list[Check]:
    """Image Green functions meet their wall conditions and symmetry."""
    rng = np.random.default_rng(7)
    p = TelegraphParams(0.8, 0.4, 0.3)
    a1, a2 = 0.0, 1.0
    checks = []
    x = rng.uniform(a1, a2, 20)
    ys = rng.uniform(0.05, 1.0, 20)
    tol = 1e-8 + DEFAULT_IMAGES.tol
    for i in (0, 1):
        for j in (0, 1):
            g = Rect(p, DEFAULT_QUAD, DEFAULT_IMAGES, i, j, a1, a2)
            res = []
            for wall, order in ((a1, i), (a2, j)):
                res.append(np.max(np.abs(g.value_lag(x, wall, ys, dt=order))))
            worst = float(max(res))
            checks.append(Check(f"traces i={i} j={j}", worst <= tol, {"max_trace": worst}))
            if i == j:
                t = rng.uniform(a1, a2, 20)
                sym = float(np.max(np.abs(g.value_lag(x, t, ys) - g.value_lag(t, x, ys))))
                checks.append(Check(f"symmetry i=j={i}", sym <= tol, {"max_asymmetry": sym}))
    return checks


def _fd_levels(levels: int):
    grids = [(51, 50), (101, 100), (201, 200)]
    if not 1 <= levels <= len(grids):
        raise ConfigError(f"levels must lie in 1..{len(grids)}")
    return grids[len(grids) - levels :]


def _fd_compare(name, p, spec, xs, ys, analytic, levels, window=None) -> list[Check]:
    ref = np.array([np.atleast_1d(analytic(xs, y)) for y in ys]).T
    gaps = []
    for nx, ny in _fd_levels(levels):
        fd = fd_solve(p, spec, FDConfig(nx, ny, window=window))
        ix = [int(np.argmin(np.abs(fd.grid.x - v))) for v in xs]
        iy = [int(np.argmin(np.abs(fd.grid.y - v))) for v in ys]
        gaps.append(relative_gap(fd.values[np.ix_(ix, iy)], ref))
    orders = [math.log2(gaps[k] / gaps[k + 1]) for k in range(len(gaps) - 1) if gaps[k + 1] > 0]
    mono = all(gaps[k + 1] < gaps[k] for k in range(len(gaps) - 1))
    return [
        Check(f"{name} finest gap", gaps[-1] <= 0.05, {"gaps": gaps, "observed_orders": orders}),
        Check(f"{name} monotone refinement", mono, {"gaps": gaps}),
    ]


def cauchy_vs_fd(levels: int = 3) -> list[Check]:
    """Gaussian Cauchy data against the finite-difference oracle."""
    p = TelegraphParams(0.8, 0.5, 0.25)
    spec = ProblemSpec("cauchy", lambda x: np.exp(-(x**2)))
    xs = np.array([-3.2, -1.6, 0.0, 1.6, 3.2])
    return _fd_compare(
        "gaussian cauchy", p, spec, xs, (0.2, 0.5, 1.0),
        lambda x, y: solve_cauchy(p, DEFAULT_QUAD, spec, x, y), levels, window=(-8.0, 8.0),
    )


def rect_vs_fd(levels: int = 3) -> list[Check]:
    """Sine data on the unit interval with zero wall values against the oracle."""
    p = TelegraphParams(0.6, 0.3, 0.1)
    spec = ProblemSpec("rect", lambda x: np.sin(np.pi * x), i=0, j=0, a1=0.0, a2=1.0)
    xs = np.array([0.2, 0.4, 0.6, 0.8])
    return _fd_compare(
        "sine rect", p, spec, xs, (0.2, 0.5, 1.0),
        lambda x, y: solve_rect(p, DEFAULT_QUAD, DEFAULT_IMAGES, spec, x, y), levels,
    )


def delta_limit(levels: int = 3) -> list[Check]:
    """The ``D^(alpha-1)`` weight smooths ``cos`` back to itself as ``y -> 0``."""
    p = TelegraphParams(1.5, 0.1, 0.05)
    errs = smoothing_errors(p, DEFAULT_QUAD, np.cos, [-2.0, -0.7, 0.0, 0.9, 2.5], [0.1, 0.05, 0.025, 0.0125])
    mono = all(errs[k + 1] < errs[k] for k in range(len(errs) - 1))
    return [Check("cos smoothing", mono and errs[-1] <= 1e-2, {"errors": errs})]


def jump_relation(levels: int = 3) -> list[Check]:
    """The single-layer integral of ``Gamma_x`` jumps by the density across ``t = x``."""
    checks = []
    y, x0 = 0.8, 0.3
    dens = lambda s: 1.0 + s  # noqa: E731
    for alpha, b, c in ((0.8, 0.3, 0.2), (1.5, 0.2, 0.1)):
        p = TelegraphParams(alpha, b, c)
        d = 1e-3
        right = boundary_jump(p, DEFAULT_QUAD, dens, x0, x0 + d, y)
        left = boundary_jump(p, DEFAULT_QUAD, dens, x0, x0 - d, y)
        gap = (right - left) / dens(y)
        ok = right > 0 > left and abs(gap - 1.0) <= 0.02
        checks.append(Check(f"alpha={alpha}", ok, {"right": right, "left": left, "gap_over_density": gap}))
    return checks


def far_field(levels: int = 3) -> list[Check]:
    """``log|Gamma|`` falls like ``-rho_beta(y) |x|^(1/(1-beta))``."""
    checks = []
    for beta in (0.4, 0.5, 0.6):
        slope, target = far_field_slope(TelegraphParams(2 * beta), 1.0)
        ratio = slope / target
        checks.append(Check(f"beta={beta}", abs(ratio - 1.0) <= 0.1, {"slope": slope, "target": target}))
    return checks


def dual_path(levels: int = 3) -> list[Check]:
    """Wright-shift and integration-by-parts evaluations of ``D^nu Gamma`` agree."""
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        alpha = rng.uniform(0.2, 1.8)
        p = TelegraphParams(alpha, rng.uniform(-0.5, 1.0), rng.uniform(-0.2, 0.8))
        nu = rng.uniform(-0.99, alpha - 0.01)
        x, y = rng.uniform(-2, 2), rng.uniform(0.1, 2.0)
        d = gamma_deriv(p, DEFAULT_QUAD, 0, nu, x, y, path="direct")
        r = gamma_deriv(p, DEFAULT_QUAD, 0, nu, x, y, path="recursion", k=None)
        worst = max(worst, abs(d - r) / max(abs(d), 1e-300))
    return [Check("direct vs recursion", worst <= 1e-7, {"max_rel_diff": worst})]


def special_functions(levels: int = 3) -> list[Check]:
    """Closed forms: ``phi(-1/2, 1/2; z) = exp(-z^2/4)/sqrt(pi)`` and ``0F1(3/2; z^2/4) = sinh z / z``."""
    z = np.linspace(-10.0, 5.0, 61)
    got = wright_phi(wright_config(0.5), 0.5, z)
    ref = np.exp(-(z**2) / 4) / math.sqrt(math.pi)
    e1 = float(np.max(np.abs(got - ref) / ref))
    w = np.linspace(0.5, 6.0, 23)
    e2 = float(np.max(np.abs(f01(DEFAULT_F01, 1.5, w**2 / 4) - np.sinh(w) / w) / (np.sinh(w) / w)))
    return [
        Check("wright closed form", e1 <= 1e-10, {"max_rel_error": e1}),
        Check("0F1 closed form", e2 <= 1e-10, {"max_rel_error": e2}),
    ]


SCENARIOS = {
    "constant-solution": constant_solution,
    "heat-kernel": heat_kernel,
    "mittag-leffler": mittag_leffler_check,
    "green-bc": green_boundary,
    "cauchy-vs-fd": cauchy_vs_fd,
    "rect-vs-fd": rect_vs_fd,
    "delta-limit": delta_limit,
    "jump-relation": jump_relation,
    "far-field": far_field,
    "dual-path": dual_path,
    "special-functions": special_functions,
}


def run(name: str, levels: int = 3) -> dict:
    """Run one scenario (or ``"all"``) and return the report document."""
    names = list(SCENARIOS) if name == "all" else [name]
    for n in names:
        if n not in SCENARIOS:
            raise ConfigError(f"unknown scenario {n!r}; choose from {', '.join(SCENARIOS)} or all")
    report = {"schema": 1, "scenario": name, "levels": levels, "results": []}
    for n in names:
        checks = SCENARIOS[n](levels)
        report["results"].append(
            {"scenario": n, "passed": all(c.passed for c in checks), "checks": [asdict(c) for c in checks]}
        )
    report["passed"] = all(r["passed"] for r in report["results"])
    return report
