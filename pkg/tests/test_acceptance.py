"""One test per acceptance criterion; each prints a ``criterion N: PASS/FAIL`` line."""

from __future__ import annotations

import math

import numpy as np

from fractel import ConfigError, TelegraphParams, gamma_deriv
from fractel.checks import boundary_jump
from fractel.exprparse import EvalError, ExprSyntaxError, evaluate, parse
from fractel.green import DEFAULT_IMAGES, Rect
from fractel.kernel import DEFAULT_QUAD
from fractel.specfun import DEFAULT_F01, WrightEval, f01, wright_phi
from fractel.verify import (
    cauchy_vs_fd,
    constant_solution,
    delta_limit,
    far_field,
    heat_kernel,
    mittag_leffler_check,
    rect_vs_fd,
)


def _summary(checks) -> tuple[bool, str]:
    bad = [c.name for c in checks if not c.passed]
    return not bad, f"{len(checks) - len(bad)}/{len(checks)} checks" + (f"; failing: {', '.join(bad)}" if bad else "")


def test_special_function_accuracy(specfun_ref, criterion):
    worst_w = worst_f = 0.0
    ok_under = True
    for beta in (0.25, 0.4, 0.5, 0.75):
        for mu in (-1.5, -1.0, -0.5, 0.0, 0.5, 1.0):
            rows = [r for r in specfun_ref["wright"] if r["beta"] == beta and r["mu"] == mu and -30 <= r["z"] <= 5]
            z = np.array([r["z"] for r in rows])
            ref = np.array([r["value"] for r in rows])
            under = np.array([r["underflow"] for r in rows])
            got = wright_phi(WrightEval(beta), mu, z)
            ok_under &= bool(np.all(np.abs(got[under]) < 1e-300))
            fin = ~under & (ref != 0)
            worst_w = max(worst_w, float(np.max(np.abs(got[fin] - ref[fin]) / np.abs(ref[fin]))))
    rows = [r for r in specfun_ref["f01"] if -30 <= r["z"] <= 5]
    for nu in sorted({r["nu"] for r in rows}):
        sub = [r for r in rows if r["nu"] == nu]
        got = f01(DEFAULT_F01, nu, np.array([r["z"] for r in sub]))
        ref = np.array([r["value"] for r in sub])
        worst_f = max(worst_f, float(np.max(np.abs(got - ref) / np.abs(ref))))
    z = np.linspace(-30.0, 5.0, 351)
    closed = np.exp(-(z**2) / 4) / math.sqrt(math.pi)
    worst_c = float(np.max(np.abs(wright_phi(WrightEval(0.5), 0.5, z) - closed) / closed))
    ok = ok_under and max(worst_w, worst_f, worst_c) <= 1e-10
    criterion(1, ok, f"wright rel {worst_w:.2e}, 0F1 rel {worst_f:.2e}, closed form rel {worst_c:.2e} (tol 1e-10)")


def test_diffusion_wave_reduction(criterion):
    checks = heat_kernel()
    ok, text = _summary(checks)
    worst = max(c.metrics["max_rel_error"] for c in checks)
    criterion(2, ok, f"{text}; max rel error {worst:.2e} (tol 1e-8)")


def test_dual_path_equality(criterion):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        alpha = rng.uniform(0.1, 1.9)
        p = TelegraphParams(alpha, rng.uniform(-1.0, 1.0), rng.uniform(-0.5, 1.0))
        nu = rng.uniform(-0.99, alpha - 0.01)
        x, y = rng.uniform(-2.5, 2.5), rng.uniform(0.1, 2.0)
        d = gamma_deriv(p, DEFAULT_QUAD, 0, nu, x, y, path="direct")
        r = gamma_deriv(p, DEFAULT_QUAD, 0, nu, x, y, path="recursion", k=None)
        worst = max(worst, abs(d - r) / max(abs(d), 1e-300))
    criterion(3, worst <= 1e-7, f"100 random points, max rel difference {worst:.2e} (tol 1e-7)")


def test_delta_property(criterion):
    (check,) = delta_limit()
    errs = check.metrics["errors"]
    criterion(4, check.passed, "errors " + ", ".join(f"{e:.3e}" for e in errs) + " (strictly decreasing, final <= 1e-2)")


def test_jump_relation(criterion):
    y, x0 = 0.8, 0.3
    dens = lambda s: 1.0 + s  # noqa: E731
    ok, parts = True, []
    for alpha, b, c in ((0.8, 0.3, 0.2), (1.5, 0.2, 0.1)):
        p = TelegraphParams(alpha, b, c)
        gaps = []
        for d in (1e-1, 1e-2, 1e-3):
            right = boundary_jump(p, DEFAULT_QUAD, dens, x0, x0 + d, y)
            left = boundary_jump(p, DEFAULT_QUAD, dens, x0, x0 - d, y)
            ok &= right > 0 > left
            gaps.append((right - left) / dens(y))
        ok &= abs(gaps[-1] - 1.0) <= 0.02
        parts.append(f"alpha={alpha} gap/p " + ", ".join(f"{g:.4f}" for g in gaps))
    criterion(5, ok, "; ".join(parts) + " (finest within 2%)")


def test_constant_solution_invariance(criterion):
    checks = constant_solution()
    ok, text = _summary(checks)
    worst = max(c.metrics["max_deviation"] for c in checks)
    criterion(6, ok, f"{text}; max |u - 1| {worst:.2e} (tol 1e-6)")


def test_mittag_leffler(criterion):
    checks = mittag_leffler_check()
    ok, text = _summary(checks)
    worst = max(c.metrics["abs_error"] for c in checks)
    criterion(7, ok, f"{text}; max error {worst:.2e} (tol 1e-6)")


def test_green_boundary_conditions(criterion):
    rng = np.random.default_rng(8)
    p = TelegraphParams(0.8, 0.4, 0.3)
    a1, a2 = 0.0, 1.0
    tol = 1e-8 + DEFAULT_IMAGES.tol
    worst_trace = worst_sym = 0.0
    for i in (0, 1):
        for j in (0, 1):
            g = Rect(p, DEFAULT_QUAD, DEFAULT_IMAGES, i, j, a1, a2)
            x = rng.uniform(a1, a2, 100)
            ys = rng.uniform(0.05, 1.5, 100)
            for wall, order in ((a1, i), (a2, j)):
                worst_trace = max(worst_trace, float(np.max(np.abs(g.value_lag(x, wall, ys, dt=order)))))
            if i == j:
                t = rng.uniform(a1, a2, 100)
                worst_sym = max(worst_sym, float(np.max(np.abs(g.value_lag(x, t, ys) - g.value_lag(t, x, ys)))))
    ok = worst_trace <= tol and worst_sym <= tol
    criterion(8, ok, f"max trace {worst_trace:.2e}, max asymmetry {worst_sym:.2e} (tol {tol:.1e})")


def test_analytic_vs_finite_differences(criterion):
    checks = cauchy_vs_fd(3) + rect_vs_fd(3)
    ok, text = _summary(checks)
    gaps = [c.metrics["gaps"] for c in checks if "finest" in c.name]
    shown = "; ".join(", ".join(f"{g:.2e}" for g in row) for row in gaps)
    criterion(9, ok, f"{text}; gaps gaussian/sine {shown} (finest <= 5%, monotone)")


def test_far_field_decay(criterion):
    checks = far_field()
    ok, text = _summary(checks)
    ratios = ", ".join(f"{c.metrics['slope'] / c.metrics['target']:.3f}" for c in checks)
    criterion(10, ok, f"{text}; slope/target for beta 0.4, 0.5, 0.6: {ratios} (within 10%)")


_PRECEDENCE = [
    ("2+3*4", 14.0),
    ("(2+3)*4", 20.0),
    ("-2^2", -4.0),
    ("2^3^2", 512.0),
    ("2^-1", 0.5),
    ("8/4/2", 1.0),
    ("7-2-1", 4.0),
    ("-2*-3", 6.0),
    ("2*3^2", 18.0),
    ("-(2)^2", -4.0),
    ("(-2)^2", 4.0),
    ("exp(-0^2)", 1.0),
]


def test_parser_precedence_and_fuzz(criterion):
    wrong = [src for src, v in _PRECEDENCE if evaluate(parse(src), {}) != v]
    rng = np.random.default_rng(99)
    alphabet = list("0123456789.eE+-*/^() xystpicosqrtabexpn,")
    crashes = 0
    cases = 0
    inputs = [bytes(rng.integers(0, 256, rng.integers(0, 40))) for _ in range(3000)]
    inputs += ["".join(rng.choice(alphabet, rng.integers(0, 30))) for _ in range(3000)]
    inputs += ["(" * 5000 + "x" + ")" * 5000, "-" * 10000 + "x", "x^" * 10000 + "x"]
    for src in inputs:
        cases += 1
        try:
            e = parse(src)
            evaluate(e, {"x": 0.3, "y": -1.2, "t": 2.0, "s": 0.0})
        except (ExprSyntaxError, EvalError, ConfigError):
            pass
        except Exception:  # noqa: BLE001
            crashes += 1
    ok = not wrong and crashes == 0
    detail = f"{len(_PRECEDENCE) - len(wrong)}/{len(_PRECEDENCE)} precedence cases, {crashes} crashes in {cases} fuzz inputs"
    criterion(11, ok, detail)
