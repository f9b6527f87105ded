"""Command-line interface: ``fractel specfun|gamma|green|solve|verify``.

Exit codes: 0 success, 1 failed verification, 2 invalid input or
configuration, 3 numerical failure.  Every file written is accompanied by a
JSON manifest recording the command, all parameters and tolerances, the
tool version, wall time and warnings.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import click
import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import __version__
from .errors import (
    ConfigError,
    DomainError,
    FractelError,
    GridMismatch,
    GrowthViolation,
    NonConvergence,
    QuadratureFailure,
    SingularSystem,
)
from .exprparse import ExprSyntaxError, compile_expr, parse
from .field import SCHEMA, GridSpec, ScalarField
from .green import HalfStrip, ImageSeriesConfig, Rect
from .kernel import gamma_deriv
from .params import QuadratureConfig, TelegraphParams
from .solver import FieldEvaluationError, ProblemSpec, eval_field
from .specfun import DEFAULT_F01, WrightEval, f01, mittag_leffler, recip_gamma, wright_phi, wright_phi_dz

EXIT_FAILED_CHECK = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_CONFIG_ERRORS = (ConfigError, DomainError, GrowthViolation, GridMismatch)
_NUMERIC_ERRORS = (QuadratureFailure, NonConvergence, SingularSystem)


@dataclass
class RunManifest:
    """Everything needed to repeat a run; written next to each output file."""

    command: str
    args: dict
    tolerances: dict = field(default_factory=dict)
    version: str = __version__
    wall_time: float = 0.0
    warnings: list = field(default_factory=list)
    inputs: dict = field(default_factory=dict)
    threads: int = 1
    schema: int = SCHEMA

    def to_dict(self) -> dict:
        return asdict(self)


def _threads() -> int:
    raw = os.environ.get("FRACTEL_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"FRACTEL_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"FRACTEL_THREADS must be a positive integer, got {raw!r}")
    return n


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    """Run ``fn`` and translate library exceptions into the exit-code contract."""
    try:
        return fn()
    except ExprSyntaxError as exc:
        _fail(EXIT_CONFIG, f"{exc}\n{exc.caret()}" if exc.source else str(exc))
    except FieldEvaluationError as exc:
        code = EXIT_NUMERIC if isinstance(exc.cause, _NUMERIC_ERRORS) else EXIT_CONFIG
        _fail(code, str(exc))
    except _CONFIG_ERRORS as exc:
        _fail(EXIT_CONFIG, str(exc))
    except _NUMERIC_ERRORS as exc:
        _fail(EXIT_NUMERIC, str(exc))
    except FractelError as exc:
        _fail(EXIT_NUMERIC, str(exc))


def _axis(point, rng, count, name) -> np.ndarray:
    if point is not None and rng is not None:
        raise ConfigError(f"give either --{name} or --{name}-range, not both")
    if point is not None:
        return np.array([point], dtype=float)
    if rng is None:
        raise ConfigError(f"one of --{name} or --{name}-range is required")
    lo, hi = rng
    if count < 1 or (count > 1 and not hi > lo):
        raise ConfigError(f"--{name}-range needs lo < hi and a positive count")
    return np.array([lo]) if count == 1 else np.linspace(lo, hi, count)


def _write(field_: ScalarField, manifest: RunManifest, out: str | None) -> None:
    if out is None:
        sys.stdout.write(field_.to_csv())
        return
    csv_path, json_path = field_.write(out, {"manifest": manifest.to_dict()})
    click.echo(f"wrote {csv_path} and {json_path}", err=True)


def _params(alpha, b, c) -> TelegraphParams:
    return TelegraphParams(alpha, b, c)


def _quad(rel_tol, abs_tol) -> QuadratureConfig:
    return QuadratureConfig(rel_tol=rel_tol, abs_tol=abs_tol)


def _common_params(f):
    f = click.option("--alpha", type=float, required=True, help="Order alpha in (0, 2).")(f)
    f = click.option("--b", "b", type=float, default=0.0, show_default=True)(f)
    f = click.option("--c", "c", type=float, default=0.0, show_default=True)(f)
    return f


def _tolerances(f):
    f = click.option("--rel-tol", type=float, default=1e-10, show_default=True)(f)
    f = click.option("--abs-tol", type=float, default=1e-13, show_default=True)(f)
    return f


@click.group()
@click.version_option(__version__, prog_name="fractel")
def main():
    """Fundamental solution, Green functions and solutions of
    d^alpha u + b d^beta u - u_xx + c u = f with alpha = 2 beta."""


@main.group(hidden=True)
def specfun():
    """Evaluate the special functions used by the kernel."""


def _print_values(values):
    for v in np.atleast_1d(values):
        click.echo(f"{float(v):.17g}")


@specfun.command("wright")
@click.option("--beta", type=float, required=True)
@click.option("--mu", type=float, required=True)
@click.option("--z", "zs", type=float, multiple=True, required=True)
@click.option("--dz", is_flag=True, help="Return the z-derivative instead.")
def specfun_wright(beta, mu, zs, dz):
    """phi(-beta, mu; z)."""
    def run():
        cfg = WrightEval(beta)
        fn = wright_phi_dz if dz else wright_phi
        _print_values(fn(cfg, mu, np.array(zs)))

    _guarded(run)


@specfun.command("f01")
@click.option("--nu", type=float, required=True)
@click.option("--z", "zs", type=float, multiple=True, required=True)
def specfun_f01(nu, zs):
    """0F1(; nu; z)."""
    _guarded(lambda: _print_values(f01(DEFAULT_F01, nu, np.array(zs))))


@specfun.command("mittag-leffler")
@click.option("--alpha", type=float, required=True)
@click.option("--z", "zs", type=float, multiple=True, required=True)
def specfun_ml(alpha, zs):
    """E_alpha(z) for z <= 0."""
    _guarded(lambda: _print_values([mittag_leffler(alpha, z) for z in zs]))


@specfun.command("rgamma")
@click.option("--x", "xs", type=float, multiple=True, required=True)
def specfun_rgamma(xs):
    """1 / Gamma(x), zero at the poles."""
    _guarded(lambda: _print_values(recip_gamma(np.array(xs))))


@main.command()
@_common_params
@click.option("--x", "x", type=float, default=None)
@click.option("--x-range", type=(float, float), default=None)
@click.option("--nx", type=int, default=11, show_default=True)
@click.option("--y", "y", type=float, default=None)
@click.option("--y-range", type=(float, float), default=None)
@click.option("--ny", type=int, default=11, show_default=True)
@click.option("--nu", type=float, default=0.0, show_default=True, help="Riemann-Liouville order in y.")
@click.option("--m", "m", type=int, default=0, show_default=True, help="Number of x-derivatives.")
@_tolerances
@click.option("--out", type=str, default=None, help="Output stem; writes <stem>.csv and <stem>.json.")
def gamma(alpha, b, c, x, x_range, nx, y, y_range, ny, nu, m, rel_tol, abs_tol, out):
    """Fundamental solution d^m/dx^m D^nu Gamma(x, y) at a point or on a grid."""
    argv = dict(alpha=alpha, b=b, c=c, x=x, x_range=x_range, nx=nx, y=y, y_range=y_range, ny=ny,
                nu=nu, m=m, rel_tol=rel_tol, abs_tol=abs_tol)

    def run():
        t0 = time.perf_counter()
        threads = _threads()
        p = _params(alpha, b, c)
        q = _quad(rel_tol, abs_tol)
        xs = _axis(x, x_range, nx, "x")
        ys = _axis(y, y_range, ny, "y")
        if np.any(ys <= 0):
            raise DomainError("the fundamental solution is defined for y > 0 only")
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            vals = np.asarray(gamma_deriv(p, q, m, nu, X, Y), dtype=float)
        if xs.size == 1 and ys.size == 1 and out is None:
            click.echo(f"{float(vals.ravel()[0]):.17g}")
            return
        manifest = RunManifest("gamma", argv, q.to_dict(), threads=threads,
                               warnings=sorted({str(w.message) for w in caught}))
        manifest.wall_time = time.perf_counter() - t0
        fld = ScalarField(GridSpec(xs, ys), vals, {"quantity": "gamma", "params": p.to_dict(), "nu": nu, "m": m})
        _write(fld, manifest, out)

    _guarded(run)


@main.command()
@_common_params
@click.option("--kind", type=click.Choice(["half", "rect"]), required=True)
@click.option("--i", "i", type=click.IntRange(0, 1), default=0, show_default=True)
@click.option("--j", "j", type=click.IntRange(0, 1), default=0, show_default=True)
@click.option("--a1", type=float, default=0.0, show_default=True)
@click.option("--a2", type=float, default=None)
@click.option("--x", "x", type=float, required=True)
@click.option("--y", "y", type=float, required=True)
@click.option("--t", "t", type=float, required=True)
@click.option("--s", "s", type=float, default=0.0, show_default=True)
@click.option("--dt", is_flag=True, help="Differentiate in t.")
@click.option("--image-tol", type=float, default=1e-12, show_default=True)
@_tolerances
def green(alpha, b, c, kind, i, j, a1, a2, x, y, t, s, dt, image_tol, rel_tol, abs_tol):
    """Green function G_i (half-strip) or G_ij (rectangle) at one point."""
    def run():
        p = _params(alpha, b, c)
        q = _quad(rel_tol, abs_tol)
        if not s < y:
            raise DomainError("Green functions are evaluated for s < y only")
        if kind == "half":
            if x < a1 or t < a1:
                raise DomainError("half-strip points need x, t >= a1")
            g = HalfStrip(p, q, i, a1)
        else:
            if a2 is None:
                raise ConfigError("--kind rect needs --a2")
            if not (a1 <= x <= a2 and a1 <= t <= a2):
                raise DomainError("rectangle points need a1 <= x, t <= a2")
            g = Rect(p, q, ImageSeriesConfig(tol=image_tol), i, j, a1, a2)
        click.echo(f"{float(g.value(x, y, t, s, dt=int(dt))):.17g}")

    _guarded(run)


def _data_fn(src: str | None, args: tuple[str, ...], inputs: dict, name: str):
    """Expression text or ``@file`` with sampled values, as a vectorized function."""
    if src is None:
        return None
    if not src.startswith("@"):
        return compile_expr(parse(src, allowed=args), args)
    path = Path(src[1:])
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {name} data file {path}: {exc}") from None
    inputs[name] = {"path": str(path), "sha256": hashlib.sha256(raw).hexdigest()}
    text = raw.decode("utf-8", "replace")
    if len(args) == 2:
        fld = ScalarField.from_csv(text)
        interp = RegularGridInterpolator((fld.grid.x, fld.grid.y), fld.values, bounds_error=False, fill_value=None)
        gx, gy = fld.grid.x, fld.grid.y

        def fn2(xv, yv):
            xv, yv = np.broadcast_arrays(np.asarray(xv, float), np.asarray(yv, float))
            pts = np.stack([np.clip(xv, gx[0], gx[-1]), np.clip(yv, gy[0], gy[-1])], axis=-1)
            return interp(pts)

        return fn2
    rows = [r for r in text.splitlines() if r.strip()]
    try:
        data = np.array([[float(v) for v in r.split(",")[:2]] for r in rows if not r.strip()[0].isalpha()])
    except (ValueError, IndexError):
        raise ConfigError(f"{name} data file must hold two numeric columns") from None
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != 2:
        raise ConfigError(f"{name} data file must hold at least two rows of two columns")
    order = np.argsort(data[:, 0])
    xp, fp = data[order, 0], data[order, 1]
    if np.any(np.diff(xp) <= 0):
        raise ConfigError(f"{name} data file has repeated abscissae")
    # linear interpolation, constant beyond the sampled range
    return lambda v: np.interp(np.asarray(v, dtype=float), xp, fp)


@main.command()
@_common_params
@click.option("--variant", type=click.Choice(["cauchy", "half", "rect"]), required=True)
@click.option("--i", "i", type=click.IntRange(0, 1), default=0, show_default=True)
@click.option("--j", "j", type=click.IntRange(0, 1), default=0, show_default=True)
@click.option("--a1", type=float, default=0.0, show_default=True)
@click.option("--a2", type=float, default=None)
@click.option("--T", "T", type=float, default=1.0, show_default=True, help="Time horizon.")
@click.option("--tau1", type=str, required=True, help="u(x, 0) as an expression in x or @file.")
@click.option("--tau2", type=str, default=None, help="u_y(x, 0), required iff alpha > 1.")
@click.option("--phi1", type=str, default=None, help="Left wall data in y.")
@click.option("--phi2", type=str, default=None, help="Right wall data in y.")
@click.option("--f", "f", type=str, default=None, help="Source term in x and y.")
@click.option("--x-range", type=(float, float), required=True)
@click.option("--nx", type=int, default=11, show_default=True)
@click.option("--y-range", type=(float, float), required=True)
@click.option("--ny", type=int, default=5, show_default=True)
@click.option("--image-tol", type=float, default=1e-12, show_default=True)
@_tolerances
@click.option("--out", type=str, default=None, help="Output stem; writes <stem>.csv and <stem>.json.")
def solve(alpha, b, c, variant, i, j, a1, a2, T, tau1, tau2, phi1, phi2, f, x_range, nx, y_range, ny,
          image_tol, rel_tol, abs_tol, out):
    """Solve a Cauchy, half-strip or rectangle problem on a grid."""
    argv = dict(alpha=alpha, b=b, c=c, variant=variant, i=i, j=j, a1=a1, a2=a2, T=T, tau1=tau1, tau2=tau2,
                phi1=phi1, phi2=phi2, f=f, x_range=x_range, nx=nx, y_range=y_range, ny=ny,
                image_tol=image_tol, rel_tol=rel_tol, abs_tol=abs_tol)

    def run():
        t0 = time.perf_counter()
        threads = _threads()
        p = _params(alpha, b, c)
        q = _quad(rel_tol, abs_tol)
        cfg = ImageSeriesConfig(tol=image_tol)
        inputs: dict = {}
        spec = ProblemSpec(
            variant,
            _data_fn(tau1, ("x",), inputs, "tau1"),
            tau2=_data_fn(tau2, ("x",), inputs, "tau2"),
            phi1=_data_fn(phi1, ("y",), inputs, "phi1"),
            phi2=_data_fn(phi2, ("y",), inputs, "phi2"),
            f=_data_fn(f, ("x", "y"), inputs, "f"),
            i=i, j=j, a1=a1, a2=a2, T=T,
        )
        spec.validate(p)
        grid = GridSpec(_axis(None, x_range, nx, "x"), _axis(None, y_range, ny, "y"))
        tol = {"quadrature": q.to_dict(), "image_tol": image_tol}
        manifest = RunManifest("solve", argv, tol, inputs=inputs, threads=threads)
        try:
            fld = eval_field(p, q, cfg, spec, grid)
        except FieldEvaluationError as exc:
            if out is not None:
                manifest.wall_time = time.perf_counter() - t0
                exc.partial.write(out, {"manifest": manifest.to_dict()})
            raise
        manifest.wall_time = time.perf_counter() - t0
        manifest.warnings = fld.meta.get("warnings", [])
        _write(fld, manifest, out)

    _guarded(run)


@main.command()
@click.argument("scenario")
@click.option("--levels", type=click.IntRange(1, 3), default=3, show_default=True,
              help="Refinement levels for the finite-difference comparisons.")
@click.option("--report", type=click.Path(dir_okay=False), default=None, help="Write the JSON report here.")
def verify(scenario, levels, report):
    """Run a named verification scenario (or 'all', or a JSON scenario file)."""
    from .verify import SCENARIOS, run

    def go():
        name, lv = scenario, levels
        if scenario not in SCENARIOS and scenario != "all":
            path = Path(scenario)
            if not path.is_file():
                raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)} or all")
            try:
                doc = json.loads(path.read_text())
                name = doc["scenario"]
                lv = int(doc.get("levels", levels))
            except (ValueError, KeyError, TypeError) as exc:
                raise ConfigError(f"scenario file {path} is not valid: {exc}") from None
        t0 = time.perf_counter()
        rep = run(name, lv)
        rep["wall_time"] = time.perf_counter() - t0
        rep["version"] = __version__
        for res in rep["results"]:
            for chk in res["checks"]:
                mark = "PASS" if chk["passed"] else "FAIL"
                click.echo(f"[{mark}] {res['scenario']}: {chk['name']} {json.dumps(chk['metrics'])}")
        click.echo(f"overall: {'PASS' if rep['passed'] else 'FAIL'}")
        if report:
            Path(report).write_text(json.dumps(rep, indent=1, sort_keys=True) + "\n")
        if not rep["passed"]:
            sys.exit(EXIT_FAILED_CHECK)

    _guarded(go)


def manifest_argv(manifest: dict) -> list[str]:
    """Command-line arguments that repeat the run described by ``manifest``."""
    argv = [manifest["command"]]
    for key, val in sorted(manifest["args"].items()):
        if val is None:
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(val, bool):
            if val:
                argv.append(flag)
        elif isinstance(val, (list, tuple)):
            argv += [flag, *(repr(float(v)) for v in val)]
        elif isinstance(val, float):
            argv += [flag, repr(val)]
        else:
            argv += [flag, str(val)]
    return argv


@main.command()
@click.argument("manifest_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=str, default=None, help="Output stem for the repeated run.")
def rerun(manifest_file, out):
    """Repeat the run recorded in a JSON output file or bare manifest."""
    def go():
        try:
            doc = json.loads(Path(manifest_file).read_text())
        except ValueError as exc:
            raise ConfigError(f"{manifest_file} is not JSON: {exc}") from None
        manifest = doc.get("manifest", doc)
        if manifest.get("command") not in ("gamma", "solve"):
            raise ConfigError(f"{manifest_file} does not hold a gamma or solve manifest")
        argv = manifest_argv({**manifest, "args": {**manifest["args"], "out": out}})
        main.main(args=argv, prog_name="fractel", standalone_mode=False)

    _guarded(go)


if __name__ == "__main__":  # pragma: no cover
    main()
