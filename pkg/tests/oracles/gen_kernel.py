"""Generate reference values of the fundamental solution by Laplace inversion.

Run from the repository root::

    python3 tests/oracles/gen_kernel.py

Writes ``tests/data/kernel_ref.json``.  The oracle never touches the
tau-integral, the Wright function or 0F1: in the Laplace variable ``p`` the
kernel is ``exp(-|x| m) / (2 m)`` with ``m^2 = p^alpha + b p^beta + c``, and
``d^k/dx^k D^nu`` multiplies this by ``p^nu (-sign(x) m)^k``.  Each value is
inverted with a shifted Talbot contour at two working precisions that must agree
to 13 digits (relative, or 1e-20 absolute).
"""

from __future__ import annotations

import json
import random
from pathlib import Path

import mpmath as mp

OUT = Path(__file__).resolve().parents[1] / "data" / "kernel_ref.json"


def transform(alpha, b, c, x, nu=0.0, m=0, weight_b=0.0, nu_b=0.0):
    alpha, b, c, x = (mp.mpf(v) for v in (alpha, b, c, x))
    beta = alpha / 2

    def F(p):
        root = mp.sqrt(p**alpha + b * p**beta + c)
        base = mp.exp(-abs(x) * root) / (2 * root) * (-mp.sign(x) * root) ** m
        return (p**nu + weight_b * p**nu_b) * base

    return F


def rightmost_singularity(alpha, b, c):
    """Largest real part of the zeros of ``p^alpha + b p^beta + c`` on the principal sheet."""
    beta = mp.mpf(alpha) / 2
    best = mp.mpf(0)
    disc = mp.sqrt(mp.mpc(mp.mpf(b) ** 2 / 4 - c))
    for q in (-mp.mpf(b) / 2 + disc, -mp.mpf(b) / 2 - disc):
        # q = p^beta must be reachable with |arg p| < pi
        if q != 0 and abs(mp.arg(q)) < beta * mp.pi:
            best = max(best, mp.re(q ** (1 / beta)))
    return best


def invert(F, y, shift=0):
    # Talbot's contour encloses the left half-plane only, so move every
    # singularity there first: L^-1[F](y) = exp(s y) L^-1[F(p + s)](y)
    vals = []
    for dps in (90, 120):
        with mp.workdps(dps):
            s = mp.mpf(shift) + 1
            vals.append(mp.exp(s * y) * mp.invertlaplace(lambda p: F(p + s), mp.mpf(y), method="talbot"))
    if abs(vals[0] - vals[1]) > max(mp.mpf(10) ** -13 * abs(vals[1]), mp.mpf(10) ** -20):
        raise RuntimeError(f"Talbot inversion did not stabilise: {vals}")
    return float(vals[1])


def main():
    rng = random.Random(20240611)
    gamma = []
    for _ in range(40):
        alpha = round(rng.uniform(0.2, 1.8), 3)
        b = round(rng.uniform(-0.6, 1.2), 3)
        c = round(rng.uniform(-0.4, 0.8), 3)
        x = round(rng.uniform(-3.0, 3.0), 3)
        y = round(rng.uniform(0.1, 2.0), 3)
        gamma.append({"alpha": alpha, "b": b, "c": c, "x": x, "y": y, "value": invert(transform(alpha, b, c, x), y, rightmost_singularity(alpha, b, c))})
    # spec examples and named pins
    pins = {
        "gamma_fs_a1_b1_c05": invert(transform(1.0, 1.0, 0.5, 0.5), 0.8),
        "initial_kernel_k1": invert(transform(1.0, 1.0, 0.0, 0.5, nu=0.0, weight_b=1.0, nu_b=-0.5), 0.4),
        "green_half_term1": invert(transform(0.8, 0.5, 0.25, 0.7), 0.4),
        "green_half_term2": invert(transform(0.8, 0.5, 0.25, 1.3), 0.4),
    }
    derivs = []
    for alpha, b, c, x, y, nu, m in (
        (0.6, 0.3, 0.2, 0.8, 0.7, 0.0, 1),
        (0.6, 0.3, 0.2, -0.8, 0.7, 0.0, 1),
        (1.4, 0.5, -0.1, 1.1, 0.9, 0.0, 1),
        (1.4, 0.5, -0.1, 1.1, 0.9, 0.0, 2),
        (0.9, 0.0, 0.4, 0.5, 1.2, 0.0, 2),
        (0.8, 0.5, 0.25, 0.6, 0.5, -0.2, 0),
        (0.8, 0.5, 0.25, 0.6, 0.5, 0.3, 0),
        (1.5, 0.2, 0.1, 0.9, 1.0, 0.5, 0),
        (1.5, 0.2, 0.1, 0.9, 1.0, -0.5, 0),
        (1.5, 0.2, 0.1, 0.9, 1.0, 1.2, 1),
        (0.5, 1.0, 0.3, 1.5, 0.3, 0.4, 1),
    ):
        derivs.append(
            {"alpha": alpha, "b": b, "c": c, "x": x, "y": y, "nu": nu, "m": m,
             "value": invert(transform(alpha, b, c, x, nu=nu, m=m), y, rightmost_singularity(alpha, b, c))}
        )
    OUT.write_text(json.dumps({"gamma": gamma, "pins": pins, "derivs": derivs}, indent=1))
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
